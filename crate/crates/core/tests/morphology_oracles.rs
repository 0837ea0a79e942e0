mod common;

use common::{brute_edt, flood_fill, random_mask};
use himforge::postprocess::{area_opening, connected_components, distance_transform, Connectivity};
use himforge::{BinaryMask, Error, Rng};

const CONNECTIVITIES: [Connectivity; 2] = [Connectivity::Four, Connectivity::Eight];

#[test]
fn labeling_matches_flood_fill() {
    let mut rng = Rng::new(101);
    for _ in 0..100 {
        let mask = random_mask(&mut rng, 64, 64, 0.4);
        for conn in CONNECTIVITIES {
            let (ids, count) = flood_fill(&mask, conn);
            let labels = connected_components(&mask, conn);
            assert_eq!(labels.count(), count);
            assert_eq!(labels.ids(), &ids[..]);
        }
    }
}

#[test]
fn area_opening_matches_component_filter() {
    let mut rng = Rng::new(202);
    for i in 0..100 {
        let mask = random_mask(&mut rng, 32 + i % 33, 64 - i % 33, 0.45);
        let min_area = 1 + (i * 7) % 40;
        for conn in CONNECTIVITIES {
            let (ids, count) = flood_fill(&mask, conn);
            let mut area = vec![0usize; count as usize + 1];
            for &id in &ids {
                area[id as usize] += 1;
            }
            let expected: Vec<bool> = ids.iter().map(|&id| id != 0 && area[id as usize] >= min_area).collect();
            assert_eq!(area_opening(&mask, min_area, conn).bits(), &expected[..]);
        }
    }
}

#[test]
fn distance_transform_matches_exhaustive_search() {
    let mut rng = Rng::new(303);
    for i in 0..100 {
        let density = 0.5 + 0.45 * (i as f64 / 99.0);
        let mut mask = random_mask(&mut rng, 32, 32, density);
        if mask.count_ones() == 32 * 32 {
            let mut bits = mask.bits().to_vec();
            bits[0] = false;
            mask = BinaryMask::new(32, 32, bits).unwrap();
        }
        let got = distance_transform(&mask).unwrap();
        for (a, b) in got.values().iter().zip(brute_edt(&mask)) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn full_foreground_has_no_background() {
    let mask = BinaryMask::from_fn(8, 8, |_, _| true);
    assert!(matches!(distance_transform(&mask), Err(Error::NoBackground)));
}
