use super::Connectivity;
use crate::raster::{BinaryMask, LabelMap};

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let grand = parent[parent[x as usize] as usize];
        parent[x as usize] = grand;
        x = grand;
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) -> u32 {
    let (ra, rb) = (find(parent, a), find(parent, b));
    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
    parent[hi as usize] = lo;
    lo
}

/// Two-pass union-find labeling.
///
/// Ids are dense and assigned in raster order of each component's first pixel.
pub fn connected_components(mask: &BinaryMask, conn: Connectivity) -> LabelMap {
    let (w, h) = mask.dims();
    let bits = mask.bits();
    let mut provisional = vec![0u32; w * h];
    let mut parent: Vec<u32> = vec![0];
    // Already-visited neighbors in raster order.
    let back: &[(isize, isize)] = match conn {
        Connectivity::Four => &[(-1, 0), (0, -1)],
        Connectivity::Eight => &[(-1, 0), (-1, -1), (0, -1), (1, -1)],
    };
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !bits[i] {
                continue;
            }
            let mut label = 0u32;
            for &(dx, dy) in back {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx as usize >= w {
                    continue;
                }
                let n = provisional[ny as usize * w + nx as usize];
                if n != 0 {
                    label = if label == 0 { find(&mut parent, n) } else { union(&mut parent, label, n) };
                }
            }
            if label == 0 {
                label = parent.len() as u32;
                parent.push(label);
            }
            provisional[i] = label;
        }
    }
    let mut dense = vec![0u32; parent.len()];
    let mut next = 0u32;
    let ids = provisional
        .iter()
        .map(|&p| {
            if p == 0 {
                return 0;
            }
            let root = find(&mut parent, p) as usize;
            if dense[root] == 0 {
                next += 1;
                dense[root] = next;
            }
            dense[root]
        })
        .collect();
    LabelMap::with_count(w, h, ids, next).expect("labels are bounded by the component count")
}

/// Removes components with fewer than `min_area` pixels; the rest are kept exactly.
pub fn area_opening(mask: &BinaryMask, min_area: usize, conn: Connectivity) -> BinaryMask {
    if min_area <= 1 {
        return mask.clone();
    }
    let labels = connected_components(mask, conn);
    let areas = labels.areas();
    let bits = labels
        .ids()
        .iter()
        .map(|&id| id != 0 && areas[id as usize] >= min_area)
        .collect();
    BinaryMask::new(mask.width(), mask.height(), bits).expect("same dimensions")
}

/// Erosion by a 3x3 square. Pixels outside the raster do not erode.
pub fn erode_square(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w, h, |x, y| {
        if !mask.get(x, y) {
            return false;
        }
        let (x0, x1) = (x.saturating_sub(1), (x + 1).min(w - 1));
        let (y0, y1) = (y.saturating_sub(1), (y + 1).min(h - 1));
        (y0..=y1).all(|yy| (x0..=x1).all(|xx| mask.get(xx, yy)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        BinaryMask::new(
            w,
            h,
            rows.iter().flat_map(|r| r.bytes().map(|b| b == b'#')).collect(),
        )
        .unwrap()
    }

    #[test]
    fn diagonal_connectivity() {
        let m = mask(&["#.", ".#"]);
        assert_eq!(connected_components(&m, Connectivity::Four).count(), 2);
        assert_eq!(connected_components(&m, Connectivity::Eight).count(), 1);
    }

    #[test]
    fn raster_discovery_order() {
        let m = mask(&["..#", "#..", "#.#"]);
        let l = connected_components(&m, Connectivity::Four);
        assert_eq!(l.ids(), &[0, 0, 1, 2, 0, 0, 2, 0, 3]);
    }

    #[test]
    fn u_shape_merges() {
        let m = mask(&["#.#", "#.#", "###"]);
        let l = connected_components(&m, Connectivity::Four);
        assert_eq!(l.count(), 1);
        assert!(l.is_dense());
    }

    #[test]
    fn area_opening_rule() {
        let mut rows = vec!["###...............".to_string()];
        for _ in 0..30 {
            rows.push("....##############".into());
        }
        // 3-px component plus a 30x14 = 420-px block.
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        let m = mask(&refs);
        let opened = area_opening(&m, 400, Connectivity::Eight);
        assert_eq!(opened.count_ones(), 420);
        assert!(!opened.get(0, 0));
        assert_eq!(area_opening(&m, 0, Connectivity::Four), m);
        assert_eq!(area_opening(&m, 1, Connectivity::Four), m);
    }

    #[test]
    fn erosion_shrinks_interior_only() {
        let m = mask(&[".....", ".###.", ".###.", ".###.", "....."]);
        let e = erode_square(&m);
        assert_eq!(e.count_ones(), 1);
        assert!(e.get(2, 2));
        let full = mask(&["###", "###"]);
        assert_eq!(erode_square(&full), full);
    }
}
