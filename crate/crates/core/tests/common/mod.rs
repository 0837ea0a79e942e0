#![allow(dead_code)]

use std::collections::VecDeque;

use himforge::postprocess::Connectivity;
use himforge::scene::{Camera, DirtSpec, Instance, Light, ParticleTemplate, Rect, SceneSpec, Shader, Shape, Substrate};
use himforge::texture::DirtParams;
use himforge::{BinaryMask, Rng};

pub fn random_mask(rng: &mut Rng, w: usize, h: usize, density: f64) -> BinaryMask {
    let bits = (0..w * h).map(|_| rng.unit() < density).collect();
    BinaryMask::new(w, h, bits).unwrap()
}

fn offsets(conn: Connectivity) -> Vec<(isize, isize)> {
    let mut out = Vec::new();
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            let diagonal = dx != 0 && dy != 0;
            if (dx, dy) != (0, 0) && (conn == Connectivity::Eight || !diagonal) {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Breadth-first flood fill; ids in raster order of each component's first pixel.
pub fn flood_fill(mask: &BinaryMask, conn: Connectivity) -> (Vec<u32>, u32) {
    let (w, h) = mask.dims();
    let mut ids = vec![0u32; w * h];
    let mut next = 0;
    for start in 0..w * h {
        if !mask.bits()[start] || ids[start] != 0 {
            continue;
        }
        next += 1;
        ids[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            let (x, y) = ((p % w) as isize, (p / w) as isize);
            for &(dx, dy) in &offsets(conn) {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let q = ny as usize * w + nx as usize;
                if mask.bits()[q] && ids[q] == 0 {
                    ids[q] = next;
                    queue.push_back(q);
                }
            }
        }
    }
    (ids, next)
}

/// Exhaustive nearest-background distance; the image border is not background.
pub fn brute_edt(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = mask.dims();
    let background: Vec<(i64, i64)> = (0..w * h)
        .filter(|&i| !mask.bits()[i])
        .map(|i| ((i % w) as i64, (i / w) as i64))
        .collect();
    (0..w * h)
        .map(|i| {
            if !mask.bits()[i] {
                return 0.0;
            }
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            let best = background
                .iter()
                .map(|&(bx, by)| (bx - x).pow(2) + (by - y).pow(2))
                .min()
                .expect("mask has background");
            (best as f64).sqrt()
        })
        .collect()
}

pub fn disc_pair(w: usize, h: usize, c1: (f64, f64), c2: (f64, f64), r: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| {
        let (x, y) = (x as f64, y as f64);
        (x - c1.0).powi(2) + (y - c1.1).powi(2) <= r * r || (x - c2.0).powi(2) + (y - c2.1).powi(2) <= r * r
    })
}

/// Unit-sphere scene on a square substrate viewed one pixel per unit.
pub fn sphere_scene(side: usize, spheres: &[(f64, f64, f64)]) -> SceneSpec {
    SceneSpec {
        substrate: Substrate {
            extent: side as f64,
            albedo: 0.2,
        },
        templates: vec![ParticleTemplate::new(
            "unit",
            Shape::Sphere { radius: 1.0 },
            Shader::Diffuse { albedo: 0.85 },
        )],
        instances: spheres
            .iter()
            .map(|&(x, y, r)| Instance {
                template: "unit".into(),
                center: [x, y, r],
                scale: r,
                rotation: 0.0,
            })
            .collect(),
        light: Light {
            direction: [0.0, 0.0, 1.0],
            brightness: 1.0,
        },
        camera: Camera {
            crop: Rect::square(0.0, 0.0, side as f64),
            resolution: side,
        },
        dirt: DirtSpec {
            enabled: false,
            params: DirtParams::default(),
        },
        seed: 0,
        lineage: vec![],
    }
}
