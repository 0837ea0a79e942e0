use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::GrayImage;
use crate::rng::Rng;

const GRID: usize = 8;
const INTENSITY_BINS: usize = 32;
const GRADIENT_BINS: usize = 32;

/// Layout: 64 block means (row-major 8x8), 32 intensity bins, 32 gradient bins.
pub const FEATURE_LEN: usize = GRID * GRID + INTENSITY_BINS + GRADIENT_BINS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchMode {
    /// Non-overlapping tiles with stride = size; partial tiles are dropped.
    Sequential,
    /// `count` patches at uniform random positions.
    Random { count: usize },
}

pub fn extract_patches(img: &GrayImage, size: usize, mode: PatchMode, rng: &mut Rng) -> Result<Vec<GrayImage>> {
    let (w, h) = img.dims();
    if size == 0 || size > w || size > h {
        return Err(Error::PatchTooLarge {
            width: w,
            height: h,
            size,
        });
    }
    match mode {
        PatchMode::Sequential => {
            let mut out = Vec::with_capacity((w / size) * (h / size));
            for ty in 0..h / size {
                for tx in 0..w / size {
                    out.push(img.crop(tx * size, ty * size, size, size)?);
                }
            }
            Ok(out)
        }
        PatchMode::Random { count } => (0..count)
            .map(|_| {
                let x = ((rng.unit() * (w - size + 1) as f64) as usize).min(w - size);
                let y = ((rng.unit() * (h - size + 1) as f64) as usize).min(h - size);
                img.crop(x, y, size, size)
            })
            .collect(),
    }
}

/// Hand-crafted 128-value descriptor of a patch.
///
/// Histograms are normalized to unit mass. Gradients use central
/// differences (one-sided at the border) and are binned over `[0, sqrt(2)/2]`.
pub fn patch_features(patch: &GrayImage) -> Result<Vec<f64>> {
    let (w, h) = patch.dims();
    if w < GRID || h < GRID {
        return Err(Error::InvalidParameter(format!(
            "patch {w}x{h} is smaller than the {GRID}x{GRID} block grid"
        )));
    }
    let mut out = Vec::with_capacity(FEATURE_LEN);
    for by in 0..GRID {
        let (y0, y1) = (by * h / GRID, (by + 1) * h / GRID);
        for bx in 0..GRID {
            let (x0, x1) = (bx * w / GRID, (bx + 1) * w / GRID);
            let mut sum = 0.0;
            for y in y0..y1 {
                for x in x0..x1 {
                    sum += patch.get(x, y);
                }
            }
            out.push(sum / ((x1 - x0) * (y1 - y0)) as f64);
        }
    }

    let n = (w * h) as f64;
    let mut intensity = [0.0; INTENSITY_BINS];
    for &s in patch.samples() {
        intensity[((s * INTENSITY_BINS as f64) as usize).min(INTENSITY_BINS - 1)] += 1.0 / n;
    }
    out.extend_from_slice(&intensity);

    let max_grad = std::f64::consts::FRAC_1_SQRT_2;
    let mut gradient = [0.0; GRADIENT_BINS];
    for y in 0..h {
        for x in 0..w {
            let gx = (patch.get((x + 1).min(w - 1), y) - patch.get(x.saturating_sub(1), y)) / 2.0;
            let gy = (patch.get(x, (y + 1).min(h - 1)) - patch.get(x, y.saturating_sub(1))) / 2.0;
            let m = (gx * gx + gy * gy).sqrt();
            let b = ((m / max_grad * GRADIENT_BINS as f64) as usize).min(GRADIENT_BINS - 1);
            gradient[b] += 1.0 / n;
        }
    }
    out.extend_from_slice(&gradient);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texture(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| 0.3 + 0.4 * (((x * 5 + y * 11) % 13) as f64 / 12.0))
    }

    #[test]
    fn sequential_tiling_counts() {
        let img = GrayImage::filled(2048, 2048, 0.5);
        let patches = extract_patches(&img, 144, PatchMode::Sequential, &mut Rng::new(0)).unwrap();
        assert_eq!(patches.len(), 196);
        assert!(patches.iter().all(|p| p.dims() == (144, 144)));
    }

    #[test]
    fn random_patches_deterministic() {
        let img = texture(300, 200);
        let a = extract_patches(&img, 144, PatchMode::Random { count: 7 }, &mut Rng::new(5)).unwrap();
        let b = extract_patches(&img, 144, PatchMode::Random { count: 7 }, &mut Rng::new(5)).unwrap();
        assert_eq!(a.len(), 7);
        assert_eq!(a, b);
        assert!(extract_patches(&img, 201, PatchMode::Sequential, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn constant_patch_features() {
        let f = patch_features(&GrayImage::filled(144, 144, 0.25)).unwrap();
        assert_eq!(f.len(), FEATURE_LEN);
        assert!(f[..64].iter().all(|&v| (v - 0.25).abs() < 1e-12));
        assert!((f[64 + 8] - 1.0).abs() < 1e-12);
        assert!((f[96] - 1.0).abs() < 1e-12);
        assert!(f[97..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shift_changes_only_intensity_parts() {
        let a = texture(48, 48);
        let b = a.map(|s| s + 0.2);
        let (fa, fb) = (patch_features(&a).unwrap(), patch_features(&b).unwrap());
        assert_ne!(fa[..64], fb[..64]);
        assert_ne!(fa[64..96], fb[64..96]);
        for (x, y) in fa[96..].iter().zip(&fb[96..]) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
