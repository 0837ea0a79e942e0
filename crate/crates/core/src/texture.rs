//! Diamond-square (random midpoint displacement) height fields and the
//! substrate dirt overlay derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::GrayImage;
use crate::rng::Rng;

/// Square height field with side `2^n + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightField {
    side: usize,
    values: Vec<f64>,
}

impl HeightField {
    pub fn new(side: usize, values: Vec<f64>) -> Result<Self> {
        if side < 2 || !(side - 1).is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "height field side must be 2^n + 1, got {side}"
            )));
        }
        if values.len() != side * side {
            return Err(Error::InvalidRaster(format!(
                "{} values for side {side}",
                values.len()
            )));
        }
        Ok(Self { side, values })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.side + x]
    }
}

/// Corner values of the initial square, row 0 at the top.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corners {
    pub top_left: f64,
    pub top_right: f64,
    pub bottom_left: f64,
    pub bottom_right: f64,
}

impl Corners {
    pub fn uniform(v: f64) -> Self {
        Self {
            top_left: v,
            top_right: v,
            bottom_left: v,
            bottom_right: v,
        }
    }
}

/// Generates a `(2^level + 1)^2` field.
///
/// The diamond step sets each square's center to the mean of its four corners;
/// the square step sets each edge midpoint to the mean of its orthogonal
/// neighbors at the current half-step (three on the border, no wrap-around).
/// Both add a uniform displacement in `[-a, a)`, where `a` starts at
/// `roughness` and is multiplied by `decay` after every level.
pub fn diamond_square(
    level: u32,
    corners: Corners,
    roughness: f64,
    decay: f64,
    rng: &mut Rng,
) -> Result<HeightField> {
    if level > 14 {
        return Err(Error::InvalidParameter(format!(
            "diamond-square level {level} is too large"
        )));
    }
    if roughness < 0.0 || !roughness.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "roughness must be >= 0, got {roughness}"
        )));
    }
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "decay must lie in (0, 1], got {decay}"
        )));
    }
    let side = (1usize << level) + 1;
    let mut v = vec![0.0; side * side];
    let idx = |x: usize, y: usize| y * side + x;
    let last = side - 1;
    v[idx(0, 0)] = corners.top_left;
    v[idx(last, 0)] = corners.top_right;
    v[idx(0, last)] = corners.bottom_left;
    v[idx(last, last)] = corners.bottom_right;

    let mut step = last;
    let mut amplitude = roughness;
    while step > 1 {
        let half = step / 2;
        // Diamond step: square centers.
        for y in (half..side).step_by(step) {
            for x in (half..side).step_by(step) {
                let mean = (v[idx(x - half, y - half)]
                    + v[idx(x + half, y - half)]
                    + v[idx(x - half, y + half)]
                    + v[idx(x + half, y + half)])
                    / 4.0;
                v[idx(x, y)] = mean + rng.symmetric(amplitude);
            }
        }
        // Square step: edge midpoints, rows alternate their x offset.
        for y in (0..side).step_by(half) {
            let x_start = if (y / half).is_multiple_of(2) { half } else { 0 };
            for x in (x_start..side).step_by(step) {
                let mut sum = 0.0;
                let mut n = 0.0;
                if x >= half {
                    sum += v[idx(x - half, y)];
                    n += 1.0;
                }
                if x + half < side {
                    sum += v[idx(x + half, y)];
                    n += 1.0;
                }
                if y >= half {
                    sum += v[idx(x, y - half)];
                    n += 1.0;
                }
                if y + half < side {
                    sum += v[idx(x, y + half)];
                    n += 1.0;
                }
                v[idx(x, y)] = sum / n + rng.symmetric(amplitude);
            }
        }
        amplitude *= decay;
        step = half;
    }
    HeightField::new(side, v)
}

/// Dirt texture parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DirtParams {
    pub level: u32,
    pub roughness: f64,
    pub decay: f64,
    pub threshold: f64,
    pub gain: f64,
}

impl Default for DirtParams {
    fn default() -> Self {
        Self {
            level: 8,
            roughness: 1.0,
            decay: 0.5,
            threshold: 0.55,
            gain: 0.6,
        }
    }
}

/// Min-max normalizes the field and keeps what rises above `threshold`:
/// `gain * max(0, normalized - threshold)`, clamped to `[0, 1]`.
///
/// A constant field normalizes to all zeros.
pub fn dirt_overlay(field: &HeightField, threshold: f64, gain: f64) -> Result<GrayImage> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "dirt threshold must lie in [0, 1], got {threshold}"
        )));
    }
    if gain < 0.0 || !gain.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "dirt gain must be >= 0, got {gain}"
        )));
    }
    let (lo, hi) = field
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
    let range = hi - lo;
    let samples = field
        .values
        .iter()
        .map(|&h| {
            let normalized = if range > 0.0 { (h - lo) / range } else { 0.0 };
            gain * (normalized - threshold).max(0.0)
        })
        .collect();
    GrayImage::from_clamped(field.side, field.side, samples)
}

/// Generates a dirt overlay from its parameters.
pub fn dirt_texture(params: &DirtParams, rng: &mut Rng) -> Result<GrayImage> {
    let field = diamond_square(
        params.level,
        Corners::uniform(0.0),
        params.roughness,
        params.decay,
        rng,
    )?;
    dirt_overlay(&field, params.threshold, params.gain)
}
