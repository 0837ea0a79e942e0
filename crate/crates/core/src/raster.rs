//! Raster value types shared by every stage.
//!
//! All rasters are row-major, owned, and compared pixel-wise. [`GrayImage`]
//! samples always lie in `[0, 1]`; the constructors reject or clamp values so
//! the invariant cannot be broken from outside this module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidRaster(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidRaster(format!(
            "{len} samples do not match {width}x{height}"
        )));
    }
    Ok(())
}

/// Grayscale raster with samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl GrayImage {
    /// Builds an image, rejecting samples outside `[0, 1]` (including NaN).
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        check_dims(width, height, samples.len())?;
        if let Some((i, s)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !(0.0..=1.0).contains(*s))
        {
            return Err(Error::InvalidRaster(format!(
                "sample {i} = {s} is outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    /// Builds an image, clamping every sample into `[0, 1]`. NaN is rejected.
    pub fn from_clamped(width: usize, height: usize, mut samples: Vec<f64>) -> Result<Self> {
        check_dims(width, height, samples.len())?;
        for s in samples.iter_mut() {
            if s.is_nan() {
                return Err(Error::InvalidRaster("NaN sample".into()));
            }
            *s = s.clamp(0.0, 1.0);
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            samples: vec![value.clamp(0.0, 1.0); width * height],
        }
    }

    /// Evaluates `f(x, y)` for every pixel and clamps the result.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                samples.push(if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) });
            }
        }
        Self {
            width,
            height,
            samples,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    /// Applies `f` to every sample and clamps.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|&s| {
                let v = f(s);
                if v.is_nan() {
                    0.0
                } else {
                    v.clamp(0.0, 1.0)
                }
            })
            .collect();
        Self {
            width: self.width,
            height: self.height,
            samples,
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
                (lo.min(s), hi.max(s))
            })
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Copies the `size_w` x `size_h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, size_w: usize, size_h: usize) -> Result<Self> {
        if x0 + size_w > self.width || y0 + size_h > self.height {
            return Err(Error::InvalidRaster(format!(
                "crop {size_w}x{size_h}+{x0}+{y0} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut samples = Vec::with_capacity(size_w * size_h);
        for y in y0..y0 + size_h {
            let row = y * self.width;
            samples.extend_from_slice(&self.samples[row + x0..row + x0 + size_w]);
        }
        Ok(Self {
            width: size_w,
            height: size_h,
            samples,
        })
    }
}

/// Row-major boolean raster; `true` marks particle pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// The mask as a `{0, 1}` image.
    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            samples: self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// Integer identifier raster; 0 is background.
///
/// Rasters produced by connected-component labeling are dense (ids are
/// exactly `1..=count`). The renderer's instance-id raster reuses this type
/// with `count` equal to the number of scene instances, so ids of instances
/// that are hidden or outside the camera window may be absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    ids: Vec<u32>,
    count: u32,
}

impl LabelMap {
    /// Wraps raw ids; `count` becomes the largest id present.
    pub fn from_ids(width: usize, height: usize, ids: Vec<u32>) -> Result<Self> {
        check_dims(width, height, ids.len())?;
        let count = ids.iter().copied().max().unwrap_or(0);
        Ok(Self {
            width,
            height,
            ids,
            count,
        })
    }

    /// Wraps raw ids with an explicit count; every id must be `<= count`.
    pub fn with_count(width: usize, height: usize, ids: Vec<u32>, count: u32) -> Result<Self> {
        check_dims(width, height, ids.len())?;
        if let Some(&id) = ids.iter().find(|&&id| id > count) {
            return Err(Error::InvalidRaster(format!(
                "id {id} exceeds declared count {count}"
            )));
        }
        Ok(Self {
            width,
            height,
            ids,
            count,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.ids[y * self.width + x]
    }

    /// Nonzero pixels as a mask.
    pub fn support(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.ids.iter().map(|&id| id != 0).collect(),
        }
    }

    /// Pixel count per id, indexed by id (entry 0 is the background).
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.count as usize + 1];
        for &id in &self.ids {
            areas[id as usize] += 1;
        }
        areas
    }

    /// True when the ids in use are exactly `1..=count`.
    pub fn is_dense(&self) -> bool {
        self.areas().iter().skip(1).all(|&a| a > 0)
    }
}

/// Unbounded scalar raster (logits, relief maps).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Physical pixel edge length in nanometers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PixelScale(f64);

impl PixelScale {
    pub fn new(nm_per_px: f64) -> Result<Self> {
        if nm_per_px.is_finite() && nm_per_px > 0.0 {
            Ok(Self(nm_per_px))
        } else {
            Err(Error::InvalidParameter(format!(
                "pixel scale must be positive, got {nm_per_px}"
            )))
        }
    }

    /// From a linear resolution in pixels per nanometer.
    pub fn from_px_per_nm(px_per_nm: f64) -> Result<Self> {
        Self::new(1.0 / px_per_nm)
    }

    pub fn nm_per_px(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PixelScale {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PixelScale> for f64 {
    fn from(s: PixelScale) -> f64 {
        s.0
    }
}
