//! Probability maps to masks, plus a classical baseline segmenter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{clahe, ClaheParams};
use crate::raster::{BinaryMask, GrayImage, ScalarMap};

/// Default particle threshold on probability maps.
pub const DEFAULT_THRESHOLD: f64 = 0.51;

/// Largest logit magnitude for which `1 / (1 + e^-x)` stays strictly inside (0, 1).
const LOGIT_CLAMP: f64 = 36.0;

/// Pixel-wise logistic activation.
///
/// With `allow_unbounded` unset, logits are clamped to +/-36 so the result
/// stays strictly inside (0, 1); otherwise large logits saturate to exactly 0 or 1.
pub fn sigmoid_map(logits: &ScalarMap, allow_unbounded: bool) -> Result<GrayImage> {
    if logits.values().iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("logit raster contains NaN".into()));
    }
    let samples = logits
        .values()
        .iter()
        .map(|&x| {
            let x = if allow_unbounded {
                x
            } else {
                x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)
            };
            1.0 / (1.0 + (-x).exp())
        })
        .collect();
    GrayImage::new(logits.width(), logits.height(), samples)
}

/// A pixel is particle iff its probability is strictly greater than `t`.
pub fn threshold_probability(prob: &GrayImage, t: f64) -> Result<BinaryMask> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("threshold must lie in [0, 1), got {t}")));
    }
    let bits = prob.samples().iter().map(|&p| p > t).collect();
    BinaryMask::new(prob.width(), prob.height(), bits)
}

#[inline]
fn bin_of(s: f64, bins: usize) -> usize {
    ((s * bins as f64) as usize).min(bins - 1)
}

/// Otsu's threshold over a `bins`-bin histogram.
///
/// Returns the boundary `k / bins` of the best split; pixels with
/// `sample >= threshold` form the upper class. Ties go to the lower boundary.
pub fn otsu_threshold(img: &GrayImage, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::InvalidParameter("otsu needs at least 2 bins".into()));
    }
    let mut hist = vec![0u64; bins];
    for &s in img.samples() {
        hist[bin_of(s, bins)] += 1;
    }
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::DegenerateHistogram);
    }
    let total = img.samples().len() as f64;
    let center = |b: usize| (b as f64 + 0.5) / bins as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(b, &c)| c as f64 * center(b)).sum();

    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best = (f64::NEG_INFINITY, 1usize);
    for k in 1..bins {
        w0 += hist[k - 1] as f64;
        sum0 += hist[k - 1] as f64 * center(k - 1);
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let diff = sum0 / w0 - (sum_all - sum0) / w1;
        let between = w0 * w1 * diff * diff;
        // Within rounding of the best so far counts as a tie; the lower k wins.
        if between > best.0 * (1.0 + 1e-12) {
            best = (between, k);
        }
    }
    Ok(best.1 as f64 / bins as f64)
}

/// Separable box blur; windows are truncated at the image border.
pub fn box_blur(img: &GrayImage, radius: usize, passes: usize) -> GrayImage {
    if radius == 0 || passes == 0 {
        return img.clone();
    }
    let (w, h) = img.dims();
    let mut cur = img.samples().to_vec();
    let mut tmp = vec![0.0; w * h];
    let blur_line = |src: &[f64], dst: &mut [f64], n: usize, stride: usize, start: usize| {
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        for i in 0..n {
            prefix.push(prefix[i] + src[start + i * stride]);
        }
        for i in 0..n {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(n);
            dst[start + i * stride] = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
        }
    };
    for _ in 0..passes {
        for y in 0..h {
            blur_line(&cur, &mut tmp, w, 1, y * w);
        }
        for x in 0..w {
            blur_line(&tmp, &mut cur, h, w, x);
        }
    }
    GrayImage::from_clamped(w, h, cur).expect("dimensions unchanged")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineParams {
    pub clahe: ClaheParams,
    pub smoothing_radius: usize,
    pub passes: usize,
    /// Treat dark regions as particles.
    pub invert: bool,
    pub bins: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            clahe: ClaheParams::default(),
            smoothing_radius: 3,
            passes: 2,
            invert: false,
            bins: 256,
        }
    }
}

/// CLAHE, box blur, Otsu. The result is a {0, 1} probability map.
pub fn baseline_segment(img: &GrayImage, params: &BaselineParams) -> Result<GrayImage> {
    let equalized = clahe(img, &params.clahe)?;
    let smooth = box_blur(&equalized, params.smoothing_radius, params.passes);
    let t = otsu_threshold(&smooth, params.bins)?;
    Ok(smooth.map(|s| {
        let upper = bin_of(s, params.bins) as f64 >= t * params.bins as f64;
        if upper != params.invert {
            1.0
        } else {
            0.0
        }
    }))
}
