//! Evaluation: pixel metrics, per-particle statistics, dataset similarity.

mod embed;
mod features;
mod gallery;

use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, LabelMap, PixelScale};

pub use embed::{
    joint_probabilities, conditional_affinities, pca, tsne, Pca, TsneParams, TsneResult,
};
pub use features::{extract_patches, patch_features, PatchMode, FEATURE_LEN};
pub use gallery::{emit_gallery, overlay_rgb, palette_color, GalleryEntry, PALETTE};

/// F1 at or above this value counts as a good segmentation.
pub const GOOD_F1: f64 = 0.7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

/// Pixel metrics; `None` marks a metric whose denominator is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub counts: ConfusionCounts,
}

impl MetricsReport {
    pub fn is_good(&self) -> bool {
        self.f1.is_some_and(|f| f >= GOOD_F1)
    }
}

pub fn confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    if pred.dims() != gt.dims() {
        let (a, b) = (pred.dims(), gt.dims());
        return Err(Error::DimensionMismatch(a.0, a.1, b.0, b.1));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(c: &ConfusionCounts) -> MetricsReport {
    MetricsReport {
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision: ratio(c.tp, c.tp + c.fp),
        recall: ratio(c.tp, c.tp + c.fn_),
        f1: ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
        counts: *c,
    }
}

/// Inclusive pixel bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub id: u32,
    pub area_px: usize,
    pub sqrt_area_nm: f64,
    pub centroid: [f64; 2],
    pub bbox: BoundingBox,
}

/// One record per id that owns at least one pixel, in id order.
pub fn component_stats(labels: &LabelMap, scale: PixelScale) -> Vec<ComponentStats> {
    struct Acc {
        area: usize,
        sx: f64,
        sy: f64,
        bbox: BoundingBox,
    }
    let mut acc: Vec<Option<Acc>> = (0..=labels.count()).map(|_| None).collect();
    let w = labels.width();
    for (i, &id) in labels.ids().iter().enumerate() {
        if id == 0 {
            continue;
        }
        let (x, y) = (i % w, i / w);
        let a = acc[id as usize].get_or_insert(Acc {
            area: 0,
            sx: 0.0,
            sy: 0.0,
            bbox: BoundingBox {
                x_min: x,
                y_min: y,
                x_max: x,
                y_max: y,
            },
        });
        a.area += 1;
        a.sx += x as f64;
        a.sy += y as f64;
        a.bbox.x_min = a.bbox.x_min.min(x);
        a.bbox.x_max = a.bbox.x_max.max(x);
        a.bbox.y_max = y;
    }
    acc.into_iter()
        .enumerate()
        .filter_map(|(id, a)| {
            a.map(|a| ComponentStats {
                id: id as u32,
                area_px: a.area,
                sqrt_area_nm: (a.area as f64).sqrt() * scale.nm_per_px(),
                centroid: [a.sx / a.area as f64, a.sy / a.area as f64],
                bbox: a.bbox,
            })
        })
        .collect()
}

/// Histogram over `[k * bin_width, (k + 1) * bin_width)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeHistogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl SizeHistogram {
    pub fn from_values(values: &[f64], bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            return Err(Error::InvalidParameter(format!("bin width must be > 0, got {bin_width}")));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("histogram values must be finite and >= 0".into()));
        }
        let mut counts = Vec::new();
        for &v in values {
            let k = (v / bin_width).floor() as usize;
            if counts.len() <= k {
                counts.resize(k + 1, 0);
            }
            counts[k] += 1;
        }
        Ok(Self {
            bin_width,
            counts,
            total: values.len() as u64,
        })
    }

    /// Lower edge of bin `k`.
    pub fn bin_start(&self, k: usize) -> f64 {
        k as f64 * self.bin_width
    }

    /// Index of the bin containing `value`.
    pub fn bin_of(&self, value: f64) -> usize {
        (value / self.bin_width).floor() as usize
    }

    /// Local maxima as `(bin, count)`, highest first.
    ///
    /// A plateau counts once, at its middle bin, when both neighbouring
    /// runs are lower. Empty bins are never peaks.
    pub fn peaks(&self) -> Vec<(usize, u64)> {
        let c = &self.counts;
        let mut out = Vec::new();
        let mut a = 0;
        while a < c.len() {
            let mut b = a;
            while b + 1 < c.len() && c[b + 1] == c[a] {
                b += 1;
            }
            let left_lower = a == 0 || c[a - 1] < c[a];
            let right_lower = b + 1 == c.len() || c[b + 1] < c[a];
            if c[a] > 0 && left_lower && right_lower {
                out.push(((a + b) / 2, c[a]));
            }
            a = b + 1;
        }
        out.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        out
    }
}

pub fn size_histogram(stats: &[ComponentStats], bin_width: f64) -> Result<SizeHistogram> {
    let values: Vec<f64> = stats.iter().map(|s| s.sqrt_area_nm).collect();
    SizeHistogram::from_values(&values, bin_width)
}
