//! Instrument-realism degradation and training-time pre-processing.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage, LabelMap};
use crate::rng::Rng;

/// Source coordinate for `dst` under align-corners sampling.
#[inline]
fn align_corners(dst: usize, src_len: usize, dst_len: usize) -> f64 {
    if dst_len <= 1 || src_len <= 1 {
        0.0
    } else {
        dst as f64 * (src_len - 1) as f64 / (dst_len - 1) as f64
    }
}

fn bilinear_at(img: &GrayImage, fx: f64, fy: f64) -> f64 {
    let (w, h) = img.dims();
    let x0 = (fx.floor() as usize).min(w - 1);
    let y0 = (fy.floor() as usize).min(h - 1);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
    let top = img.get(x0, y0) + (img.get(x1, y0) - img.get(x0, y0)) * tx;
    let bottom = img.get(x0, y1) + (img.get(x1, y1) - img.get(x0, y1)) * tx;
    top + (bottom - top) * ty
}

/// Bilinear resize with align-corners semantics.
pub fn resize_bilinear(img: &GrayImage, new_width: usize, new_height: usize) -> Result<GrayImage> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::InvalidParameter("resize target must be at least 1x1".into()));
    }
    if img.dims() == (new_width, new_height) {
        return Ok(img.clone());
    }
    let (w, h) = img.dims();
    let xs: Vec<f64> = (0..new_width).map(|x| align_corners(x, w, new_width)).collect();
    let ys: Vec<f64> = (0..new_height).map(|y| align_corners(y, h, new_height)).collect();
    let mut out = Vec::with_capacity(new_width * new_height);
    for &fy in &ys {
        for &fx in &xs {
            out.push(bilinear_at(img, fx, fy));
        }
    }
    GrayImage::from_clamped(new_width, new_height, out)
}

/// Nearest-neighbor mask resize on the align-corners grid.
fn nearest_indices(old: usize, new: usize) -> Vec<usize> {
    (0..new).map(|i| (align_corners(i, old, new).round() as usize).min(old - 1)).collect()
}

pub fn resize_mask_nearest(mask: &BinaryMask, new_width: usize, new_height: usize) -> Result<BinaryMask> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::InvalidParameter("resize target must be at least 1x1".into()));
    }
    let (w, h) = mask.dims();
    let xs = nearest_indices(w, new_width);
    let ys = nearest_indices(h, new_height);
    Ok(BinaryMask::from_fn(new_width, new_height, |x, y| mask.get(xs[x], ys[y])))
}

/// Nearest-neighbour resize of an id map, sampling the same source pixels as [`resize_mask_nearest`].
pub fn resize_labels_nearest(labels: &LabelMap, new_width: usize, new_height: usize) -> Result<LabelMap> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::InvalidParameter("resize target must be at least 1x1".into()));
    }
    let (w, _) = labels.dims();
    let xs = nearest_indices(w, new_width);
    let ys = nearest_indices(labels.height(), new_height);
    let ids = ys.iter().flat_map(|&y| xs.iter().map(move |&x| labels.ids()[y * w + x])).collect();
    LabelMap::with_count(new_width, new_height, ids, labels.count())
}

/// Adds independent `N(0, sigma^2)` noise per pixel, then clamps.
pub fn add_gaussian_noise(img: &GrayImage, sigma: f64, rng: &mut Rng) -> Result<GrayImage> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let samples = img.samples().iter().map(|&s| s + normal.sample(rng)).collect();
    GrayImage::from_clamped(img.width(), img.height(), samples)
}

/// Min-max normalization to `[0, 1]`; a constant image maps to zeros.
pub fn normalize(img: &GrayImage) -> GrayImage {
    let (lo, hi) = img.min_max();
    let range = hi - lo;
    img.map(|s| if range > 0.0 { (s - lo) / range } else { 0.0 })
}

/// Upsamples to `target` x `target` and adds Gaussian noise.
pub fn degrade(img: &GrayImage, target: usize, sigma: f64, rng: &mut Rng) -> Result<GrayImage> {
    let resized = resize_bilinear(img, target, target)?;
    add_gaussian_noise(&resized, sigma, rng)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClaheParams {
    pub tiles_x: usize,
    pub tiles_y: usize,
    pub clip_limit: f64,
    pub bins: usize,
}

impl Default for ClaheParams {
    fn default() -> Self {
        Self {
            tiles_x: 8,
            tiles_y: 8,
            clip_limit: 2.0,
            bins: 256,
        }
    }
}

/// Per-tile intensity mapping.
#[derive(Clone, Debug, PartialEq)]
pub enum TileMapping {
    /// Tile with a single occupied bin: samples pass through unchanged.
    Identity,
    /// Normalized cumulative histogram, indexed by bin.
    Table(Vec<f64>),
}

impl TileMapping {
    #[inline]
    fn apply(&self, s: f64, bin: usize) -> f64 {
        match self {
            TileMapping::Identity => s,
            TileMapping::Table(lut) => lut[bin],
        }
    }
}

#[inline]
fn bin_of(s: f64, bins: usize) -> usize {
    ((s * bins as f64) as usize).min(bins - 1)
}

fn tile_range(t: usize, tiles: usize, len: usize) -> (usize, usize) {
    (t * len / tiles, (t + 1) * len / tiles)
}

/// Clipped-histogram cumulative mappings for every tile, row-major by tile.
pub fn clahe_tile_mappings(img: &GrayImage, params: &ClaheParams) -> Result<Vec<TileMapping>> {
    let ClaheParams {
        tiles_x,
        tiles_y,
        clip_limit,
        bins,
    } = *params;
    if tiles_x == 0 || tiles_y == 0 || bins < 2 || !(clip_limit > 1.0) {
        return Err(Error::InvalidParameter(
            "CLAHE needs tiles >= 1, bins >= 2 and clip limit > 1".into(),
        ));
    }
    let (w, h) = img.dims();
    if w < tiles_x || h < tiles_y {
        return Err(Error::InvalidParameter(format!(
            "image {w}x{h} is smaller than the {tiles_x}x{tiles_y} tiling"
        )));
    }
    let mut maps = Vec::with_capacity(tiles_x * tiles_y);
    let mut hist = vec![0.0f64; bins];
    for ty in 0..tiles_y {
        let (y0, y1) = tile_range(ty, tiles_y, h);
        for tx in 0..tiles_x {
            let (x0, x1) = tile_range(tx, tiles_x, w);
            hist.iter_mut().for_each(|v| *v = 0.0);
            for y in y0..y1 {
                for x in x0..x1 {
                    hist[bin_of(img.get(x, y), bins)] += 1.0;
                }
            }
            if hist.iter().filter(|&&c| c > 0.0).count() <= 1 {
                maps.push(TileMapping::Identity);
                continue;
            }
            let n = ((x1 - x0) * (y1 - y0)) as f64;
            let limit = clip_limit * n / bins as f64;
            let excess: f64 = hist.iter().map(|&c| (c - limit).max(0.0)).sum();
            let bonus = excess / bins as f64;
            let mut cdf = 0.0;
            let lut = hist
                .iter()
                .map(|&c| {
                    cdf += c.min(limit) + bonus;
                    (cdf / n).min(1.0)
                })
                .collect();
            maps.push(TileMapping::Table(lut));
        }
    }
    Ok(maps)
}

/// Contrast-limited adaptive histogram equalization.
///
/// Each pixel blends the mappings of the four nearest tile centers
/// bilinearly; beyond the outer tile centers the edge tiles are extended.
pub fn clahe(img: &GrayImage, params: &ClaheParams) -> Result<GrayImage> {
    let maps = clahe_tile_mappings(img, params)?;
    let (w, h) = img.dims();
    let (tiles_x, tiles_y, bins) = (params.tiles_x, params.tiles_y, params.bins);
    let tile_w = w as f64 / tiles_x as f64;
    let tile_h = h as f64 / tiles_y as f64;
    let locate = |p: usize, size: f64, tiles: usize| {
        let g = ((p as f64 + 0.5) / size - 0.5).clamp(0.0, (tiles - 1) as f64);
        let t0 = g.floor() as usize;
        let t1 = (t0 + 1).min(tiles - 1);
        (t0, t1, g - t0 as f64)
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let (ty0, ty1, fy) = locate(y, tile_h, tiles_y);
        for x in 0..w {
            let (tx0, tx1, fx) = locate(x, tile_w, tiles_x);
            let s = img.get(x, y);
            let b = bin_of(s, bins);
            let m = |tx: usize, ty: usize| maps[ty * tiles_x + tx].apply(s, b);
            let top = m(tx0, ty0) * (1.0 - fx) + m(tx1, ty0) * fx;
            let bottom = m(tx0, ty1) * (1.0 - fx) + m(tx1, ty1) * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    GrayImage::from_clamped(w, h, out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    /// Counter-clockwise quarter turns, 0 to 3.
    pub rotation_quarter_turns: u8,
    pub flip_horizontal: bool,
    pub flip_vertical: bool,
    /// Magnification about the image center; values above 1 zoom in.
    pub zoom: f64,
    pub intensity_scale: f64,
    pub intensity_shift: f64,
    pub noise_sigma: f64,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        Self {
            rotation_quarter_turns: 0,
            flip_horizontal: false,
            flip_vertical: false,
            zoom: 1.0,
            intensity_scale: 1.0,
            intensity_shift: 0.0,
            noise_sigma: 0.0,
        }
    }
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rotation_quarter_turns > 3 {
            return Err(Error::InvalidParameter("quarter turns must be 0..=3".into()));
        }
        if !(self.zoom > 0.0) || !self.zoom.is_finite() {
            return Err(Error::InvalidParameter(format!("zoom must be > 0, got {}", self.zoom)));
        }
        if !(self.intensity_scale > 0.0) || !self.intensity_shift.is_finite() {
            return Err(Error::InvalidParameter("intensity scale must be > 0".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter("noise sigma must be >= 0".into()));
        }
        Ok(())
    }

    /// Random augmentation: any rotation and flip, zoom in `[0.9, 1.1]`,
    /// intensity scale in `[0.9, 1.1]`, shift in `[-0.05, 0.05]`, noise sigma in `[0, 0.03]`.
    pub fn sample(rng: &mut Rng) -> Self {
        Self {
            rotation_quarter_turns: (rng.unit() * 4.0) as u8 % 4,
            flip_horizontal: rng.unit() < 0.5,
            flip_vertical: rng.unit() < 0.5,
            zoom: rng.uniform(0.9, 1.1),
            intensity_scale: rng.uniform(0.9, 1.1),
            intensity_shift: rng.uniform(-0.05, 0.05),
            noise_sigma: rng.uniform(0.0, 0.03),
        }
    }
}

/// Index remapping shared by image and mask geometric transforms.
fn rotate_ccw<T: Copy>(data: &[T], w: usize, h: usize) -> (Vec<T>, usize, usize) {
    // Output is h wide and w tall; input (x, y) lands at (y, w - 1 - x).
    let mut out = Vec::with_capacity(w * h);
    for oy in 0..w {
        for ox in 0..h {
            out.push(data[ox * w + (w - 1 - oy)]);
        }
    }
    (out, h, w)
}

fn flip<T: Copy>(data: &[T], w: usize, h: usize, horizontal: bool) -> Vec<T> {
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = if horizontal { (w - 1 - x, y) } else { (x, h - 1 - y) };
            out.push(data[sy * w + sx]);
        }
    }
    out
}

/// Mirror a continuous coordinate into `[0, n - 1]`.
fn reflect(v: f64, n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let period = 2.0 * (n - 1) as f64;
    let m = v.rem_euclid(period);
    if m > (n - 1) as f64 {
        period - m
    } else {
        m
    }
}

fn zoom_source(p: usize, n: usize, zoom: f64) -> f64 {
    let c = (n as f64 - 1.0) / 2.0;
    reflect(c + (p as f64 - c) / zoom, n)
}

/// Applies the geometric part of `spec` to both rasters (bilinear for the
/// image, nearest for the mask) and the photometric part to the image only.
pub fn augment(
    img: &GrayImage,
    mask: &BinaryMask,
    spec: &AugmentSpec,
    rng: &mut Rng,
) -> Result<(GrayImage, BinaryMask)> {
    spec.validate()?;
    if img.dims() != mask.dims() {
        let (a, b) = (img.dims(), mask.dims());
        return Err(Error::DimensionMismatch(a.0, a.1, b.0, b.1));
    }
    let (mut w, mut h) = img.dims();
    let mut pixels = img.samples().to_vec();
    let mut bits = mask.bits().to_vec();
    for _ in 0..spec.rotation_quarter_turns {
        let (p, nw, nh) = rotate_ccw(&pixels, w, h);
        let (b, _, _) = rotate_ccw(&bits, w, h);
        pixels = p;
        bits = b;
        w = nw;
        h = nh;
    }
    if spec.flip_horizontal {
        pixels = flip(&pixels, w, h, true);
        bits = flip(&bits, w, h, true);
    }
    if spec.flip_vertical {
        pixels = flip(&pixels, w, h, false);
        bits = flip(&bits, w, h, false);
    }
    let mut image = GrayImage::new(w, h, pixels)?;
    let mut out_mask = BinaryMask::new(w, h, bits)?;
    if spec.zoom != 1.0 {
        let xs: Vec<f64> = (0..w).map(|x| zoom_source(x, w, spec.zoom)).collect();
        let ys: Vec<f64> = (0..h).map(|y| zoom_source(y, h, spec.zoom)).collect();
        let src = image;
        image = GrayImage::from_fn(w, h, |x, y| bilinear_at(&src, xs[x], ys[y]));
        let src_mask = out_mask;
        out_mask = BinaryMask::from_fn(w, h, |x, y| {
            src_mask.get(
                (xs[x].round() as usize).min(w - 1),
                (ys[y].round() as usize).min(h - 1),
            )
        });
    }
    let image = image.map(|s| s * spec.intensity_scale + spec.intensity_shift);
    let image = add_gaussian_noise(&image, spec.noise_sigma, rng)?;
    Ok((image, out_mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| ((x * 7 + y * 13) % 17) as f64 / 16.0)
    }

    fn blob(w: usize, h: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| (x * 3 + y) % 5 == 0 || x < 2)
    }

    #[test]
    fn resize_identity_and_row() {
        let img = ramp(9, 4);
        assert_eq!(resize_bilinear(&img, 9, 4).unwrap(), img);
        let row = GrayImage::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(resize_bilinear(&row, 3, 1).unwrap().samples(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn resize_preserves_extremes() {
        let img = ramp(507, 507);
        let big = resize_bilinear(&img, 2031, 2031).unwrap();
        assert_eq!(big.dims(), (2031, 2031));
        assert_eq!(big.min_max(), img.min_max());
    }

    #[test]
    fn single_pixel_axes_sample_index_zero() {
        let img = GrayImage::new(3, 1, vec![0.2, 0.4, 0.6]).unwrap();
        let out = resize_bilinear(&img, 1, 2).unwrap();
        assert_eq!(out.samples(), &[0.2, 0.2]);
    }

    #[test]
    fn label_resize_matches_mask_resize() {
        let mask = blob(13, 9);
        let ids: Vec<u32> = mask.bits().iter().enumerate().map(|(i, &b)| if b { 1 + i as u32 % 4 } else { 0 }).collect();
        let labels = LabelMap::from_ids(13, 9, ids).unwrap();
        for (w, h) in [(26, 18), (7, 5), (13, 9)] {
            let resized = resize_labels_nearest(&labels, w, h).unwrap();
            assert_eq!(resized.support(), resize_mask_nearest(&mask, w, h).unwrap());
            assert_eq!(resized.count(), labels.count());
        }
    }

    #[test]
    fn zero_sigma_noise_is_identity() {
        let img = ramp(8, 8);
        assert_eq!(add_gaussian_noise(&img, 0.0, &mut Rng::new(0)).unwrap(), img);
        assert!(add_gaussian_noise(&img, -1.0, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn noise_statistics() {
        let img = GrayImage::filled(512, 512, 0.5);
        let noisy = add_gaussian_noise(&img, 0.05, &mut Rng::new(17)).unwrap();
        let n = noisy.samples().len() as f64;
        let mean = noisy.mean();
        let var = noisy.samples().iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 0.5).abs() <= 0.005, "mean {mean}");
        assert!((var.sqrt() - 0.05).abs() <= 0.005, "std {}", var.sqrt());
    }

    #[test]
    fn heavy_noise_stays_in_range() {
        let noisy = add_gaussian_noise(&ramp(64, 64), 5.0, &mut Rng::new(3)).unwrap();
        assert!(noisy.samples().iter().all(|s| (0.0..=1.0).contains(s)));
    }

    #[test]
    fn degrade_shapes_and_determinism() {
        let img = ramp(50, 50);
        assert_eq!(degrade(&img, 50, 0.0, &mut Rng::new(1)).unwrap(), img);
        let a = degrade(&img, 201, 0.03, &mut Rng::new(2)).unwrap();
        let b = degrade(&img, 201, 0.03, &mut Rng::new(2)).unwrap();
        assert_eq!(a.dims(), (201, 201));
        assert_eq!(a, b);
    }

    #[test]
    fn clahe_constant_image_unchanged() {
        let img = GrayImage::filled(64, 48, 0.37);
        assert_eq!(clahe(&img, &ClaheParams::default()).unwrap(), img);
    }

    #[test]
    fn clahe_two_level_cumulative() {
        let img = GrayImage::from_fn(16, 16, |x, _| if x < 8 { 0.2 } else { 0.8 });
        let params = ClaheParams {
            tiles_x: 1,
            tiles_y: 1,
            clip_limit: 1000.0,
            bins: 256,
        };
        let out = clahe(&img, &params).unwrap();
        for (i, &s) in img.samples().iter().enumerate() {
            let expected = if s < 0.5 { 0.5 } else { 1.0 };
            assert!((out.samples()[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn clahe_mappings_are_monotone_and_bounded() {
        let img = ramp(100, 80);
        let maps = clahe_tile_mappings(&img, &ClaheParams::default()).unwrap();
        assert_eq!(maps.len(), 64);
        for m in &maps {
            if let TileMapping::Table(lut) = m {
                assert!(lut.windows(2).all(|p| p[0] <= p[1]));
                assert!(lut.iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
        let out = clahe(&img, &ClaheParams::default()).unwrap();
        assert!(out.samples().iter().all(|s| (0.0..=1.0).contains(s)));
    }

    #[test]
    fn clahe_rejects_bad_params() {
        let img = ramp(4, 4);
        assert!(clahe(&img, &ClaheParams::default()).is_err());
        let p = ClaheParams {
            clip_limit: 1.0,
            ..ClaheParams::default()
        };
        assert!(clahe(&ramp(64, 64), &p).is_err());
    }

    #[test]
    fn four_quarter_turns_are_identity() {
        let img = ramp(7, 5);
        let mask = blob(7, 5);
        let spec = AugmentSpec {
            rotation_quarter_turns: 2,
            ..AugmentSpec::default()
        };
        let (i2, m2) = augment(&img, &mask, &spec, &mut Rng::new(0)).unwrap();
        let (i4, m4) = augment(&i2, &m2, &spec, &mut Rng::new(0)).unwrap();
        assert_eq!((i4, m4), (img.clone(), mask.clone()));

        let one = AugmentSpec {
            rotation_quarter_turns: 1,
            ..AugmentSpec::default()
        };
        let (r, _) = augment(&img, &mask, &one, &mut Rng::new(0)).unwrap();
        assert_eq!(r.dims(), (5, 7));
        // Top-right corner moves to the top-left under a counter-clockwise turn.
        assert_eq!(r.get(0, 0), img.get(6, 0));
    }

    #[test]
    fn double_flip_is_identity() {
        let img = ramp(6, 9);
        let mask = blob(6, 9);
        let spec = AugmentSpec {
            flip_horizontal: true,
            ..AugmentSpec::default()
        };
        let (i1, m1) = augment(&img, &mask, &spec, &mut Rng::new(0)).unwrap();
        assert_ne!(i1, img);
        let (i2, m2) = augment(&i1, &m1, &spec, &mut Rng::new(0)).unwrap();
        assert_eq!((i2, m2), (img, mask));
    }

    #[test]
    fn geometry_is_paired() {
        // An image equal to its mask must stay equal to its mask under pure geometry.
        let mask = blob(20, 20);
        let img = mask.to_image();
        for turns in 0..4 {
            let spec = AugmentSpec {
                rotation_quarter_turns: turns,
                flip_vertical: turns % 2 == 0,
                ..AugmentSpec::default()
            };
            let (i, m) = augment(&img, &mask, &spec, &mut Rng::new(0)).unwrap();
            assert_eq!(i, m.to_image());
        }
    }

    #[test]
    fn zoom_keeps_dimensions_and_binary_mask() {
        let img = ramp(21, 21);
        let mask = blob(21, 21);
        let spec = AugmentSpec {
            zoom: 1.3,
            intensity_scale: 1.2,
            intensity_shift: -0.1,
            noise_sigma: 0.02,
            ..AugmentSpec::default()
        };
        let (i, m) = augment(&img, &mask, &spec, &mut Rng::new(4)).unwrap();
        assert_eq!(i.dims(), (21, 21));
        assert_eq!(m.dims(), (21, 21));
        // Center pixel is a fixed point of the zoom.
        assert_eq!(m.get(10, 10), mask.get(10, 10));
        let bad = AugmentSpec {
            zoom: 0.0,
            ..AugmentSpec::default()
        };
        assert!(augment(&img, &mask, &bad, &mut Rng::new(0)).is_err());
    }
}
