//! Exact Euclidean distance transform by two separable passes: per-column
//! nearest-background distances, then a lower envelope of parabolas along
//! each row. All arithmetic is on integers, so the result matches an
//! exhaustive nearest-pixel search exactly.

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMap {
    width: usize,
    height: usize,
    squared: Vec<u64>,
    values: Vec<f64>,
}

impl DistanceMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Euclidean distances in pixels.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Squared distances, exact integers.
    pub fn squared(&self) -> &[u64] {
        &self.squared
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Lower envelope of parabolas `f[q] + (p - q)^2` over the finite entries of `f`.
fn envelope_1d(f: &[Option<u64>], out: &mut [u64]) {
    let n = f.len();
    // Parabola vertices and the left boundary of each one's span as a fraction num/den.
    let mut vertex: Vec<usize> = Vec::with_capacity(n);
    // `None` is minus infinity.
    let mut bound: Vec<Option<(i128, i128)>> = Vec::with_capacity(n);
    let key = |q: usize| f[q].map(|v| v as i128 + (q as i128) * (q as i128));
    for q in 0..n {
        let Some(fq) = key(q) else { continue };
        loop {
            let Some(&v) = vertex.last() else {
                vertex.push(q);
                bound.push(None);
                break;
            };
            let fv = key(v).expect("vertex entries are finite");
            let num = fq - fv;
            let den = 2 * (q as i128 - v as i128);
            // Intersection at or left of the current span start: parabola v is hidden.
            let hidden = match *bound.last().unwrap() {
                None => false,
                Some((bn, bd)) => num * bd <= bn * den,
            };
            if hidden {
                vertex.pop();
                bound.pop();
            } else {
                vertex.push(q);
                bound.push(Some((num, den)));
                break;
            }
        }
    }
    let mut k = 0;
    for (p, slot) in out.iter_mut().enumerate() {
        while k + 1 < vertex.len() {
            let (bn, bd) = bound[k + 1].expect("only the first span is unbounded");
            if bn < (p as i128) * bd {
                k += 1;
            } else {
                break;
            }
        }
        let v = vertex[k];
        let d = p as i128 - v as i128;
        *slot = (f[v].unwrap() as i128 + d * d) as u64;
    }
}

/// Distance from each foreground pixel to the nearest background pixel.
///
/// The raster border is not background; a mask without any background pixel
/// is an error.
pub fn distance_transform(mask: &BinaryMask) -> Result<DistanceMap> {
    let (w, h) = mask.dims();
    if mask.count_ones() == w * h {
        return Err(Error::NoBackground);
    }
    // Column pass: distance to the nearest background pixel in the same column.
    let mut column: Vec<Option<u64>> = vec![None; w * h];
    for x in 0..w {
        let mut last: Option<usize> = None;
        for y in 0..h {
            if !mask.get(x, y) {
                last = Some(y);
            }
            column[y * w + x] = last.map(|l| (y - l) as u64);
        }
        let mut next: Option<usize> = None;
        for y in (0..h).rev() {
            if !mask.get(x, y) {
                next = Some(y);
            }
            if let Some(n) = next {
                let d = (n - y) as u64;
                let slot = &mut column[y * w + x];
                *slot = Some(slot.map_or(d, |c| c.min(d)));
            }
        }
    }
    let mut squared = vec![0u64; w * h];
    let mut f = vec![None; w];
    for y in 0..h {
        for x in 0..w {
            f[x] = column[y * w + x].map(|d| d * d);
        }
        envelope_1d(&f, &mut squared[y * w..(y + 1) * w]);
    }
    let values = squared.iter().map(|&s| (s as f64).sqrt()).collect();
    Ok(DistanceMap {
        width: w,
        height: h,
        squared,
        values,
    })
}
