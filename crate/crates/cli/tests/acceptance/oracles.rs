//! Brute-force references the acceptance criteria compare against.

use std::collections::VecDeque;

use himforge::postprocess::Connectivity;
use himforge::BinaryMask;

pub struct Tally {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

pub fn tally(pred: &BinaryMask, gt: &BinaryMask) -> Tally {
    let mut t = Tally { tp: 0, tn: 0, fp: 0, fn_: 0 };
    for y in 0..gt.height() {
        for x in 0..gt.width() {
            match (pred.get(x, y), gt.get(x, y)) {
                (true, true) => t.tp += 1,
                (false, false) => t.tn += 1,
                (true, false) => t.fp += 1,
                (false, true) => t.fn_ += 1,
            }
        }
    }
    t
}

/// Accuracy, precision, recall and F1 as the harmonic mean of precision and recall.
pub fn hand_metrics(t: &Tally) -> [f64; 4] {
    let (tp, tn, fp, fn_) = (t.tp as f64, t.tn as f64, t.fp as f64, t.fn_ as f64);
    let precision = tp / (tp + fp);
    let recall = tp / (tp + fn_);
    [(tp + tn) / (tp + tn + fp + fn_), precision, recall, 2.0 * precision * recall / (precision + recall)]
}

fn offsets(conn: Connectivity) -> Vec<(isize, isize)> {
    let mut out = Vec::new();
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            if (dx, dy) != (0, 0) && (conn == Connectivity::Eight || dx == 0 || dy == 0) {
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
            for (dx, dy) in offsets(conn) {
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

/// Keeps flood-filled components of at least `min_area` pixels.
pub fn filter_components(mask: &BinaryMask, min_area: usize, conn: Connectivity) -> BinaryMask {
    let (ids, n) = flood_fill(mask, conn);
    let mut area = vec![0usize; n as usize + 1];
    for &id in &ids {
        area[id as usize] += 1;
    }
    let bits = ids.iter().map(|&id| id != 0 && area[id as usize] >= min_area).collect();
    BinaryMask::new(mask.width(), mask.height(), bits).unwrap()
}

/// Squared distance to the nearest background pixel by exhaustive search.
pub fn brute_squared_edt(mask: &BinaryMask) -> Vec<u64> {
    let (w, h) = mask.dims();
    let background: Vec<(i64, i64)> =
        (0..w * h).filter(|&i| !mask.bits()[i]).map(|i| ((i % w) as i64, (i / w) as i64)).collect();
    (0..w * h)
        .map(|i| {
            if !mask.bits()[i] {
                return 0;
            }
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            background.iter().map(|&(bx, by)| ((bx - x).pow(2) + (by - y).pow(2)) as u64).min().unwrap()
        })
        .collect()
}

/// Mean over points of (b - a) / max(a, b).
pub fn silhouette(points: &[[f64; 2]], labels: &[usize]) -> f64 {
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let k = labels.iter().max().unwrap() + 1;
    let mut total = 0.0;
    for i in 0..points.len() {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for j in (0..points.len()).filter(|&j| j != i) {
            sums[labels[j]] += dist(points[i], points[j]);
            counts[labels[j]] += 1;
        }
        let a = sums[labels[i]] / counts[labels[i]] as f64;
        let b = (0..k).filter(|&c| c != labels[i]).map(|c| sums[c] / counts[c] as f64).fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / points.len() as f64
}

/// Fraction of total squared deviation left after projecting and reconstructing.
pub fn residual_fraction(vectors: &[Vec<f64>], reconstruct: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let n = vectors.len() as f64;
    let dim = vectors[0].len();
    let mean: Vec<f64> = (0..dim).map(|k| vectors.iter().map(|v| v[k]).sum::<f64>() / n).collect();
    let mut total = 0.0;
    let mut residual = 0.0;
    for v in vectors {
        let r = reconstruct(v);
        for k in 0..dim {
            total += (v[k] - mean[k]).powi(2);
            residual += (v[k] - r[k]).powi(2);
        }
    }
    residual / total
}
