use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Principal axes retained to reach a variance target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// `k` orthonormal rows of length `d`, by decreasing eigenvalue.
    pub basis: Vec<Vec<f64>>,
    /// All covariance eigenvalues, descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    pub retained_variance: f64,
}

impl Pca {
    pub fn components(&self) -> usize {
        self.basis.len()
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.basis
            .iter()
            .map(|b| b.iter().zip(v).zip(&self.mean).map(|((b, x), m)| b * (x - m)).sum())
            .collect()
    }

    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, b) in coords.iter().zip(&self.basis) {
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }
}

fn check_vectors(vectors: &[Vec<f64>], needed: usize) -> Result<usize> {
    if vectors.len() < needed {
        return Err(Error::TooFewVectors {
            needed,
            got: vectors.len(),
        });
    }
    let d = vectors[0].len();
    if d == 0 || vectors.iter().any(|v| v.len() != d || v.iter().any(|x| !x.is_finite())) {
        return Err(Error::InvalidParameter("vectors must be non-empty, finite and of equal length".into()));
    }
    Ok(d)
}

/// PCA on the population covariance (divisor `n`).
///
/// Keeps the smallest `k` whose cumulative explained variance reaches
/// `variance_target`. Returns the model and the projected vectors.
pub fn pca(vectors: &[Vec<f64>], variance_target: f64) -> Result<(Pca, Vec<Vec<f64>>)> {
    let d = check_vectors(vectors, 2)?;
    if !(variance_target > 0.0 && variance_target <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "variance target must lie in (0, 1], got {variance_target}"
        )));
    }
    let n = vectors.len() as f64;
    let mut mean = vec![0.0; d];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x / n;
        }
    }
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for v in vectors {
        let c: Vec<f64> = v.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[(i, j)] += c[i] * c[j] / n;
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov[(i, j)] = cov[(j, i)];
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();

    let (k, retained) = if total <= 0.0 {
        (1, 1.0)
    } else {
        let mut acc = 0.0;
        let mut k = d;
        for (i, l) in eigenvalues.iter().enumerate() {
            acc += l;
            if acc / total >= variance_target {
                k = i + 1;
                break;
            }
        }
        let kept: f64 = eigenvalues[..k].iter().sum();
        (k, (kept / total).min(1.0))
    };
    let basis = order[..k]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    let model = Pca {
        mean,
        basis,
        eigenvalues,
        retained_variance: retained,
    };
    let projected = vectors.iter().map(|v| model.project(v)).collect();
    Ok((model, projected))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Iterations run with exaggerated affinities and low momentum.
    pub exaggeration_iterations: usize,
}

impl Default for TsneParams {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TsneResult {
    pub positions: Vec<[f64; 2]>,
    /// KL divergence when exaggeration ends.
    pub initial_kl: f64,
    pub final_kl: f64,
}

fn squared_distances(vectors: &[Vec<f64>]) -> Vec<f64> {
    let n = vectors.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            d[i * n + j] = s;
            d[j * n + i] = s;
        }
    }
    d
}

/// Row-stochastic conditional affinities `p(j|i)`, row-major `n x n`.
///
/// Each row's Gaussian precision is bisected until the row entropy matches
/// `ln(perplexity)`.
pub fn conditional_affinities(vectors: &[Vec<f64>], perplexity: f64) -> Result<Vec<f64>> {
    let n = vectors.len();
    check_vectors(vectors, 10)?;
    if !(perplexity > 0.0) || perplexity >= (n as f64 - 1.0) / 3.0 {
        return Err(Error::PerplexityInfeasible { perplexity, points: n });
    }
    let dist = squared_distances(vectors);
    let target = perplexity.ln();
    let mut p = vec![0.0; n * n];
    let mut row = vec![0.0; n];
    for i in 0..n {
        let di = &dist[i * n..(i + 1) * n];
        let dmin = (0..n).filter(|&j| j != i).map(|j| di[j]).fold(f64::INFINITY, f64::min);
        let (mut beta, mut lo, mut hi) = (1.0, 0.0, f64::INFINITY);
        for _ in 0..200 {
            let mut sum = 0.0;
            let mut weighted = 0.0;
            for j in 0..n {
                row[j] = if j == i { 0.0 } else { (-beta * (di[j] - dmin)).exp() };
                sum += row[j];
                weighted += row[j] * (di[j] - dmin);
            }
            let entropy = sum.ln() + beta * weighted / sum;
            let err = entropy - target;
            if err.abs() < 1e-10 {
                break;
            }
            if err > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
        let sum: f64 = row.iter().sum();
        for j in 0..n {
            p[i * n + j] = row[j] / sum;
        }
    }
    Ok(p)
}

/// Symmetrized joint affinities `(p(j|i) + p(i|j)) / 2n`, summing to 1.
pub fn joint_probabilities(vectors: &[Vec<f64>], perplexity: f64) -> Result<Vec<f64>> {
    let n = vectors.len();
    let cond = conditional_affinities(vectors, perplexity)?;
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64);
        }
    }
    Ok(p)
}

/// Student-t kernel numerators and their sum over `i != j`.
fn kernel(y: &[[f64; 2]]) -> (Vec<f64>, f64) {
    let n = y.len();
    let mut num = vec![0.0; n * n];
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * n + j] = v;
            num[j * n + i] = v;
            sum += 2.0 * v;
        }
    }
    (num, sum)
}

fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let (num, sum) = kernel(y);
    p.iter()
        .zip(&num)
        .filter(|(&pij, _)| pij > 0.0)
        .map(|(&pij, &q)| pij * (pij / (q / sum).max(f64::MIN_POSITIVE)).ln())
        .sum()
}

/// Exact t-SNE into two dimensions.
pub fn tsne(vectors: &[Vec<f64>], params: &TsneParams, rng: &mut Rng) -> Result<TsneResult> {
    if params.iterations == 0 || !(params.learning_rate > 0.0) || !(params.early_exaggeration >= 1.0) {
        return Err(Error::InvalidParameter("invalid t-SNE schedule".into()));
    }
    let p = joint_probabilities(vectors, params.perplexity)?;
    let n = vectors.len();
    let init = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n).map(|_| [init.sample(rng), init.sample(rng)]).collect();
    let mut update = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let switch = params.exaggeration_iterations.min(params.iterations);
    let mut initial_kl = if switch == 0 { Some(kl_divergence(&p, &y)) } else { None };

    for it in 0..params.iterations {
        let (exaggeration, momentum) = if it < switch {
            (params.early_exaggeration, 0.5)
        } else {
            (1.0, 0.8)
        };
        let (num, sum) = kernel(&y);
        for i in 0..n {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = num[i * n + j];
                let coeff = 4.0 * (exaggeration * p[i * n + j] - w / sum) * w;
                g[0] += coeff * (y[i][0] - y[j][0]);
                g[1] += coeff * (y[i][1] - y[j][1]);
            }
            for a in 0..2 {
                gains[i][a] = if (g[a] > 0.0) != (update[i][a] > 0.0) {
                    gains[i][a] + 0.2
                } else {
                    (gains[i][a] * 0.8).max(0.01)
                };
                update[i][a] = momentum * update[i][a] - params.learning_rate * gains[i][a] * g[a];
            }
        }
        let mut centroid = [0.0; 2];
        for (yi, ui) in y.iter_mut().zip(&update) {
            yi[0] += ui[0];
            yi[1] += ui[1];
            centroid[0] += yi[0] / n as f64;
            centroid[1] += yi[1] / n as f64;
        }
        for yi in &mut y {
            yi[0] -= centroid[0];
            yi[1] -= centroid[1];
        }
        if it + 1 == switch {
            initial_kl = Some(kl_divergence(&p, &y));
        }
    }
    Ok(TsneResult {
        initial_kl: initial_kl.expect("recorded at the schedule switch"),
        final_kl: kl_divergence(&p, &y),
        positions: y,
    })
}
