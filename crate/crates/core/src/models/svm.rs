//! L2-regularized squared-hinge linear SVM trained by dual coordinate
//! descent, one binary problem per class.
//!
//! For labels `y_i = ±1` the primal problem is
//!
//! ```text
//! min_w  ½‖w‖² + C Σ max(0, 1 − y_i wᵀx_i)²
//! ```
//!
//! and the dual is `min_α ½ αᵀQ̄α − eᵀα` subject to `α ≥ 0`, where
//! `Q̄ = Q + D`, `Q_ij = y_i y_j x_iᵀx_j` and `D_ii = 1/(2C)`. Each step
//! minimizes over one `α_i` in closed form while keeping `w = Σ α_i y_i x_i`
//! up to date, with the usual shrinking of bound variables.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Dataset, TrainConfig};
use crate::error::Result;
use crate::features::SparseVector;
use crate::rng::{stream_rng, Component};

/// One-vs-rest weight vectors over `dim + 1` coordinates; the last one
/// multiplies a constant bias feature of value 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "SparseWeights", into = "SparseWeights")]
pub struct LinearModel {
    pub weights: Vec<Vec<f64>>,
    pub dim: usize,
    pub config: TrainConfig,
}

impl LinearModel {
    pub fn n_classes(&self) -> usize {
        self.weights.len()
    }

    pub fn bias(&self, class: usize) -> f64 {
        self.weights[class][self.dim]
    }
}

#[derive(Serialize, Deserialize)]
struct SparseWeights {
    dim: usize,
    config: TrainConfig,
    /// Non-zero `(index, weight)` pairs per class, bias at index `dim`.
    weights: Vec<Vec<(u32, f64)>>,
}

impl From<LinearModel> for SparseWeights {
    fn from(m: LinearModel) -> Self {
        let weights = m.weights.iter().map(|w| SparseVector::from_dense(w).entries().to_vec()).collect();
        SparseWeights { dim: m.dim, config: m.config, weights }
    }
}

impl From<SparseWeights> for LinearModel {
    fn from(s: SparseWeights) -> Self {
        let weights = s
            .weights
            .into_iter()
            .map(|pairs| {
                let mut w = vec![0.0; s.dim + 1];
                for (i, v) in pairs {
                    if let Some(slot) = w.get_mut(i as usize) {
                        *slot = v;
                    }
                }
                w
            })
            .collect();
        LinearModel { weights, dim: s.dim, config: s.config }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Append a constant feature of value 1 at index `dim`.
    pub bias: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinarySolution {
    /// Length `dim`, or `dim + 1` with bias.
    pub w: Vec<f64>,
    pub alpha: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves one binary problem. `ys` must be ±1.
pub fn solve_l2loss_dual<R: Rng>(
    xs: &[&SparseVector],
    ys: &[f64],
    dim: usize,
    settings: SolverSettings,
    rng: &mut R,
) -> BinarySolution {
    let l = xs.len();
    let bias = settings.bias;
    let n = dim + usize::from(bias);
    let diag = 0.5 / settings.c;

    let mut w = vec![0.0; n];
    let mut alpha = vec![0.0; l];
    let qd: Vec<f64> = xs.iter().map(|x| x.norm_squared() + if bias { 1.0 } else { 0.0 } + diag).collect();

    let dot = |w: &[f64], x: &SparseVector| -> f64 {
        let b = if bias { w[dim] } else { 0.0 };
        x.dot_dense(&w[..dim]) + b
    };

    let mut index: Vec<usize> = (0..l).collect();
    let mut active = l;
    let mut pg_max_old = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < settings.max_iter {
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        index[..active].shuffle(rng);

        let mut s = 0;
        while s < active {
            let i = index[s];
            let y = ys[i];
            let g = y * dot(&w, xs[i]) - 1.0 + diag * alpha[i];

            let mut pg = 0.0;
            if alpha[i] == 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                } else if g < 0.0 {
                    pg = g;
                }
            } else {
                pg = g;
            }
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);

            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).max(0.0);
                let d = (alpha[i] - old) * y;
                for &(j, v) in xs[i].entries() {
                    w[j as usize] += d * v;
                }
                if bias {
                    w[dim] += d;
                }
            }
            s += 1;
        }
        iterations += 1;

        if pg_max - pg_min <= settings.tol {
            if active == l {
                converged = true;
                break;
            }
            // re-check the shrunk variables before stopping
            active = l;
            pg_max_old = f64::INFINITY;
            continue;
        }
        pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
    }

    BinarySolution { w, alpha, iterations, converged }
}

fn augmented_dot(w: &[f64], x: &SparseVector, dim: usize) -> f64 {
    let b = if w.len() > dim { w[dim] } else { 0.0 };
    x.dot_dense(&w[..dim]) + b
}

/// `½‖w‖² + C Σ max(0, 1 − y wᵀx)²`; `w` may carry a trailing bias weight.
pub fn primal_objective(w: &[f64], xs: &[&SparseVector], ys: &[f64], dim: usize, c: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = xs.iter().zip(ys).map(|(x, y)| (1.0 - y * augmented_dot(w, x, dim)).max(0.0).powi(2)).sum();
    reg + c * loss
}

/// `Σα − ½‖Σ α_i y_i x_i‖² − Σα²/(4C)`, evaluated from `alpha` alone.
pub fn dual_objective(alpha: &[f64], xs: &[&SparseVector], ys: &[f64], dim: usize, bias: bool, c: f64) -> f64 {
    let mut w = vec![0.0; dim + usize::from(bias)];
    for ((x, y), a) in xs.iter().zip(ys).zip(alpha) {
        for &(j, v) in x.entries() {
            w[j as usize] += a * y * v;
        }
        if bias {
            w[dim] += a * y;
        }
    }
    let wn: f64 = w.iter().map(|v| v * v).sum();
    alpha.iter().sum::<f64>() - 0.5 * wn - alpha.iter().map(|a| a * a).sum::<f64>() / (4.0 * c)
}

/// Trains one binary problem per class (class vs. rest), in parallel.
/// Class `c` shuffles coordinates with stream `c` of the seed.
pub fn train_svm_ovr(data: &Dataset, config: &TrainConfig) -> Result<LinearModel> {
    config.validate()?;
    data.check_trainable()?;

    let xs: Vec<&SparseVector> = data.vectors.iter().collect();
    let settings = SolverSettings { c: config.c, tol: config.tol, max_iter: config.max_iter, bias: true };
    let weights = (0..data.n_classes)
        .into_par_iter()
        .map(|class| {
            let ys: Vec<f64> = data.labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            let mut rng = stream_rng(config.seed, Component::Svm, class as u64);
            solve_l2loss_dual(&xs, &ys, data.dim, settings, &mut rng).w
        })
        .collect();
    Ok(LinearModel { weights, dim: data.dim, config: config.clone() })
}

/// `⟨w_c, (x, 1)⟩` for every class. Indices at or beyond the model
/// dimension are ignored.
pub fn decision_values(model: &LinearModel, x: &SparseVector) -> Vec<f64> {
    model.weights.iter().map(|w| augmented_dot(w, x, model.dim)).collect()
}
