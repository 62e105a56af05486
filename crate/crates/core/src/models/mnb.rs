use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::features::SparseVector;

/// Multinomial Naive Bayes with additive smoothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MnbModel {
    pub log_priors: Vec<f64>,
    /// `log_likelihoods[class][feature]`
    pub log_likelihoods: Vec<Vec<f64>>,
    pub alpha: f64,
}

impl MnbModel {
    pub fn n_classes(&self) -> usize {
        self.log_priors.len()
    }

    pub fn dim(&self) -> usize {
        self.log_likelihoods.first().map_or(0, Vec::len)
    }
}

/// `log P(c) = log(N_c / N)` and
/// `log P(f | c) = log((count(c, f) + alpha) / (total(c) + alpha * V))`.
pub fn train_mnb(data: &Dataset, alpha: f64) -> Result<MnbModel> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    data.check_trainable()?;

    let v = data.dim;
    let mut counts = vec![vec![0.0f64; v]; data.n_classes];
    for (x, &label) in data.vectors.iter().zip(&data.labels) {
        for &(i, value) in x.entries() {
            counts[label][i as usize] += value;
        }
    }

    let n = data.len() as f64;
    let log_priors = data.class_counts().iter().map(|&nc| (nc as f64 / n).ln()).collect();
    let log_likelihoods = counts
        .into_iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            let log_denom = (total + alpha * v as f64).ln();
            row.into_iter().map(|c| (c + alpha).ln() - log_denom).collect()
        })
        .collect();
    Ok(MnbModel { log_priors, log_likelihoods, alpha })
}

/// Unnormalized log posteriors. Features outside the model's dimension
/// are ignored.
pub fn mnb_scores(model: &MnbModel, x: &SparseVector) -> Vec<f64> {
    model.log_priors.iter().zip(&model.log_likelihoods).map(|(prior, ll)| prior + x.dot_dense(ll)).collect()
}
