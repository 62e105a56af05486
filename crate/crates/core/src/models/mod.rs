//! Multinomial Naive Bayes and one-vs-rest linear SVM over sparse vectors.

mod mnb;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SparseVector;

pub use mnb::{mnb_scores, train_mnb, MnbModel};
pub use svm::{
    decision_values, dual_objective, primal_objective, solve_l2loss_dual, train_svm_ovr, BinarySolution, LinearModel,
    SolverSettings,
};

/// Labelled sparse vectors in a feature space of dimension `dim`.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub vectors: Vec<SparseVector>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub dim: usize,
}

impl Dataset {
    pub fn new(vectors: Vec<SparseVector>, labels: Vec<usize>, n_classes: usize, dim: usize) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::Training(format!("{} vectors but {} labels", vectors.len(), labels.len())));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::ClassOutOfRange { index: bad, n_classes });
        }
        if let Some(v) = vectors.iter().find(|v| v.max_index().is_some_and(|i| i as usize >= dim)) {
            return Err(Error::Training(format!(
                "feature index {} exceeds dimension {dim}",
                v.max_index().unwrap_or_default()
            )));
        }
        Ok(Dataset { vectors, labels, n_classes, dim })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    fn check_trainable(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::Training("at least two classes are required".into()));
        }
        if let Some(c) = self.class_counts().iter().position(|&n| n == 0) {
            return Err(Error::Training(format!("class {c} has no training documents")));
        }
        if self.vectors.iter().flat_map(|v| v.entries()).any(|(_, x)| !x.is_finite()) {
            return Err(Error::Training("non-finite feature value".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// SVM misclassification cost.
    pub c: f64,
    /// Stopping tolerance on the projected-gradient spread.
    pub tol: f64,
    /// Maximum number of passes over the data per binary problem.
    pub max_iter: usize,
    /// Additive smoothing for Naive Bayes.
    pub alpha: f64,
    /// Seeds the coordinate order of the SVM solver.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { c: 1.0, tol: 0.1, max_iter: 1000, alpha: 1.0, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be a positive number, got {v}")))
            }
        };
        positive("C", self.c)?;
        positive("tol", self.tol)?;
        positive("alpha", self.alpha)?;
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mnb,
    Svm,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Mnb => "mnb",
            ModelKind::Svm => "svm",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mnb" => Ok(ModelKind::Mnb),
            "svm" => Ok(ModelKind::Svm),
            other => Err(Error::Config(format!("unknown model kind {other:?}; expected mnb or svm"))),
        }
    }
}

/// A trained model of either kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "params")]
pub enum Classifier {
    Mnb(MnbModel),
    Svm(LinearModel),
}

impl Classifier {
    pub fn train(kind: ModelKind, data: &Dataset, config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        Ok(match kind {
            ModelKind::Mnb => Classifier::Mnb(train_mnb(data, config.alpha)?),
            ModelKind::Svm => Classifier::Svm(train_svm_ovr(data, config)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Classifier::Mnb(_) => ModelKind::Mnb,
            Classifier::Svm(_) => ModelKind::Svm,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Classifier::Mnb(m) => m.n_classes(),
            Classifier::Svm(m) => m.n_classes(),
        }
    }

    pub fn scores(&self, x: &SparseVector) -> Vec<f64> {
        match self {
            Classifier::Mnb(m) => mnb_scores(m, x),
            Classifier::Svm(m) => decision_values(m, x),
        }
    }

    pub fn predict(&self, x: &SparseVector) -> Result<usize> {
        predict(&self.scores(x))
    }
}

/// Index of the highest score; exact ties go to the lowest index.
pub fn predict(scores: &[f64]) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::Training("no scores to predict from".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NanScore);
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(best)
}
