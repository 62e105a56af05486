//! Stratified k-fold cross-validation, confusion matrices and baselines.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::features::{build_vocabulary_from_counts, vectorize_counts, FeaturizerConfig, NgramCounts, Vocabulary};
use crate::models::{Classifier, Dataset, ModelKind, TrainConfig};
use crate::rng::{stream_rng, Component};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    /// Fold of each example.
    pub folds: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.folds {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles each class's examples with `seed`, then deals the classes, in
/// class order, round-robin over the folds as one continuous sequence. Per
/// class and overall, fold sizes differ by at most one.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    let n_classes = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }

    let mut rng = stream_rng(seed, Component::Folds, 0);
    let mut folds = vec![0; labels.len()];
    let mut position = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldAssignment { k, folds })
}

/// Counts with rows = true class and columns = predicted class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix { counts: vec![vec![0; n_classes]; n_classes] }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(o) {
                *a += b;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.trace() as f64 / t as f64,
        }
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.n_classes()).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    /// `None` when nothing was predicted as `class`.
    pub fn precision(&self, class: usize) -> Option<f64> {
        let col = self.column_sums()[class];
        (col > 0).then(|| self.counts[class][class] as f64 / col as f64)
    }

    /// `None` when `class` never occurs.
    pub fn recall(&self, class: usize) -> Option<f64> {
        let row = self.row_sums()[class];
        (row > 0).then(|| self.counts[class][class] as f64 / row as f64)
    }

    /// Header row of predicted labels, then one row per true label.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let mut out = String::from("true\\predicted");
        for l in labels {
            out.push(',');
            out.push_str(&csv_field(l));
        }
        out.push('\n');
        for (label, row) in labels.iter().zip(&self.counts) {
            out.push_str(&csv_field(label));
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<(Vec<String>, ConfusionMatrix)> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let labels: Vec<String> = reader.headers()?.iter().skip(1).map(str::to_string).collect();
        let mut counts = Vec::new();
        for record in reader.records() {
            let record = record?;
            let row = record
                .iter()
                .skip(1)
                .map(|v| v.parse::<u64>().map_err(|_| Error::Config(format!("bad confusion count {v:?}"))))
                .collect::<Result<Vec<_>>>()?;
            counts.push(row);
        }
        Ok((labels, ConfusionMatrix { counts }))
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Share of the most frequent label.
pub fn majority_baseline(labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let n = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
    let mut counts = vec![0usize; n];
    for &l in labels {
        counts[l] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    best as f64 / labels.len() as f64
}

/// Most frequent label, ties to the lowest index.
pub fn majority_class(labels: &[usize]) -> Option<usize> {
    let n = labels.iter().map(|&l| l + 1).max()?;
    let mut counts = vec![0usize; n];
    for &l in labels {
        counts[l] += 1;
    }
    let best = counts.iter().copied().max()?;
    counts.iter().position(|&c| c == best)
}

pub fn random_baseline(n_classes: usize) -> f64 {
    if n_classes == 0 {
        0.0
    } else {
        1.0 / n_classes as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub features: FeaturizerConfig,
    pub model: ModelKind,
    pub train: TrainConfig,
    pub k: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub majority: f64,
    pub random: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub labels: Vec<String>,
    pub accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub fold_vocabulary_sizes: Vec<usize>,
    pub confusion: ConfusionMatrix,
    /// Per class; `None` where undefined.
    pub precision: Vec<Option<f64>>,
    pub recall: Vec<Option<f64>>,
    pub baselines: Baselines,
    pub config: CvConfig,
    pub warnings: Vec<String>,
}

pub const SHARED_SENTENCE_WARNING: &str = "composite documents were generated once from the full sentence pool \
before splitting, so a source sentence can appear in both training and test folds; accuracy may be optimistic";

/// Vocabulary of one fold, built from its training documents only.
pub fn fold_vocabulary(
    counts: &[NgramCounts],
    folds: &FoldAssignment,
    fold: usize,
    config: &FeaturizerConfig,
) -> Result<Vocabulary> {
    let train = folds.train_indices(fold);
    build_vocabulary_from_counts(train.iter().map(|&i| &counts[i]), config)
}

struct FoldResult {
    confusion: ConfusionMatrix,
    vocab_size: usize,
}

/// Runs k-fold cross-validation. Each fold builds its vocabulary and trains
/// its model on the other folds only; folds run in parallel and merge by
/// fold index.
pub fn cross_validate<D: Document + Sync>(
    docs: &[D],
    labels: &[usize],
    class_labels: &[String],
    config: &CvConfig,
) -> Result<EvalReport> {
    if docs.len() != labels.len() {
        return Err(Error::Config(format!("{} documents but {} labels", docs.len(), labels.len())));
    }
    let n_classes = class_labels.len();
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::ClassOutOfRange { index: bad, n_classes });
    }
    let present = {
        let mut seen = vec![false; n_classes];
        labels.iter().for_each(|&l| seen[l] = true);
        seen.iter().filter(|&&s| s).count()
    };
    if present < 2 {
        return Err(Error::Config("cross-validation needs at least two classes present".into()));
    }
    config.features.validate()?;
    config.train.validate()?;

    let counts: Vec<NgramCounts> = docs.par_iter().map(|d| NgramCounts::of(d, &config.features)).collect();
    let folds = stratified_kfold(labels, config.k, config.seed)?;

    let results = (0..config.k)
        .into_par_iter()
        .map(|fold| -> Result<FoldResult> {
            let mut confusion = ConfusionMatrix::new(n_classes);
            let test = folds.test_indices(fold);
            if test.is_empty() {
                return Ok(FoldResult { confusion, vocab_size: 0 });
            }
            let vocab = fold_vocabulary(&counts, &folds, fold, &config.features)?;
            let train = folds.train_indices(fold);
            let data = Dataset::new(
                train.iter().map(|&i| vectorize_counts(&counts[i], &vocab)).collect(),
                train.iter().map(|&i| labels[i]).collect(),
                n_classes,
                vocab.len(),
            )?;
            let model = Classifier::train(config.model, &data, &config.train)
                .map_err(|e| Error::Training(format!("fold {fold}: {e}")))?;
            for &i in &test {
                let predicted = model.predict(&vectorize_counts(&counts[i], &vocab))?;
                confusion.add(labels[i], predicted);
            }
            Ok(FoldResult { confusion, vocab_size: vocab.len() })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut confusion = ConfusionMatrix::new(n_classes);
    for r in &results {
        confusion.merge(&r.confusion);
    }
    Ok(EvalReport {
        labels: class_labels.to_vec(),
        accuracy: confusion.accuracy(),
        fold_accuracies: results.iter().map(|r| r.confusion.accuracy()).collect(),
        fold_vocabulary_sizes: results.iter().map(|r| r.vocab_size).collect(),
        precision: (0..n_classes).map(|c| confusion.precision(c)).collect(),
        recall: (0..n_classes).map(|c| confusion.recall(c)).collect(),
        confusion,
        baselines: Baselines { majority: majority_baseline(labels), random: random_baseline(n_classes) },
        config: config.clone(),
        warnings: Vec::new(),
    })
}

fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

/// Human-readable report: accuracy table, per-class metrics and the
/// confusion matrix. Percentages carry one decimal.
pub fn render_text(report: &EvalReport) -> String {
    let mut out = String::new();
    let cfg = &report.config;
    let _ = writeln!(out, "model {}  features {}  k={}  seed={}", cfg.model, cfg.features.describe(), cfg.k, cfg.seed);
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<22}{:>14}", "", "Accuracy (%)");
    let _ = writeln!(out, "{:<22}{:>14}", "Majority baseline", pct(report.baselines.majority));
    let _ = writeln!(out, "{:<22}{:>14}", "Random baseline", pct(report.baselines.random));
    let _ = writeln!(out, "{:<22}{:>14}", cfg.features.describe(), pct(report.accuracy));
    let _ = writeln!(out);

    let folds: Vec<String> = report.fold_accuracies.iter().map(|&a| pct(a)).collect();
    let _ = writeln!(out, "per-fold accuracy: {}", folds.join(" "));
    let _ = writeln!(out);

    let width = report.labels.iter().map(String::len).max().unwrap_or(5).max(5) + 2;
    let _ = writeln!(out, "{:<width$}{:>11}{:>11}{:>9}", "class", "precision", "recall", "docs");
    let rows = report.confusion.row_sums();
    for (c, label) in report.labels.iter().enumerate() {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), pct);
        let _ = writeln!(
            out,
            "{:<width$}{:>11}{:>11}{:>9}",
            label,
            opt(report.precision[c]),
            opt(report.recall[c]),
            rows[c]
        );
    }
    let _ = writeln!(out);

    let cell = report
        .confusion
        .counts
        .iter()
        .flatten()
        .map(|c| c.to_string().len())
        .chain(report.labels.iter().map(String::len))
        .max()
        .unwrap_or(1)
        + 2;
    let _ = write!(out, "{:<width$}", "true \\ pred");
    for l in &report.labels {
        let _ = write!(out, "{l:>cell$}");
    }
    let _ = writeln!(out);
    for (label, row) in report.labels.iter().zip(&report.confusion.counts) {
        let _ = write!(out, "{label:<width$}");
        for c in row {
            let _ = write!(out, "{c:>cell$}");
        }
        let _ = writeln!(out);
    }
    for w in &report.warnings {
        let _ = writeln!(out);
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
