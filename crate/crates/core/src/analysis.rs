//! Per-class feature rankings from one-vs-rest SVM weights.
//!
//! A feature with a large positive weight in class `c`'s weight vector
//! pushes documents towards `c`; those are the indicators reported. The
//! most negative weights point at the rest of the classes and are only
//! reported on request.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{NgramKey, Vocabulary};
use crate::models::LinearModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub rank: usize,
    pub class: usize,
    pub feature: u32,
    pub weight: f64,
    pub key: NgramKey,
}

/// The `k` features with the largest non-negative weight for `class`, by
/// descending weight, ties by ascending feature index. The bias weight is
/// never ranked.
pub fn top_features(model: &LinearModel, vocab: &Vocabulary, class: usize, k: usize) -> Result<Vec<RankedFeature>> {
    rank(model, vocab, class, k, Direction::Positive)
}

/// The `k` most negative weights for `class`, most negative first.
pub fn bottom_features(model: &LinearModel, vocab: &Vocabulary, class: usize, k: usize) -> Result<Vec<RankedFeature>> {
    rank(model, vocab, class, k, Direction::Negative)
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Positive,
    Negative,
}

fn rank(model: &LinearModel, vocab: &Vocabulary, class: usize, k: usize, dir: Direction) -> Result<Vec<RankedFeature>> {
    let weights =
        model.weights.get(class).ok_or(Error::ClassOutOfRange { index: class, n_classes: model.n_classes() })?;
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if vocab.len() != model.dim {
        return Err(Error::Config(format!(
            "vocabulary has {} entries but the model has {} features",
            vocab.len(),
            model.dim
        )));
    }

    let mut candidates: Vec<(u32, f64)> = weights[..model.dim]
        .iter()
        .enumerate()
        .map(|(i, &w)| (i as u32, w))
        .filter(|&(_, w)| match dir {
            Direction::Positive => w >= 0.0,
            Direction::Negative => w < 0.0,
        })
        .collect();
    candidates.sort_by(|a, b| {
        let by_weight = match dir {
            Direction::Positive => b.1.total_cmp(&a.1),
            Direction::Negative => a.1.total_cmp(&b.1),
        };
        by_weight.then(a.0.cmp(&b.0))
    });

    Ok(candidates
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(r, (feature, weight))| RankedFeature {
            rank: r + 1,
            class,
            feature,
            weight,
            key: vocab.key(feature).cloned().expect("dimension checked against vocabulary"),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassFeatures {
    pub class: usize,
    pub label: String,
    pub top: Vec<RankedFeature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative: Option<Vec<RankedFeature>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub k: usize,
    pub classes: Vec<ClassFeatures>,
}

pub fn feature_report(
    model: &LinearModel,
    vocab: &Vocabulary,
    labels: &[String],
    k: usize,
    include_negative: bool,
) -> Result<FeatureReport> {
    let classes = (0..model.n_classes())
        .map(|class| {
            Ok(ClassFeatures {
                class,
                label: labels.get(class).cloned().unwrap_or_else(|| class.to_string()),
                top: top_features(model, vocab, class, k)?,
                negative: if include_negative { Some(bottom_features(model, vocab, class, k)?) } else { None },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureReport { k, classes })
}

/// One block per class with `rank weight channel order n-gram` columns.
pub fn render_feature_report(report: &FeatureReport) -> String {
    let mut out = String::new();
    let block = |out: &mut String, title: &str, list: &[RankedFeature]| {
        let _ = writeln!(out, "== {title}");
        let _ = writeln!(out, "{:>5} {:>12} {:<7} {:>5}  n-gram", "rank", "weight", "channel", "order");
        for f in list {
            let _ = writeln!(
                out,
                "{:>5} {:>12.6} {:<7} {:>5}  {}",
                f.rank,
                f.weight,
                f.key.channel,
                f.key.order(),
                f.key.text()
            );
        }
        let _ = writeln!(out);
    };
    for c in &report.classes {
        block(&mut out, &c.label, &c.top);
        if let Some(neg) = &c.negative {
            block(&mut out, &format!("{} (negative)", c.label), neg);
        }
    }
    out
}
