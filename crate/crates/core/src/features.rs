//! Word and POS n-gram features.
//!
//! N-grams never span a sentence boundary and no padding symbols are
//! added. Word forms are lowercased; POS tags are taken verbatim.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedToken, Document};
use crate::error::{Error, Result};

pub const MAX_ORDER: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Word,
    Pos,
}

impl Channel {
    fn symbol(self, token: &AnnotatedToken) -> String {
        match self {
            Channel::Word => token.form.to_lowercase(),
            Channel::Pos => token.pos.clone(),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Word => "word",
            Channel::Pos => "pos",
        })
    }
}

/// One feature family: a channel and an n-gram order, written `word1`,
/// `pos3` and so on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub channel: Channel,
    pub order: u8,
}

impl FeatureSpec {
    pub fn new(channel: Channel, order: u8) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::Config(format!("n-gram order must be in 1..=3, got {order}")));
        }
        Ok(FeatureSpec { channel, order })
    }
}

impl fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.channel, self.order)
    }
}

impl FromStr for FeatureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (channel, rest) = if let Some(r) = s.strip_prefix("word") {
            (Channel::Word, r)
        } else if let Some(r) = s.strip_prefix("pos") {
            (Channel::Pos, r)
        } else {
            return Err(Error::Config(format!("unknown feature {s:?}; expected word1..word3 or pos1..pos3")));
        };
        let order = rest
            .trim_start_matches([':', 'x'])
            .parse()
            .map_err(|_| Error::Config(format!("bad n-gram order in feature {s:?}")))?;
        FeatureSpec::new(channel, order)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NgramKey {
    pub channel: Channel,
    pub items: Vec<String>,
}

impl NgramKey {
    pub fn order(&self) -> usize {
        self.items.len()
    }

    pub fn text(&self) -> String {
        self.items.join(" ")
    }
}

impl fmt::Display for NgramKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}:{}", self.channel, self.order(), self.text())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    RawCount,
    L2Normalized,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeaturizerConfig {
    /// Feature families in index order; the combined space is their
    /// disjoint union.
    pub specs: Vec<FeatureSpec>,
    pub min_doc_freq: u32,
    pub weighting: Weighting,
}

impl FeaturizerConfig {
    pub fn new(specs: Vec<FeatureSpec>) -> Result<Self> {
        let config = FeaturizerConfig { specs, min_doc_freq: 1, weighting: Weighting::RawCount };
        config.validate()?;
        Ok(config)
    }

    pub fn single(channel: Channel, order: u8) -> Result<Self> {
        Self::new(vec![FeatureSpec::new(channel, order)?])
    }

    /// Parses a comma-separated list such as `word1,pos2`.
    pub fn parse_specs(list: &str) -> Result<Vec<FeatureSpec>> {
        list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::Config("at least one feature family is required".into()));
        }
        if self.min_doc_freq == 0 {
            return Err(Error::Config("min_doc_freq must be at least 1".into()));
        }
        for (i, s) in self.specs.iter().enumerate() {
            FeatureSpec::new(s.channel, s.order)?;
            if self.specs[..i].contains(s) {
                return Err(Error::Config(format!("feature family {s} listed twice")));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        self.specs.iter().map(ToString::to_string).collect::<Vec<_>>().join("+")
    }
}

/// Counts every `order`-gram of `channel` in `doc`.
pub fn extract_ngrams<D: Document + ?Sized>(doc: &D, channel: Channel, order: u8) -> HashMap<NgramKey, u32> {
    let mut counts = HashMap::new();
    for_each_ngram(doc, channel, order, |key| *counts.entry(key).or_insert(0) += 1);
    counts
}

fn for_each_ngram<D: Document + ?Sized>(doc: &D, channel: Channel, order: u8, mut f: impl FnMut(NgramKey)) {
    let n = order as usize;
    if n == 0 {
        return;
    }
    for sentence in doc.sentences() {
        let symbols: Vec<String> = sentence.tokens().iter().map(|t| channel.symbol(t)).collect();
        for window in symbols.windows(n) {
            f(NgramKey { channel, items: window.to_vec() });
        }
    }
}

/// All n-gram counts of one document for a configuration, keyed per feature
/// family and kept in first-occurrence order so vocabulary construction is
/// deterministic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NgramCounts {
    families: Vec<Vec<(NgramKey, u32)>>,
}

impl NgramCounts {
    pub fn of<D: Document + ?Sized>(doc: &D, config: &FeaturizerConfig) -> Self {
        let families = config
            .specs
            .iter()
            .map(|spec| {
                let mut slot: HashMap<NgramKey, usize> = HashMap::new();
                let mut entries: Vec<(NgramKey, u32)> = Vec::new();
                for_each_ngram(doc, spec.channel, spec.order, |key| match slot.get(&key) {
                    Some(&i) => entries[i].1 += 1,
                    None => {
                        slot.insert(key.clone(), entries.len());
                        entries.push((key, 1));
                    }
                });
                entries
            })
            .collect();
        NgramCounts { families }
    }

    pub fn iter(&self) -> impl Iterator<Item = &(NgramKey, u32)> {
        self.families.iter().flatten()
    }
}

/// Bijection between n-gram keys and dense feature indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    keys: Vec<NgramKey>,
    index: HashMap<NgramKey, u32>,
    config: FeaturizerConfig,
}

#[derive(Serialize, Deserialize)]
struct VocabularyData {
    config: FeaturizerConfig,
    keys: Vec<NgramKey>,
}

impl From<VocabularyData> for Vocabulary {
    fn from(data: VocabularyData) -> Self {
        Vocabulary::from_keys(data.keys, data.config)
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData { config: v.config, keys: v.keys }
    }
}

impl Vocabulary {
    fn from_keys(keys: Vec<NgramKey>, config: FeaturizerConfig) -> Self {
        let index = keys.iter().enumerate().map(|(i, k)| (k.clone(), i as u32)).collect();
        Vocabulary { keys, index, config }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn get(&self, key: &NgramKey) -> Option<u32> {
        self.index.get(key).copied()
    }

    pub fn key(&self, feature: u32) -> Option<&NgramKey> {
        self.keys.get(feature as usize)
    }

    pub fn keys(&self) -> &[NgramKey] {
        &self.keys
    }

    pub fn config(&self) -> &FeaturizerConfig {
        &self.config
    }
}

pub fn build_vocabulary<D: Document>(train_docs: &[D], config: &FeaturizerConfig) -> Result<Vocabulary> {
    let counts: Vec<NgramCounts> = train_docs.iter().map(|d| NgramCounts::of(d, config)).collect();
    build_vocabulary_from_counts(counts.iter(), config)
}

/// Indices are grouped by feature family in config order and, within a
/// family, follow first occurrence over the training documents.
pub fn build_vocabulary_from_counts<'a>(
    train: impl IntoIterator<Item = &'a NgramCounts>,
    config: &FeaturizerConfig,
) -> Result<Vocabulary> {
    config.validate()?;
    let train: Vec<&NgramCounts> = train.into_iter().collect();
    if train.is_empty() {
        return Err(Error::Config("cannot build a vocabulary from zero training documents".into()));
    }

    let mut keys = Vec::new();
    for family in 0..config.specs.len() {
        let mut doc_freq: HashMap<&NgramKey, (u32, usize)> = HashMap::new();
        let mut order = Vec::new();
        for doc in &train {
            for (key, _) in &doc.families[family] {
                let next = order.len();
                let e = doc_freq.entry(key).or_insert_with(|| (0, next));
                if e.1 == next {
                    order.push(key);
                }
                e.0 += 1;
            }
        }
        keys.extend(order.into_iter().filter(|k| doc_freq[k].0 >= config.min_doc_freq).cloned());
    }
    Ok(Vocabulary::from_keys(keys, config.clone()))
}

/// Sorted sparse vector with strictly increasing indices and non-zero values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Sorts, sums duplicate indices and drops zeros.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        SparseVector { entries }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector {
            entries: values.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i as u32, v)).collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: u32) -> f64 {
        self.entries.binary_search_by_key(&index, |&(i, _)| i).map_or(0.0, |p| self.entries[p].1)
    }

    pub fn norm_squared(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for e in &mut self.entries {
            e.1 *= factor;
        }
    }

    /// Dot product with a dense vector; indices past its end contribute 0.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().filter_map(|&(i, v)| dense.get(i as usize).map(|w| w * v)).sum()
    }

    pub fn max_index(&self) -> Option<u32> {
        self.entries.last().map(|e| e.0)
    }
}

pub fn vectorize<D: Document + ?Sized>(doc: &D, vocab: &Vocabulary) -> SparseVector {
    vectorize_counts(&NgramCounts::of(doc, vocab.config()), vocab)
}

pub fn vectorize_counts(counts: &NgramCounts, vocab: &Vocabulary) -> SparseVector {
    let pairs = counts.iter().filter_map(|(key, n)| vocab.get(key).map(|i| (i, *n as f64))).collect();
    let mut v = SparseVector::from_pairs(pairs);
    if vocab.config().weighting == Weighting::L2Normalized && !v.is_empty() {
        let norm = v.norm();
        v.scale(1.0 / norm);
    }
    v
}
