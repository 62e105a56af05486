//! Composite documents: artificial texts assembled from randomly drawn
//! sentences of a single time-period class.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{read_vertical_file, write_vertical, Document, LabeledPool, ParseOptions, Sentence};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Component};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposerConfig {
    pub target_tokens: usize,
    pub docs_per_class: usize,
    pub seed: u64,
}

impl Default for ComposerConfig {
    fn default() -> Self {
        ComposerConfig { target_tokens: 330, docs_per_class: 1500, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeDocument {
    pub class: usize,
    pub sentences: Vec<Sentence>,
    /// Source document id of each sentence.
    pub provenance: Vec<Arc<str>>,
}

impl Document for CompositeDocument {
    fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }
}

/// Builds `docs_per_class` composites for every class, ordered by class.
///
/// Each composite draws sentences uniformly without replacement from its
/// class pool until the running token count reaches `target_tokens`; the
/// sentence that crosses the target is kept whole. Should a composite use up
/// the whole pool first, drawing continues with replacement. Distinct
/// composites sample independently, so sentences recur across composites.
pub fn generate_composites(pool: &LabeledPool, config: &ComposerConfig) -> Result<Vec<CompositeDocument>> {
    if config.target_tokens == 0 || config.docs_per_class == 0 {
        return Err(Error::Config("target_tokens and docs_per_class must be at least 1".into()));
    }
    if let Some(empty) = pool.classes.iter().position(Vec::is_empty) {
        return Err(Error::EmptyPool { label: pool.labels[empty].clone() });
    }

    let per_class: Vec<Vec<CompositeDocument>> =
        (0..pool.n_classes()).into_par_iter().map(|class| compose_class(pool, class, config)).collect();
    Ok(per_class.into_iter().flatten().collect())
}

fn compose_class(pool: &LabeledPool, class: usize, config: &ComposerConfig) -> Vec<CompositeDocument> {
    let members = &pool.classes[class];
    let n = members.len();
    let mut rng = stream_rng(config.seed, Component::Composer, class as u64);
    // Partial Fisher-Yates over a persistent permutation: each composite
    // takes a uniform sample without replacement, whatever the array order.
    let mut order: Vec<usize> = (0..n).collect();

    (0..config.docs_per_class)
        .map(|_| {
            let mut sentences = Vec::new();
            let mut provenance = Vec::new();
            let mut tokens = 0;
            let mut drawn = 0;
            while tokens < config.target_tokens {
                let pick = if drawn < n {
                    let j = drawn + rng.random_range(0..(n - drawn) as u64) as usize;
                    order.swap(drawn, j);
                    drawn += 1;
                    order[drawn - 1]
                } else {
                    rng.random_range(0..n as u64) as usize
                };
                let member = &members[pick];
                tokens += member.sentence.len();
                sentences.push(member.sentence.clone());
                provenance.push(Arc::clone(&member.source));
            }
            CompositeDocument { class, sentences, provenance }
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub docs: usize,
    pub tokens: usize,
    pub mean_tokens: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompositeStats {
    pub classes: Vec<ClassStats>,
    pub total_docs: usize,
    pub total_tokens: usize,
    pub mean_tokens: f64,
}

pub fn composite_stats(composites: &[CompositeDocument]) -> CompositeStats {
    let n_classes = composites.iter().map(|c| c.class + 1).max().unwrap_or(0);
    let mut classes = vec![ClassStats::default(); n_classes];
    for c in composites {
        classes[c.class].docs += 1;
        classes[c.class].tokens += c.token_count();
    }
    for s in &mut classes {
        s.mean_tokens = mean(s.tokens, s.docs);
    }
    let total_docs = composites.len();
    let total_tokens = classes.iter().map(|c| c.tokens).sum();
    CompositeStats { classes, total_docs, total_tokens, mean_tokens: mean(total_tokens, total_docs) }
}

fn mean(total: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        total as f64 / n as f64
    }
}

pub const COMPOSITE_MANIFEST: &str = "manifest.csv";

#[derive(Debug, Serialize, Deserialize)]
struct CompositeRow {
    id: String,
    class: usize,
    label: String,
    tokens: usize,
    path: String,
    /// Per-sentence source ids joined with `|`.
    sources: String,
}

/// Identifier of the `n`-th composite of `class` as written to disk.
pub fn composite_id(class: usize, n: usize) -> String {
    format!("c{class:02}_{n:05}")
}

/// Writes each composite as `docs/<id>.vrt` under `dir` plus a
/// `manifest.csv` with columns `id,class,label,tokens,path,sources`.
pub fn write_composites(dir: &Path, composites: &[CompositeDocument], labels: &[String]) -> Result<()> {
    let docs_dir = dir.join("docs");
    fs::create_dir_all(&docs_dir).map_err(|e| Error::io(&docs_dir, e))?;
    let manifest_path = dir.join(COMPOSITE_MANIFEST);
    let mut manifest = csv::Writer::from_path(&manifest_path)?;

    let mut per_class = vec![0usize; labels.len()];
    for c in composites {
        let label = labels.get(c.class).ok_or(Error::ClassOutOfRange { index: c.class, n_classes: labels.len() })?;
        let id = composite_id(c.class, per_class[c.class]);
        per_class[c.class] += 1;
        let rel = format!("docs/{id}.vrt");
        let path = dir.join(&rel);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        write_vertical(&mut out, &c.sentences).and_then(|_| out.flush()).map_err(|e| Error::io(&path, e))?;

        let sources: Vec<&str> = c.provenance.iter().map(|s| &**s).collect();
        manifest.serialize(CompositeRow {
            id,
            class: c.class,
            label: label.clone(),
            tokens: c.token_count(),
            path: rel,
            sources: sources.join("|"),
        })?;
    }
    manifest.flush().map_err(|e| Error::io(&manifest_path, e))?;
    Ok(())
}

/// Reads a directory produced by [`write_composites`]. Returns the
/// composites and the class labels indexed by class.
pub fn read_composites(dir: &Path) -> Result<(Vec<CompositeDocument>, Vec<String>)> {
    let manifest_path = dir.join(COMPOSITE_MANIFEST);
    let file = File::open(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let rows: Vec<(usize, CompositeRow)> = reader
        .deserialize::<CompositeRow>()
        .enumerate()
        .map(|(i, r)| r.map(|r| (i + 1, r)).map_err(|e| Error::Load { row: i + 1, message: e.to_string() }))
        .collect::<Result<_>>()?;

    let mut labels: Vec<Option<String>> = Vec::new();
    for (row_no, row) in &rows {
        if labels.len() <= row.class {
            labels.resize(row.class + 1, None);
        }
        match &labels[row.class] {
            Some(l) if *l != row.label => {
                return Err(Error::Load {
                    row: *row_no,
                    message: format!("class {} labelled both {l:?} and {:?}", row.class, row.label),
                })
            }
            _ => labels[row.class] = Some(row.label.clone()),
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| Error::Load { row: 0, message: format!("no composites for class {i}") }))
        .collect::<Result<Vec<_>>>()?;

    let options = ParseOptions::default();
    let composites = rows
        .into_par_iter()
        .map(|(row_no, row)| {
            let path: PathBuf = dir.join(&row.path);
            let sentences = read_vertical_file(&path, &options)
                .map_err(|e| Error::Load { row: row_no, message: format!("composite {:?}: {e}", row.id) })?;
            let provenance: Vec<Arc<str>> = row.sources.split('|').map(Arc::from).collect();
            if provenance.len() != sentences.len() {
                return Err(Error::Load {
                    row: row_no,
                    message: format!(
                        "composite {:?}: {} sources listed for {} sentences",
                        row.id,
                        provenance.len(),
                        sentences.len()
                    ),
                });
            }
            Ok(CompositeDocument { class: row.class, sentences, provenance })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((composites, labels))
}
