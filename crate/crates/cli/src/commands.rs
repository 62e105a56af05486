use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use tempora::composer::{composite_id, read_composites, write_composites};
use tempora::corpus::{load_corpus_with, read_vertical_file, ParseOptions};
use tempora::eval::{render_text, SHARED_SENTENCE_WARNING};
use tempora::synth::{generate_corpus, write_corpus, SynthConfig};
use tempora::{
    build_vocabulary, composite_stats, cross_validate, feature_report, generate_composites, pool_by_class,
    render_feature_report, vectorize, Classifier, CompositeDocument, CvConfig, Dataset, Document, EvalReport,
    ModelFile, Sentence, SourceDocument, TimeBinning,
};

use crate::config::RunConfig;

pub const BINNING_FILE: &str = "binning.json";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Documents with their class, either composites or raw corpus files.
enum Labeled {
    Composed { docs: Vec<CompositeDocument>, ids: Vec<String> },
    Raw { docs: Vec<SourceDocument>, classes: Vec<usize> },
}

struct Inputs {
    data: Labeled,
    labels: Vec<String>,
    binning: Option<TimeBinning>,
}

impl Inputs {
    fn classes(&self) -> Vec<usize> {
        match &self.data {
            Labeled::Composed { docs, .. } => docs.iter().map(|d| d.class).collect(),
            Labeled::Raw { classes, .. } => classes.clone(),
        }
    }

    fn is_composed(&self) -> bool {
        matches!(self.data, Labeled::Composed { .. })
    }
}

fn load_raw(cfg: &RunConfig) -> Result<Vec<SourceDocument>> {
    let Some(manifest) = &cfg.manifest else {
        bail!("no corpus given; pass --manifest (or --composed for composite input)");
    };
    if !manifest.is_file() {
        bail!("manifest {} does not exist", manifest.display());
    }
    let data_dir = match &cfg.data_dir {
        Some(d) => d.clone(),
        None => manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let docs = load_corpus_with(manifest, &data_dir, &cfg.parse_options())
        .with_context(|| format!("loading corpus from {}", manifest.display()))?;
    if docs.is_empty() {
        bail!("manifest {} lists no documents", manifest.display());
    }
    Ok(docs)
}

fn resolve_binning(cfg: &RunConfig, docs: &[SourceDocument]) -> Result<TimeBinning> {
    Ok(cfg.binning.resolve(docs.iter().map(|d| d.year))?)
}

fn load_composed(dir: &Path) -> Result<Inputs> {
    if !dir.is_dir() {
        bail!("composite directory {} does not exist", dir.display());
    }
    let (docs, labels) = read_composites(dir).with_context(|| format!("reading composites from {}", dir.display()))?;
    let mut seen = vec![0; labels.len()];
    let ids = docs
        .iter()
        .map(|d| {
            seen[d.class] += 1;
            composite_id(d.class, seen[d.class] - 1)
        })
        .collect();
    let binning_path = dir.join(BINNING_FILE);
    let binning = if binning_path.is_file() {
        let text = fs::read_to_string(&binning_path).with_context(|| format!("reading {}", binning_path.display()))?;
        Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", binning_path.display()))?)
    } else {
        None
    };
    Ok(Inputs { data: Labeled::Composed { docs, ids }, labels, binning })
}

fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    if let Some(dir) = &cfg.composed {
        return load_composed(dir);
    }
    let docs = load_raw(cfg)?;
    let binning = resolve_binning(cfg, &docs)?;
    let classes = docs.iter().map(|d| binning.assign_class(d.year)).collect::<tempora::Result<Vec<_>>>()?;
    Ok(Inputs { labels: binning.labels().to_vec(), data: Labeled::Raw { docs, classes }, binning: Some(binning) })
}

#[derive(Serialize)]
struct ClassSummary {
    label: String,
    first_year: i32,
    last_year: i32,
    documents: usize,
    sentences: usize,
    tokens: usize,
}

#[derive(Serialize)]
struct IngestSummary {
    documents: usize,
    sentences: usize,
    tokens: usize,
    classes: Vec<ClassSummary>,
}

pub fn ingest(cfg: &RunConfig) -> Result<()> {
    let docs = load_raw(cfg)?;
    let binning = resolve_binning(cfg, &docs)?;
    let mut classes: Vec<ClassSummary> = (0..binning.len())
        .map(|c| {
            let (first_year, last_year) = binning.bounds(c);
            ClassSummary {
                label: binning.label(c).to_string(),
                first_year,
                last_year,
                documents: 0,
                sentences: 0,
                tokens: 0,
            }
        })
        .collect();
    for d in &docs {
        let s = &mut classes[binning.assign_class(d.year)?];
        s.documents += 1;
        s.sentences += d.sentences.len();
        s.tokens += d.token_count();
    }
    let summary = IngestSummary {
        documents: docs.len(),
        sentences: classes.iter().map(|c| c.sentences).sum(),
        tokens: classes.iter().map(|c| c.tokens).sum(),
        classes,
    };

    let mut text = format!("{:<10}{:>12}{:>8}{:>11}{:>10}\n", "class", "years", "docs", "sentences", "tokens");
    for c in &summary.classes {
        let _ = writeln!(
            text,
            "{:<10}{:>12}{:>8}{:>11}{:>10}",
            c.label,
            format!("{}-{}", c.first_year, c.last_year),
            c.documents,
            c.sentences,
            c.tokens
        );
    }
    let _ = writeln!(
        text,
        "{:<10}{:>12}{:>8}{:>11}{:>10}",
        "total", "", summary.documents, summary.sentences, summary.tokens
    );
    print!("{text}");
    for c in summary.classes.iter().filter(|c| c.documents == 0) {
        eprintln!("warning: class {} has no documents", c.label);
    }
    if let Some(out) = &cfg.out {
        create_dir(out)?;
        write_file(&out.join("ingest.json"), to_json(&summary)?)?;
    }
    Ok(())
}

pub fn compose(cfg: &RunConfig) -> Result<()> {
    let docs = load_raw(cfg)?;
    let binning = resolve_binning(cfg, &docs)?;
    let pool = pool_by_class(&docs, &binning)?;
    let composites = generate_composites(&pool, &cfg.composer)?;
    let out = cfg.out_dir("composed");
    create_dir(&out)?;
    write_composites(&out, &composites, binning.labels())
        .with_context(|| format!("writing composites to {}", out.display()))?;
    write_file(&out.join(BINNING_FILE), to_json(&binning)?)?;
    let stats = composite_stats(&composites);
    write_file(
        &out.join("composition.json"),
        to_json(&serde_json::json!({ "composer": cfg.composer, "labels": binning.labels(), "stats": stats }))?,
    )?;
    println!(
        "{} composites in {} classes, mean {:.1} tokens, written to {}",
        stats.total_docs,
        binning.len(),
        stats.mean_tokens,
        out.display()
    );
    Ok(())
}

fn cv_config(cfg: &RunConfig) -> CvConfig {
    CvConfig { features: cfg.features.clone(), model: cfg.model, train: cfg.train.clone(), k: cfg.k, seed: cfg.seed }
}

pub fn cv(cfg: &RunConfig) -> Result<EvalReport> {
    let inputs = load_inputs(cfg)?;
    let classes = inputs.classes();
    let config = cv_config(cfg);
    let mut report = match &inputs.data {
        Labeled::Composed { docs, .. } => cross_validate(docs, &classes, &inputs.labels, &config)?,
        Labeled::Raw { docs, .. } => cross_validate(docs, &classes, &inputs.labels, &config)?,
    };
    if inputs.is_composed() {
        report.warnings.push(SHARED_SENTENCE_WARNING.to_string());
    }

    let out = cfg.out_dir("out");
    create_dir(&out)?;
    let text = render_text(&report);
    write_file(&out.join("report.json"), to_json(&report)?)?;
    write_file(&out.join("report.txt"), &text)?;
    write_file(&out.join("confusion.csv"), report.confusion.to_csv(&report.labels))?;
    print!("{text}");
    Ok(report)
}

fn snapshot(cfg: &RunConfig) -> serde_json::Value {
    serde_json::json!({
        "binning": cfg.binning.to_string(),
        "features": cfg.features,
        "model": cfg.model,
        "train": cfg.train,
        "composer": cfg.composer,
        "seed": cfg.seed,
    })
}

fn fit<D: Document>(
    docs: &[D],
    classes: Vec<usize>,
    n_classes: usize,
    cfg: &RunConfig,
) -> Result<(tempora::Vocabulary, Classifier)> {
    let vocab = build_vocabulary(docs, &cfg.features)?;
    let data = Dataset::new(docs.iter().map(|d| vectorize(d, &vocab)).collect(), classes, n_classes, vocab.len())?;
    let model = Classifier::train(cfg.model, &data, &cfg.train)?;
    Ok((vocab, model))
}

pub fn train(cfg: &RunConfig) -> Result<PathBuf> {
    let inputs = load_inputs(cfg)?;
    let classes = inputs.classes();
    let n_docs = classes.len();
    let n = inputs.labels.len();
    let (vocabulary, model) = match &inputs.data {
        Labeled::Composed { docs, .. } => fit(docs, classes, n, cfg)?,
        Labeled::Raw { docs, .. } => fit(docs, classes, n, cfg)?,
    };
    let file = ModelFile { labels: inputs.labels, binning: inputs.binning, vocabulary, model, config: snapshot(cfg) };
    let out = cfg.out_dir("out");
    create_dir(&out)?;
    let path = out.join("model.json");
    file.save(&path)?;
    println!(
        "trained {} model on {} documents, {} classes, {} features; saved to {}",
        file.kind(),
        n_docs,
        n,
        file.vocabulary.len(),
        path.display()
    );
    Ok(path)
}

fn load_model(path: &Path) -> Result<ModelFile> {
    ModelFile::load(path).with_context(|| format!("loading model {}", path.display()))
}

/// Writes `doc_id,predicted_label,<score per class>` for every input
/// document, in input order.
pub fn predict(cfg: &RunConfig, model_path: &Path, files: &[PathBuf]) -> Result<PathBuf> {
    let model = load_model(model_path)?;
    let docs: Vec<(String, Vec<Sentence>)> = if !files.is_empty() {
        let options: ParseOptions = cfg.parse_options();
        files
            .iter()
            .map(|p| {
                let id =
                    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string());
                Ok((id, read_vertical_file(p, &options)?))
            })
            .collect::<Result<_>>()?
    } else if let Some(dir) = &cfg.composed {
        match load_composed(dir)?.data {
            Labeled::Composed { docs, ids } => ids.into_iter().zip(docs.into_iter().map(|d| d.sentences)).collect(),
            Labeled::Raw { .. } => unreachable!(),
        }
    } else {
        load_raw(cfg)?.into_iter().map(|d| (d.id, d.sentences)).collect()
    };

    let out = cfg.out_dir("out");
    create_dir(&out)?;
    let path = out.join("predictions.csv");
    let mut writer = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    let mut header = vec!["doc_id".to_string(), "predicted_label".to_string()];
    header.extend(model.labels.iter().cloned());
    writer.write_record(&header)?;
    for (id, sentences) in &docs {
        let x = vectorize(sentences, &model.vocabulary);
        let scores = model.model.scores(&x);
        let predicted = tempora::predict(&scores).with_context(|| format!("scoring document {id}"))?;
        let mut row = vec![id.clone(), model.labels[predicted].clone()];
        row.extend(scores.iter().map(f64::to_string));
        writer.write_record(&row)?;
    }
    writer.flush().with_context(|| format!("writing {}", path.display()))?;
    println!("{} predictions written to {}", docs.len(), path.display());
    Ok(path)
}

pub fn features(cfg: &RunConfig, model_path: &Path, top: usize, negative: bool) -> Result<()> {
    let model = load_model(model_path)?;
    let Classifier::Svm(linear) = &model.model else {
        bail!("feature ranking needs an SVM model; {} holds a {} model", model_path.display(), model.kind());
    };
    let report = feature_report(linear, &model.vocabulary, &model.labels, top, negative)?;
    let text = render_feature_report(&report);
    let out = cfg.out_dir("out");
    create_dir(&out)?;
    write_file(&out.join("features.json"), to_json(&report)?)?;
    write_file(&out.join("features.txt"), &text)?;
    print!("{text}");
    Ok(())
}

pub fn synth(config: &SynthConfig, out: &Path) -> Result<()> {
    let docs = generate_corpus(config)?;
    write_corpus(out, &docs).with_context(|| format!("writing synthetic corpus to {}", out.display()))?;
    println!("{} documents written to {}", docs.len(), out.join("manifest.csv").display());
    Ok(())
}
