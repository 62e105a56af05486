//! Run configuration: defaults, then a TOML file, then command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use tempora::corpus::ParseOptions;
use tempora::{BinningSpec, ComposerConfig, FeaturizerConfig, ModelKind, TrainConfig, Weighting};

/// Flags shared by the corpus-driven subcommands.
#[derive(Args, Clone, Debug, Default)]
pub struct RunArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Top-level seed for sampling, fold assignment and the SVM solver.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Corpus manifest (`id,year,path`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Directory the manifest paths are relative to (default: the manifest's directory).
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Directory written by `compose`; used instead of the raw corpus.
    #[arg(long)]
    pub composed: Option<PathBuf>,
    /// `century`, `years:N`, `years:N@ORIGIN` or `edges:Y0,Y1,...`.
    #[arg(long)]
    pub binning: Option<String>,
    /// Comma-separated feature families, e.g. `word1` or `word1,pos3`.
    #[arg(long)]
    pub features: Option<String>,
    /// `mnb` or `svm`.
    #[arg(long)]
    pub model: Option<String>,
    /// Number of cross-validation folds.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub docs_per_class: Option<usize>,
    #[arg(long)]
    pub target_tokens: Option<usize>,
    /// SVM cost parameter.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Naive Bayes smoothing.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub min_doc_freq: Option<u32>,
    /// `raw-count` or `l2-normalized`.
    #[arg(long)]
    pub weighting: Option<String>,
    /// Skip `<...>` markup lines in vertical files.
    #[arg(long)]
    pub skip_markup: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    manifest: Option<PathBuf>,
    data_dir: Option<PathBuf>,
    composed: Option<PathBuf>,
    binning: Option<String>,
    features: Option<String>,
    model: Option<String>,
    k: Option<usize>,
    min_doc_freq: Option<u32>,
    weighting: Option<String>,
    skip_markup: Option<bool>,
    boundary_tag: Option<String>,
    #[serde(default)]
    composer: ComposerSection,
    #[serde(default)]
    train: TrainSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComposerSection {
    target_tokens: Option<usize>,
    docs_per_class: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainSection {
    c: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    alpha: Option<f64>,
}

/// Fully resolved settings for one command.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub composed: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub binning: BinningSpec,
    pub composer: ComposerConfig,
    pub features: FeaturizerConfig,
    pub model: ModelKind,
    pub train: TrainConfig,
    pub k: usize,
    pub seed: u64,
    pub skip_markup: bool,
    pub boundary_tag: String,
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                let mut file: FileConfig =
                    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
                let base = path.parent().unwrap_or(Path::new(""));
                for p in
                    [&mut file.out, &mut file.manifest, &mut file.data_dir, &mut file.composed].into_iter().flatten()
                {
                    if p.is_relative() {
                        *p = base.join(&*p);
                    }
                }
                file
            }
            None => FileConfig::default(),
        };

        let seed = args.seed.or(file.seed).unwrap_or(0);
        let binning = args.binning.clone().or(file.binning).unwrap_or_else(|| "century".into());
        let features = args.features.clone().or(file.features).unwrap_or_else(|| "word1".into());
        let model = args.model.clone().or(file.model).unwrap_or_else(|| "svm".into());
        let weighting = match args.weighting.clone().or(file.weighting).as_deref() {
            None | Some("raw-count") | Some("raw") => Weighting::RawCount,
            Some("l2-normalized") | Some("l2") => Weighting::L2Normalized,
            Some(other) => bail!("unknown weighting {other:?}; expected raw-count or l2-normalized"),
        };

        let mut featurizer = FeaturizerConfig::new(FeaturizerConfig::parse_specs(&features)?)?;
        featurizer.min_doc_freq = args.min_doc_freq.or(file.min_doc_freq).unwrap_or(1);
        featurizer.weighting = weighting;

        let defaults = ComposerConfig::default();
        let composer = ComposerConfig {
            target_tokens: args.target_tokens.or(file.composer.target_tokens).unwrap_or(defaults.target_tokens),
            docs_per_class: args.docs_per_class.or(file.composer.docs_per_class).unwrap_or(defaults.docs_per_class),
            seed,
        };
        let defaults = TrainConfig::default();
        let train = TrainConfig {
            c: args.c.or(file.train.c).unwrap_or(defaults.c),
            tol: args.tol.or(file.train.tol).unwrap_or(defaults.tol),
            max_iter: args.max_iter.or(file.train.max_iter).unwrap_or(defaults.max_iter),
            alpha: args.alpha.or(file.train.alpha).unwrap_or(defaults.alpha),
            seed,
        };
        train.validate()?;

        Ok(RunConfig {
            manifest: args.manifest.clone().or(file.manifest),
            data_dir: args.data_dir.clone().or(file.data_dir),
            composed: args.composed.clone().or(file.composed),
            out: args.out.clone().or(file.out),
            binning: binning.parse()?,
            composer,
            features: featurizer,
            model: model.parse()?,
            train,
            k: args.k.or(file.k).unwrap_or(10),
            seed,
            skip_markup: args.skip_markup || file.skip_markup.unwrap_or(false),
            boundary_tag: file.boundary_tag.unwrap_or_else(|| tempora::corpus::DEFAULT_BOUNDARY_TAG.into()),
        })
    }

    pub fn parse_options(&self) -> ParseOptions {
        ParseOptions { boundary_tag: self.boundary_tag.clone(), skip_markup: self.skip_markup }
    }

    pub fn out_dir(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = RunConfig::resolve(&RunArgs::default()).unwrap();
        assert_eq!(cfg.binning, BinningSpec::Century);
        assert_eq!(cfg.model, ModelKind::Svm);
        assert_eq!(cfg.k, 10);
        assert_eq!(cfg.composer.target_tokens, 330);
        assert_eq!(cfg.features.describe(), "word1");
    }

    #[test]
    fn flags_override_file_and_seed_reaches_every_component() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "seed = 3\nk = 5\nfeatures = \"pos2\"\nmanifest = \"corpus/m.csv\"\n[composer]\ndocs_per_class = 40\n[train]\nc = 0.5\n",
        )
        .unwrap();
        let args = RunArgs { config: Some(path), seed: Some(9), k: Some(4), ..Default::default() };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!((cfg.seed, cfg.composer.seed, cfg.train.seed), (9, 9, 9));
        assert_eq!(cfg.k, 4);
        assert_eq!(cfg.features.describe(), "pos2");
        assert_eq!(cfg.composer.docs_per_class, 40);
        assert_eq!(cfg.train.c, 0.5);
        assert_eq!(cfg.manifest.unwrap(), dir.path().join("corpus/m.csv"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "sead = 3\n").unwrap();
        let err = RunConfig::resolve(&RunArgs { config: Some(path), ..Default::default() }).unwrap_err();
        assert!(format!("{err:#}").contains("sead"));
    }
}
