//! Prints century and 50-year accuracy tables for the six n-gram feature
//! families on a synthetic diachronic corpus.
//!
//! cargo run --release -p tempora-core --example drift_table -- [SEED] [DOCS_PER_CLASS]

use tempora::synth::{generate_corpus, SynthConfig};
use tempora::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let per_class: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let docs = generate_corpus(&SynthConfig { seed, ..Default::default() })?;

    for (spec, n) in [("century", per_class), ("years:50", per_class / 2)] {
        let binning = spec.parse::<BinningSpec>()?.resolve(docs.iter().map(|d| d.year))?;
        let pool = pool_by_class(&docs, &binning)?;
        let composites = generate_composites(&pool, &ComposerConfig { target_tokens: 330, docs_per_class: n, seed })?;
        let labels: Vec<usize> = composites.iter().map(|c| c.class).collect();
        println!("{spec}: {} classes x {n} composites", binning.len());
        println!("  {:<10}{:>8}", "baseline", format!("{:.1}", 100.0 * random_baseline(binning.len())));
        for f in ["word1", "word2", "word3", "pos1", "pos2", "pos3"] {
            let config = CvConfig {
                features: FeaturizerConfig::new(FeaturizerConfig::parse_specs(f)?)?,
                model: ModelKind::Svm,
                train: TrainConfig::default(),
                k: 10,
                seed,
            };
            let report = cross_validate(&composites, &labels, binning.labels(), &config)?;
            println!("  {f:<10}{:>8.1}", 100.0 * report.accuracy);
        }
    }
    Ok(())
}
