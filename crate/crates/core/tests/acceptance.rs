//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Criterion 9 runs only when `TEMPORA_COLONIA_MANIFEST` and
//! `TEMPORA_COLONIA_DIR` point at the Colonia corpus.

mod common;

use std::collections::{HashMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{class_labels, marker_corpus, sentence};
use tempora::analysis::top_features;
use tempora::composer::write_composites;
use tempora::eval::fold_vocabulary;
use tempora::features::NgramCounts;
use tempora::models::{dual_objective, primal_objective, solve_l2loss_dual, SolverSettings};
use tempora::synth::{generate_corpus, SynthConfig};
use tempora::*;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let passed: bool = $cond;
        if !passed {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn solver_correctness() -> Outcome {
    let pos = SparseVector::from_pairs(vec![(0, 1.0)]);
    let neg = SparseVector::from_pairs(vec![(0, -1.0)]);
    let settings = SolverSettings { c: 1.0, tol: 1e-10, max_iter: 100_000, bias: false };
    let sol = solve_l2loss_dual(&[&pos, &neg], &[1.0, -1.0], 1, settings, &mut ChaCha8Rng::seed_from_u64(0));
    ensure!((sol.w[0] - 0.8).abs() < 1e-4, "1-D weight {} (expected 0.8)", sol.w[0]);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for trial in 0..25 {
        let dim = 2 + trial % 4;
        let xs: Vec<SparseVector> = (0..20)
            .map(|_| SparseVector::from_dense(&(0..dim).map(|_| rng.random_range(-3.0..3.0)).collect::<Vec<f64>>()))
            .collect();
        let ys: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let refs: Vec<&SparseVector> = xs.iter().collect();
        let c = [0.1, 1.0, 10.0][trial % 3];
        let settings = SolverSettings { c, tol: 1e-6, max_iter: 100_000, bias: true };
        let sol = solve_l2loss_dual(&refs, &ys, dim, settings, &mut rng);
        ensure!(sol.converged, "trial {trial} did not converge");
        let gap = primal_objective(&sol.w, &refs, &ys, dim, c) - dual_objective(&sol.alpha, &refs, &ys, dim, true, c);
        ensure!(gap > -1e-9 && gap < 1e-3, "trial {trial}: duality gap {gap}");
        worst = worst.max(gap);
    }
    Ok(format!("w = {:.6}, worst duality gap {worst:.2e} over 25 problems", sol.w[0]))
}

/// Dense multinomial Naive Bayes written independently of the library.
fn dense_mnb_scores(xs: &[Vec<f64>], ys: &[usize], n_classes: usize, alpha: f64, query: &[f64]) -> Vec<f64> {
    let v = query.len();
    (0..n_classes)
        .map(|c| {
            let members: Vec<&Vec<f64>> = xs.iter().zip(ys).filter(|(_, &y)| y == c).map(|(x, _)| x).collect();
            let prior = (members.len() as f64 / xs.len() as f64).ln();
            let counts: Vec<f64> = (0..v).map(|j| members.iter().map(|x| x[j]).sum()).collect();
            let total: f64 = counts.iter().sum();
            prior + (0..v).map(|j| query[j] * ((counts[j] + alpha) / (total + alpha * v as f64)).ln()).sum::<f64>()
        })
        .collect()
}

fn mnb_oracle() -> Outcome {
    let data = ok(Dataset::new(
        vec![SparseVector::from_pairs(vec![(0, 2.0)]), SparseVector::from_pairs(vec![(1, 2.0)])],
        vec![0, 1],
        2,
        2,
    ))?;
    let m = ok(train_mnb(&data, 1.0))?;
    let expected = [[0.75, 0.25], [0.25, 0.75]];
    for (c, row) in expected.iter().enumerate() {
        ensure!((m.log_priors[c].exp() - 0.5).abs() < 1e-9, "prior of class {c}: {}", m.log_priors[c].exp());
        for (f, p) in row.iter().enumerate() {
            let got = m.log_likelihoods[c][f].exp();
            ensure!((got - p).abs() < 1e-9, "P(f{f}|c{c}) = {got}, expected {p}");
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let n_classes = rng.random_range(2..5usize);
        let dim = rng.random_range(1..7usize);
        let n = n_classes + rng.random_range(0..8usize);
        let alpha = [0.1, 0.5, 1.0, 2.0][trial % 4];
        let dense: Vec<Vec<f64>> =
            (0..n).map(|_| (0..dim).map(|_| rng.random_range(0..4u32) as f64).collect()).collect();
        let ys: Vec<usize> = (0..n).map(|i| if i < n_classes { i } else { rng.random_range(0..n_classes) }).collect();
        let data =
            ok(Dataset::new(dense.iter().map(|x| SparseVector::from_dense(x)).collect(), ys.clone(), n_classes, dim))?;
        let model = ok(train_mnb(&data, alpha))?;
        for _ in 0..5 {
            let query: Vec<f64> = (0..dim).map(|_| rng.random_range(0..5u32) as f64).collect();
            let got = mnb_scores(&model, &SparseVector::from_dense(&query));
            let want = dense_mnb_scores(&dense, &ys, n_classes, alpha, &query);
            for (g, w) in got.iter().zip(&want) {
                worst = worst.max((g - w).abs());
                ensure!((g - w).abs() < 1e-9, "trial {trial}: score {g} vs oracle {w}");
            }
        }
    }
    Ok(format!("closed form exact, max deviation from dense oracle {worst:.1e} over 50 datasets"))
}

fn word_unigram_cv(k: usize, model: ModelKind) -> CvConfig {
    CvConfig {
        features: FeaturizerConfig::single(Channel::Word, 1).unwrap(),
        model,
        train: TrainConfig::default(),
        k,
        seed: 1,
    }
}

fn separable_cv() -> Outcome {
    let (docs, labels) = marker_corpus(5, 60, 11, |_| true);
    let report = ok(cross_validate(&docs, &labels, &class_labels(5), &word_unigram_cv(10, ModelKind::Svm)))?;
    ensure!(report.accuracy == 1.0, "fully marked corpus: {:.1}%", 100.0 * report.accuracy);
    ensure!(report.confusion.trace() == report.confusion.total(), "confusion matrix not diagonal");

    // five of 500 documents lack their marker
    let (docs, labels) = marker_corpus(5, 100, 12, |i| i % 100 != 37);
    let noisy = ok(cross_validate(&docs, &labels, &class_labels(5), &word_unigram_cv(10, ModelKind::Svm)))?;
    let pct = 100.0 * noisy.accuracy;
    ensure!((pct - 99.0).abs() <= 1.0, "99% marked corpus: {pct:.1}%");
    Ok(format!("100.0% with markers everywhere, {pct:.1}% with markers in 99% of documents"))
}

fn cv_accuracy(
    composites: &[CompositeDocument],
    labels: &[String],
    features: &str,
    seed: u64,
) -> std::result::Result<f64, String> {
    let classes: Vec<usize> = composites.iter().map(|c| c.class).collect();
    let config = CvConfig {
        features: ok(FeaturizerConfig::new(ok(FeaturizerConfig::parse_specs(features))?))?,
        model: ModelKind::Svm,
        train: TrainConfig::default(),
        k: 10,
        seed,
    };
    Ok(100.0 * ok(cross_validate(composites, &classes, labels, &config))?.accuracy)
}

fn composites_for(
    docs: &[SourceDocument],
    binning: &str,
    per_class: usize,
    seed: u64,
) -> std::result::Result<(Vec<CompositeDocument>, Vec<String>), String> {
    let binning = ok(ok(binning.parse::<BinningSpec>())?.resolve(docs.iter().map(|d| d.year)))?;
    let pool = ok(pool_by_class(docs, &binning))?;
    let composites =
        ok(generate_composites(&pool, &ComposerConfig { target_tokens: 330, docs_per_class: per_class, seed }))?;
    Ok((composites, binning.labels().to_vec()))
}

fn drift_ordering() -> Outcome {
    let seed = 1;
    let docs = ok(generate_corpus(&SynthConfig { seed, ..Default::default() }))?;
    let (century, century_labels) = composites_for(&docs, "century", 200, seed)?;
    let (fifty, fifty_labels) = composites_for(&docs, "years:50", 100, seed)?;
    ensure!(fifty_labels.len() > century_labels.len(), "50-year binning has no more classes than centuries");

    let mut acc = HashMap::new();
    for f in ["word1", "pos3", "pos2", "pos1"] {
        acc.insert(f, cv_accuracy(&century, &century_labels, f, seed)?);
    }
    let chain = format!(
        "word1 {:.1} >= pos3 {:.1} >= pos2 {:.1} >= pos1 {:.1}",
        acc["word1"], acc["pos3"], acc["pos2"], acc["pos1"]
    );
    ensure!(
        acc["word1"] >= acc["pos3"] && acc["pos3"] >= acc["pos2"] && acc["pos2"] >= acc["pos1"],
        "ordering violated: {chain}"
    );

    let mut drops = Vec::new();
    for f in ["pos1", "pos2", "pos3"] {
        let finer = cv_accuracy(&fifty, &fifty_labels, f, seed)?;
        ensure!(finer <= acc[f], "{f}: 50-year {finer:.1} > century {:.1}", acc[f]);
        drops.push(format!("{f} {finer:.1} <= {:.1}", acc[f]));
    }
    Ok(format!("century {chain}; 50-year {}", drops.join(", ")))
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn composite_statistics() -> Outcome {
    let docs = ok(generate_corpus(&SynthConfig { documents: 60, seed: 3, ..Default::default() }))?;
    let binning = ok(TimeBinning::centuries(16, 20))?;
    let pool = ok(pool_by_class(&docs, &binning))?;
    let config = ComposerConfig { target_tokens: 330, docs_per_class: 300, seed: 9 };
    let composites = ok(generate_composites(&pool, &config))?;

    let sentences: usize = pool.classes.iter().map(Vec::len).sum();
    let tokens: usize = (0..pool.n_classes()).map(|c| pool.class_tokens(c)).sum();
    let mean_sentence = tokens as f64 / sentences as f64;
    let stats = composite_stats(&composites);
    ensure!(
        stats.mean_tokens >= 330.0 && stats.mean_tokens <= 330.0 + mean_sentence,
        "mean composite length {:.2} outside [330, {:.2}]",
        stats.mean_tokens,
        330.0 + mean_sentence
    );
    ensure!(composites.iter().all(|c| c.token_count() >= 330), "a composite is shorter than the target");

    let year_of: HashMap<&str, i32> = docs.iter().map(|d| (d.id.as_str(), d.year)).collect();
    for c in &composites {
        for source in &c.provenance {
            let class = ok(binning.assign_class(year_of[source.as_ref()]))?;
            ensure!(class == c.class, "composite of class {} holds a sentence from class {class}", c.class);
        }
    }

    let a = ok(tempfile::tempdir())?;
    let b = ok(tempfile::tempdir())?;
    ok(write_composites(a.path(), &composites, binning.labels()))?;
    ok(write_composites(b.path(), &ok(generate_composites(&pool, &config))?, binning.labels()))?;
    let (fa, fb) = (dir_bytes(a.path()), dir_bytes(b.path()));
    ensure!(fa == fb, "two runs with the same seed wrote different files");
    let other = ok(generate_composites(&pool, &ComposerConfig { seed: 10, ..config }))?;
    ensure!(other != composites, "a different seed produced identical composites");

    Ok(format!(
        "mean {:.2} tokens in [330, {:.2}], purity 100%, {} files byte-identical",
        stats.mean_tokens,
        330.0 + mean_sentence,
        fa.len()
    ))
}

fn baselines() -> Outcome {
    let labels: Vec<usize> = [(0, 18), (1, 14), (2, 38), (3, 17)].iter().flat_map(|&(c, n)| vec![c; n]).collect();
    ensure!(labels.len() == 87, "distribution has {} documents", labels.len());
    let majority = majority_baseline(&labels);
    ensure!(majority == 38.0 / 87.0, "majority baseline {majority}");
    ensure!(format!("{:.2}", 100.0 * majority) == "43.68", "majority baseline prints as {:.2}", 100.0 * majority);
    let random = random_baseline(5);
    ensure!(random == 0.2, "random baseline {random}");
    Ok(format!("majority 38/87 = {:.2}%, random {:.1}%", 100.0 * majority, 100.0 * random))
}

fn feature_ranking() -> Outcome {
    let (mut docs, labels) = marker_corpus(4, 30, 21, |_| false);
    // plant "zzz" in every sentence of class 1
    for (d, &l) in docs.iter_mut().zip(&labels) {
        if l == 1 {
            for s in d.iter_mut() {
                let mut words: Vec<String> = s.tokens().iter().map(|t| t.form.clone()).collect();
                words.push("zzz".into());
                *s = sentence(&words);
            }
        }
    }
    let config = FeaturizerConfig::single(Channel::Word, 1).unwrap();
    let vocab = ok(build_vocabulary(&docs, &config))?;
    let data = ok(Dataset::new(docs.iter().map(|d| vectorize(d, &vocab)).collect(), labels, 4, vocab.len()))?;
    let model = ok(train_svm_ovr(&data, &TrainConfig::default()))?;
    let top = ok(top_features(&model, &vocab, 1, 10))?;
    ensure!(top[0].key.text() == "zzz", "rank 1 for class 1 is {:?}", top[0].key.text());

    for factor in [0.001, 0.5, 3.0, 1e6] {
        let mut scaled = model.clone();
        scaled.weights.iter_mut().flatten().for_each(|w| *w *= factor);
        for class in 0..4 {
            let before: Vec<u32> = ok(top_features(&model, &vocab, class, 25))?.iter().map(|f| f.feature).collect();
            let after: Vec<u32> = ok(top_features(&scaled, &vocab, class, 25))?.iter().map(|f| f.feature).collect();
            ensure!(before == after, "class {class}: ranking changes under scaling by {factor}");
        }
    }
    Ok(format!("\"zzz\" ranks 1 (weight {:.3}); rankings unchanged under 4 positive scalings", top[0].weight))
}

fn leakage_guard() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tags = ["NOM", "V", "ADJ", "DET"];
    let mut docs: Vec<Vec<Sentence>> = Vec::new();
    let mut labels = Vec::new();
    for i in 0..45 {
        let sents = (0..3)
            .map(|s| {
                let tokens = (0..6)
                    .map(|t| {
                        // every document owns some unique forms and tags
                        let unique = t == s;
                        let form =
                            if unique { format!("d{i}s{s}") } else { format!("w{}", rng.random_range(0..15u32)) };
                        let pos = if unique && s == 0 {
                            format!("U{i}")
                        } else {
                            tags[rng.random_range(0..4usize)].to_string()
                        };
                        AnnotatedToken::new(form, pos, "")
                    })
                    .collect();
                Sentence::new(tokens).unwrap()
            })
            .collect();
        docs.push(sents);
        labels.push(i % 3);
    }

    let mut checked = 0;
    for spec in ["word1", "word2", "word3", "pos1", "pos2", "pos3", "word1,pos2"] {
        let config = ok(FeaturizerConfig::new(ok(FeaturizerConfig::parse_specs(spec))?))?;
        let counts: Vec<NgramCounts> = docs.iter().map(|d| NgramCounts::of(d, &config)).collect();
        let folds = ok(stratified_kfold(&labels, 5, 8))?;
        for fold in 0..5 {
            let vocab = ok(fold_vocabulary(&counts, &folds, fold, &config))?;
            let train: HashSet<&NgramKey> =
                folds.train_indices(fold).iter().flat_map(|&i| counts[i].iter().map(|(k, _)| k)).collect();
            let held_only: HashSet<&NgramKey> = folds
                .test_indices(fold)
                .iter()
                .flat_map(|&i| counts[i].iter().map(|(k, _)| k))
                .filter(|k| !train.contains(k))
                .collect();
            ensure!(!held_only.is_empty(), "{spec} fold {fold}: construction has no held-out-only n-grams");
            for key in vocab.keys() {
                ensure!(!held_only.contains(key), "{spec} fold {fold}: vocabulary contains held-out-only {key}");
            }
            ensure!(
                vocab.len() == train.len(),
                "{spec} fold {fold}: vocabulary {} vs training n-grams {}",
                vocab.len(),
                train.len()
            );
            checked += held_only.len();
        }
    }
    Ok(format!("{checked} held-out-only n-grams excluded across 7 feature sets x 5 folds"))
}

fn colonia() -> Option<Outcome> {
    let manifest = std::env::var_os("TEMPORA_COLONIA_MANIFEST")?;
    let dir = std::env::var_os("TEMPORA_COLONIA_DIR")?;
    let fifty = std::env::var("TEMPORA_COLONIA_FIFTY_BINNING").unwrap_or_else(|_| "years:50".into());
    Some((|| {
        let docs = ok(tempora::corpus::load_corpus_with(
            Path::new(&manifest),
            Path::new(&dir),
            &tempora::corpus::ParseOptions { skip_markup: true, ..Default::default() },
        ))?;
        let mut lines = Vec::new();
        for (binning, per_class) in [("century", 1500), (fifty.as_str(), 450)] {
            let (composites, labels) = composites_for(&docs, binning, per_class, 1)?;
            let word = cv_accuracy(&composites, &labels, "word1", 1)?;
            let pos = cv_accuracy(&composites, &labels, "pos3", 1)?;
            ensure!(word >= 99.0, "{binning}: word1 {word:.1} < 99.0");
            ensure!(pos >= 88.0, "{binning}: pos3 {pos:.1} < 88.0");
            lines.push(format!("{binning} word1 {word:.1} pos3 {pos:.1}"));
        }
        Ok(lines.join("; "))
    })())
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("PASS  {name}: {detail} ({secs:.1}s)");
            true
        }
        Err(detail) => {
            println!("FAIL  {name}: {detail} ({secs:.1}s)");
            false
        }
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 solver correctness", solver_correctness),
        ("2 MNB oracle equivalence", mnb_oracle),
        ("3 separable-corpus CV", separable_cv),
        ("4 drift ordering", drift_ordering),
        ("5 composite statistics", composite_statistics),
        ("6 baselines", baselines),
        ("7 feature ranking", feature_ranking),
        ("8 leakage guard", leakage_guard),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        if !run(name, f) {
            failed += 1;
        }
    }
    match colonia() {
        Some(outcome) => {
            if !run("9 Colonia reproduction", move || outcome) {
                failed += 1;
            }
        }
        None => println!("SKIP  9 Colonia reproduction: set TEMPORA_COLONIA_MANIFEST and TEMPORA_COLONIA_DIR to run"),
    }
    println!(
        "{} of {} criteria failed",
        failed,
        8 + usize::from(std::env::var_os("TEMPORA_COLONIA_MANIFEST").is_some())
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
