//! Synthetic diachronic corpus with graded drift.
//!
//! Used for demos, benchmarks and tests where a real annotated historical
//! corpus is unavailable. Text is generated phrase by phrase from a small
//! set of POS templates whose mixture weights change smoothly with the
//! year, and words are drawn per tag from a lexicon where some lemmas have
//! an archaic and a modern spelling with a lemma-specific transition year.
//!
//! The template groups are built so that each kind of drift is visible to
//! a different n-gram order:
//!
//! * a handful of templates (adjective-heavy noun phrases, verb chains,
//!   bare conjunctions and adverbs) each peak in a different period, which
//!   shifts the tag unigram distribution;
//! * pronoun placement (`PRON V` versus `V PRON`) alternates with identical
//!   tag counts, so only bigrams and longer see it;
//! * two pairs of three-tag templates swap partners (`ADV V NOM` + `PRP V ADJ`
//!   versus `ADV V ADJ` + `PRP V NOM`) with identical unigram and bigram
//!   counts, so only trigrams see it.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{write_vertical, AnnotatedToken, Sentence, SourceDocument};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Component};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub first_year: i32,
    pub last_year: i32,
    pub documents: usize,
    pub sentences_per_doc: usize,
    /// Scales every syntactic drift amplitude; 1.0 is the default mix.
    pub syntax_drift: f64,
    /// Share of content tokens drawn from lemmas with spelling variants.
    pub variant_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            first_year: 1501,
            last_year: 2000,
            documents: 100,
            sentences_per_doc: 120,
            syntax_drift: 1.0,
            variant_rate: 0.35,
            seed: 0,
        }
    }
}

const TAGS: [&str; 8] = ["DET", "NOM", "ADJ", "V", "ADV", "PRP", "CONJ", "PRON"];
const NEUTRAL_PER_TAG: usize = 60;
const VARIANTS_PER_TAG: usize = 20;
const SYLLABLES: [&str; 20] = [
    "ba", "ca", "de", "fi", "go", "la", "me", "no", "pa", "ra", "sa", "te", "vi", "xo", "lu", "mo", "ne", "ri", "su",
    "za",
];

struct Lexicon {
    neutral: Vec<Vec<String>>,
    /// (archaic, modern, transition year) per tag.
    variants: Vec<Vec<(String, String, f64)>>,
}

impl Lexicon {
    fn new(config: &SynthConfig, rng: &mut ChaCha8Rng) -> Self {
        let word = |rng: &mut ChaCha8Rng, tag: usize, i: usize| {
            let a = SYLLABLES[rng.random_range(0..SYLLABLES.len() as u64) as usize];
            let b = SYLLABLES[rng.random_range(0..SYLLABLES.len() as u64) as usize];
            format!("{a}{b}{}{i}", TAGS[tag].to_lowercase().chars().next().unwrap_or('w'))
        };
        let span = (config.last_year - config.first_year) as f64;
        let neutral = (0..TAGS.len()).map(|t| (0..NEUTRAL_PER_TAG).map(|i| word(rng, t, i)).collect()).collect();
        let variants = (0..TAGS.len())
            .map(|t| {
                (0..VARIANTS_PER_TAG)
                    .map(|i| {
                        let modern = word(rng, t, 100 + i);
                        let archaic = format!("{modern}h");
                        let transition = config.first_year as f64 + span * rng.random::<f64>();
                        (archaic, modern, transition)
                    })
                    .collect()
            })
            .collect();
        Lexicon { neutral, variants }
    }

    fn token(&self, tag: usize, year: f64, rate: f64, rng: &mut ChaCha8Rng) -> AnnotatedToken {
        let pos = TAGS[tag];
        if rng.random::<f64>() < rate {
            let list = &self.variants[tag];
            let (archaic, modern, transition) = &list[rng.random_range(0..list.len() as u64) as usize];
            let p_archaic = 1.0 / (1.0 + ((year - transition) / 20.0).exp());
            let form = if rng.random::<f64>() < p_archaic { archaic } else { modern };
            return AnnotatedToken::new(form.clone(), pos, modern.clone());
        }
        // mildly skewed choice among neutral words
        let list = &self.neutral[tag];
        let u: f64 = rng.random();
        let i = ((u * u) * list.len() as f64) as usize;
        let w = &list[i.min(list.len() - 1)];
        AnnotatedToken::new(w.clone(), pos, w.clone())
    }
}

fn tag(name: &str) -> usize {
    TAGS.iter().position(|t| *t == name).expect("known tag")
}

/// Phrase templates and their weights at normalized time `t` in [0, 1].
fn templates(t: f64, drift: f64) -> Vec<(f64, Vec<usize>)> {
    let seq = |s: &str| s.split(' ').map(tag).collect::<Vec<_>>();
    // a bump of height `amp` centred on `at`, so classes in the middle of
    // the range also get a profile of their own
    let bump = |base: f64, amp: f64, at: f64| base + drift * amp * (-((t - at) / 0.3).powi(2)).exp();
    let proclisis = (0.5 - 0.9 * drift * (t - 0.5)).clamp(0.02, 0.98);
    let pairing =
        (0.5 + 0.45 * drift * (2.0 * std::f64::consts::PI * t).sin() - 0.25 * drift * (t - 0.5)).clamp(0.02, 0.98);
    vec![
        (1.0, seq("DET NOM")),
        (bump(0.2, 0.9, 1.0), seq("DET NOM ADJ")),
        (1.2 * proclisis, seq("PRON V")),
        (1.2 * (1.0 - proclisis), seq("V PRON")),
        (0.8 * pairing, seq("ADV V NOM")),
        (0.8 * pairing, seq("PRP V ADJ")),
        (0.8 * (1.0 - pairing), seq("ADV V ADJ")),
        (0.8 * (1.0 - pairing), seq("PRP V NOM")),
        (bump(0.1, 0.4, 1.0), seq("V V V")),
        (bump(0.3, 0.7, 0.5), seq("PRP DET NOM")),
        (bump(0.15, 0.6, 0.0), seq("CONJ")),
        (bump(0.15, 0.6, 0.3), seq("ADV")),
        (bump(0.1, 0.5, 0.7), seq("CONJ PRON")),
    ]
}

fn pick<'a>(weighted: &'a [(f64, Vec<usize>)], rng: &mut ChaCha8Rng) -> &'a [usize] {
    let total: f64 = weighted.iter().map(|w| w.0).sum();
    let mut u = rng.random::<f64>() * total;
    for (w, seq) in weighted {
        if u < *w {
            return seq;
        }
        u -= w;
    }
    &weighted[weighted.len() - 1].1
}

fn sentence(lex: &Lexicon, year: i32, config: &SynthConfig, rng: &mut ChaCha8Rng) -> Sentence {
    let span = (config.last_year - config.first_year).max(1) as f64;
    let t = (year - config.first_year) as f64 / span;
    let table = templates(t, config.syntax_drift);
    // 2..=13 phrases of ~2.3 tags each, then the full stop
    let phrases = 2 + rng.random_range(0..6u64) as usize + rng.random_range(0..7u64) as usize;
    let mut tokens = Vec::new();
    for _ in 0..phrases {
        for &tg in pick(&table, rng) {
            tokens.push(lex.token(tg, year as f64, config.variant_rate, rng));
        }
    }
    tokens.push(AnnotatedToken::new(".", "SENT", "."));
    Sentence::new(tokens).expect("non-empty")
}

/// Generates `documents` dated documents spread evenly over the year range.
pub fn generate_corpus(config: &SynthConfig) -> Result<Vec<SourceDocument>> {
    if config.documents == 0 || config.sentences_per_doc == 0 || config.last_year <= config.first_year {
        return Err(Error::Config("synthetic corpus needs documents, sentences and a year range".into()));
    }
    if config.first_year <= 0 {
        return Err(Error::Config("years must be positive".into()));
    }
    let mut lex_rng = stream_rng(config.seed, Component::Synthetic, u64::MAX);
    let lexicon = Lexicon::new(config, &mut lex_rng);
    let span = (config.last_year - config.first_year + 1) as f64;

    Ok((0..config.documents)
        .map(|d| {
            let mut rng = stream_rng(config.seed, Component::Synthetic, d as u64);
            let lo = config.first_year as f64 + span * d as f64 / config.documents as f64;
            let width = span / config.documents as f64;
            let year = (lo + width * rng.random::<f64>()).floor() as i32;
            let year = year.clamp(config.first_year, config.last_year);
            let sentences = (0..config.sentences_per_doc).map(|_| sentence(&lexicon, year, config, &mut rng)).collect();
            SourceDocument { id: format!("synth{d:04}"), year, sentences }
        })
        .collect())
}

/// Writes `<id>.vrt` files and a `manifest.csv` (`id,year,path`) into `dir`.
pub fn write_corpus(dir: &Path, docs: &[SourceDocument]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = dir.join("manifest.csv");
    let mut writer = csv::Writer::from_path(&manifest)?;
    writer.write_record(["id", "year", "path"])?;
    for doc in docs {
        let name = format!("{}.vrt", doc.id);
        let path = dir.join(&name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        write_vertical(&mut out, &doc.sentences).and_then(|_| out.flush()).map_err(|e| Error::io(&path, e))?;
        writer.write_record([doc.id.as_str(), &doc.year.to_string(), &name])?;
    }
    writer.flush().map_err(|e| Error::io(&manifest, e))?;
    Ok(())
}
