//! Vertical-format corpus ingestion and time binning.
//!
//! A vertical file carries one token per line as `form<TAB>pos<TAB>lemma`.
//! Sentences end at a token whose tag equals the boundary tag (`SENT` by
//! default) or at a blank line. Documents are listed in a CSV manifest with
//! the header `id,year,path`.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BOUNDARY_TAG: &str = "SENT";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AnnotatedToken {
    pub form: String,
    pub pos: String,
    pub lemma: String,
}

impl AnnotatedToken {
    pub fn new(form: impl Into<String>, pos: impl Into<String>, lemma: impl Into<String>) -> Self {
        AnnotatedToken { form: form.into(), pos: pos.into(), lemma: lemma.into() }
    }
}

/// A non-empty run of tokens. Cloning is cheap: the tokens are shared.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Arc<[AnnotatedToken]>,
}

impl Sentence {
    /// Returns `None` for an empty token list.
    pub fn new(tokens: Vec<AnnotatedToken>) -> Option<Self> {
        if tokens.is_empty() {
            None
        } else {
            Some(Sentence { tokens: tokens.into() })
        }
    }

    pub fn tokens(&self) -> &[AnnotatedToken] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Anything that can be featurized: an ordered list of sentences.
pub trait Document {
    fn sentences(&self) -> &[Sentence];

    fn token_count(&self) -> usize {
        self.sentences().iter().map(Sentence::len).sum()
    }
}

impl Document for [Sentence] {
    fn sentences(&self) -> &[Sentence] {
        self
    }
}

impl Document for Vec<Sentence> {
    fn sentences(&self) -> &[Sentence] {
        self
    }
}

impl<D: Document + ?Sized> Document for &D {
    fn sentences(&self) -> &[Sentence] {
        (**self).sentences()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceDocument {
    pub id: String,
    pub year: i32,
    pub sentences: Vec<Sentence>,
}

impl Document for SourceDocument {
    fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }
}

#[derive(Clone, Debug)]
pub struct ParseOptions {
    pub boundary_tag: String,
    /// Skip SGML-style markup lines (`<text id=..>`, `<s>`) instead of
    /// rejecting them; `</s>` then also closes a sentence.
    pub skip_markup: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { boundary_tag: DEFAULT_BOUNDARY_TAG.to_string(), skip_markup: false }
    }
}

/// Parses vertical text with the default options.
pub fn parse_vertical(input: &str) -> Result<Vec<Sentence>> {
    parse_vertical_from(input.as_bytes(), &ParseOptions::default())
}

pub fn parse_vertical_from<R: BufRead>(reader: R, options: &ParseOptions) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut current: Vec<AnnotatedToken> = Vec::new();

    let mut flush = |current: &mut Vec<AnnotatedToken>| {
        if let Some(s) = Sentence::new(std::mem::take(current)) {
            sentences.push(s);
        }
    };

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);

        if line.trim().is_empty() {
            flush(&mut current);
            continue;
        }
        if options.skip_markup && is_markup(line) {
            if line.trim() == "</s>" {
                flush(&mut current);
            }
            continue;
        }

        let mut fields = line.split('\t');
        let form = fields.next().unwrap_or_default();
        let pos = fields.next().ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected at least 2 tab-separated fields, got {line:?}"),
        })?;
        let lemma = fields.next().unwrap_or_default();
        if form.is_empty() || pos.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "token form and POS tag must be non-empty".to_string(),
            });
        }

        let is_boundary = pos == options.boundary_tag;
        current.push(AnnotatedToken::new(form, pos, lemma));
        if is_boundary {
            flush(&mut current);
        }
    }
    flush(&mut current);
    Ok(sentences)
}

fn is_markup(line: &str) -> bool {
    let t = line.trim();
    t.starts_with('<') && t.ends_with('>') && !t.contains('\t')
}

/// Writes sentences in vertical format, one blank line after each sentence.
pub fn write_vertical<W: Write>(mut out: W, sentences: &[Sentence]) -> io::Result<()> {
    for sentence in sentences {
        for t in sentence.tokens() {
            writeln!(out, "{}\t{}\t{}", t.form, t.pos, t.lemma)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_vertical_file(path: &Path, options: &ParseOptions) -> Result<Vec<Sentence>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_vertical_from(BufReader::new(file), options).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        other => other,
    })
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    id: String,
    year: String,
    path: String,
}

/// Loads every document listed in `manifest`, resolving relative paths
/// against `data_dir`. Output order follows the manifest.
pub fn load_corpus(manifest: &Path, data_dir: &Path) -> Result<Vec<SourceDocument>> {
    load_corpus_with(manifest, data_dir, &ParseOptions::default())
}

pub fn load_corpus_with(manifest: &Path, data_dir: &Path, options: &ParseOptions) -> Result<Vec<SourceDocument>> {
    let file = File::open(manifest).map_err(|e| Error::io(manifest, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.deserialize::<ManifestRow>().enumerate() {
        let row_no = i + 1;
        let row = record.map_err(|e| Error::Load { row: row_no, message: e.to_string() })?;
        let year: i32 = row.year.parse().map_err(|_| Error::Load {
            row: row_no,
            message: format!("document {:?}: unparsable year {:?}", row.id, row.year),
        })?;
        if year <= 0 {
            return Err(Error::Load {
                row: row_no,
                message: format!("document {:?}: year must be positive, got {year}", row.id),
            });
        }
        if !seen.insert(row.id.clone()) {
            return Err(Error::Load { row: row_no, message: format!("duplicate document id {:?}", row.id) });
        }
        rows.push((row_no, row.id, year, data_dir.join(&row.path)));
    }

    rows.into_par_iter()
        .map(|(row_no, id, year, path)| {
            if !path.is_file() {
                return Err(Error::Load {
                    row: row_no,
                    message: format!("document {id:?}: file not found: {}", path.display()),
                });
            }
            let sentences = read_vertical_file(&path, options)
                .map_err(|e| Error::Load { row: row_no, message: format!("document {id:?}: {e}") })?;
            if sentences.is_empty() {
                return Err(Error::Load {
                    row: row_no,
                    message: format!("document {id:?}: no sentences in {}", path.display()),
                });
            }
            Ok(SourceDocument { id, year, sentences })
        })
        .collect()
}

/// How years are partitioned, before a concrete range is chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "scheme")]
pub enum BinScheme {
    Century,
    FixedWidth { width: u32, origin: i32 },
    Custom,
}

/// A partition of a contiguous year range into consecutive inclusive bins.
/// Bin 0 is the earliest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeBinning {
    pub scheme: BinScheme,
    starts: Vec<i32>,
    last_year: i32,
    labels: Vec<String>,
}

impl TimeBinning {
    /// Centuries `first..=last`, century `c` covering `[100(c-1)+1, 100c]`.
    pub fn centuries(first: u32, last: u32) -> Result<Self> {
        if first == 0 || last < first {
            return Err(Error::Binning(format!("invalid century range {first}..={last}")));
        }
        let starts = (first..=last).map(|c| 100 * (c as i32 - 1) + 1).collect();
        let labels = (first..=last).map(ordinal).collect();
        Ok(TimeBinning { scheme: BinScheme::Century, starts, last_year: 100 * last as i32, labels })
    }

    /// `count` bins of `width` years, the first starting at `origin`.
    pub fn fixed_width(width: u32, origin: i32, count: usize) -> Result<Self> {
        if width == 0 || count == 0 || origin <= 0 {
            return Err(Error::Binning(format!(
                "fixed-width binning needs positive width, origin and count (got {width}, {origin}, {count})"
            )));
        }
        let w = width as i32;
        let starts: Vec<i32> = (0..count as i32).map(|i| origin + i * w).collect();
        let labels = starts.iter().map(|s| format!("{}-{}", s, s + w - 1)).collect();
        Ok(TimeBinning {
            scheme: BinScheme::FixedWidth { width, origin },
            last_year: origin + count as i32 * w - 1,
            starts,
            labels,
        })
    }

    /// Bins `[edges[i], edges[i+1] - 1]`; needs at least two strictly
    /// ascending edges.
    pub fn custom(edges: &[i32]) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) || edges[0] <= 0 {
            return Err(Error::Binning(format!(
                "custom edges must be >= 2 positive, strictly ascending years, got {edges:?}"
            )));
        }
        let starts = edges[..edges.len() - 1].to_vec();
        let labels = edges.windows(2).map(|w| format!("{}-{}", w[0], w[1] - 1)).collect();
        Ok(TimeBinning { scheme: BinScheme::Custom, starts, last_year: edges[edges.len() - 1] - 1, labels })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.starts.len() {
            return Err(Error::Binning(format!("{} labels given for {} bins", labels.len(), self.starts.len())));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, class: usize) -> &str {
        &self.labels[class]
    }

    /// Inclusive year range of bin `class`.
    pub fn bounds(&self, class: usize) -> (i32, i32) {
        let end = self.starts.get(class + 1).map_or(self.last_year, |next| next - 1);
        (self.starts[class], end)
    }

    pub fn first_year(&self) -> i32 {
        self.starts[0]
    }

    pub fn last_year(&self) -> i32 {
        self.last_year
    }

    pub fn assign_class(&self, year: i32) -> Result<usize> {
        if year < self.first_year() || year > self.last_year {
            return Err(Error::YearOutOfRange { year, first: self.first_year(), last: self.last_year });
        }
        Ok(self.starts.partition_point(|&s| s <= year) - 1)
    }
}

pub fn assign_class(year: i32, binning: &TimeBinning) -> Result<usize> {
    binning.assign_class(year)
}

fn ordinal(n: u32) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

/// A binning request that still needs the corpus year range to become a
/// [`TimeBinning`]. Parses `century`, `years:N`, `years:N@ORIGIN` and
/// `edges:Y0,Y1,...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinningSpec {
    Century,
    Years { width: u32, origin: Option<i32> },
    Edges(Vec<i32>),
}

impl BinningSpec {
    /// Picks the smallest range of the requested shape covering all `years`.
    /// Fixed-width bins default to an origin at the start of the earliest
    /// year's century (e.g. 1501).
    pub fn resolve(&self, years: impl IntoIterator<Item = i32>) -> Result<TimeBinning> {
        let (mut min, mut max) = (i32::MAX, i32::MIN);
        for y in years {
            min = min.min(y);
            max = max.max(y);
        }
        let century_of = |y: i32| ((y - 1) / 100 + 1) as u32;
        match self {
            BinningSpec::Edges(edges) => TimeBinning::custom(edges),
            _ if min > max => Err(Error::Binning("cannot resolve a binning without any years".into())),
            _ if min <= 0 => Err(Error::Binning(format!("year {min} is not positive"))),
            BinningSpec::Century => TimeBinning::centuries(century_of(min), century_of(max)),
            BinningSpec::Years { width, origin } => {
                let origin = origin.unwrap_or(100 * (century_of(min) as i32 - 1) + 1);
                if *width == 0 {
                    return Err(Error::Binning("bin width must be positive".into()));
                }
                if min < origin {
                    return Err(Error::Binning(format!("year {min} precedes origin {origin}")));
                }
                let span = (max - origin + 1) as u32;
                let count = span.div_ceil(*width) as usize;
                TimeBinning::fixed_width(*width, origin, count)
            }
        }
    }
}

impl FromStr for BinningSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Binning(format!("cannot parse binning {s:?}; expected century, years:N[@ORIGIN] or edges:Y0,Y1,..."))
        };
        let s = s.trim();
        if s == "century" {
            return Ok(BinningSpec::Century);
        }
        if let Some(rest) = s.strip_prefix("years:") {
            let (w, origin) = match rest.split_once('@') {
                Some((w, o)) => (w, Some(o.trim().parse().map_err(|_| bad())?)),
                None => (rest, None),
            };
            let width = w.trim().parse().map_err(|_| bad())?;
            return Ok(BinningSpec::Years { width, origin });
        }
        if let Some(rest) = s.strip_prefix("edges:") {
            let edges = rest
                .split(',')
                .map(|e| e.trim().parse::<i32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad())?;
            return Ok(BinningSpec::Edges(edges));
        }
        Err(bad())
    }
}

impl fmt::Display for BinningSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinningSpec::Century => write!(f, "century"),
            BinningSpec::Years { width, origin: None } => write!(f, "years:{width}"),
            BinningSpec::Years { width, origin: Some(o) } => write!(f, "years:{width}@{o}"),
            BinningSpec::Edges(e) => {
                let e: Vec<String> = e.iter().map(i32::to_string).collect();
                write!(f, "edges:{}", e.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PooledSentence {
    pub sentence: Sentence,
    pub source: Arc<str>,
}

/// Sentences grouped by time-period class, in (document, sentence) order.
#[derive(Clone, Debug)]
pub struct LabeledPool {
    pub labels: Vec<String>,
    pub classes: Vec<Vec<PooledSentence>>,
}

impl LabeledPool {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_tokens(&self, class: usize) -> usize {
        self.classes[class].iter().map(|p| p.sentence.len()).sum()
    }
}

pub fn pool_by_class(docs: &[SourceDocument], binning: &TimeBinning) -> Result<LabeledPool> {
    let mut classes = vec![Vec::new(); binning.len()];
    for doc in docs {
        let class = binning.assign_class(doc.year)?;
        let source: Arc<str> = Arc::from(doc.id.as_str());
        classes[class]
            .extend(doc.sentences.iter().map(|s| PooledSentence { sentence: s.clone(), source: Arc::clone(&source) }));
    }
    Ok(LabeledPool { labels: binning.labels().to_vec(), classes })
}
