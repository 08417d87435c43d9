//! Per-word shift scores between two chained models, frequency-based
//! candidate selection, and region labels against human shift indices.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use crate::corpus::Vocabulary;
use crate::embedding::{cosine_distance, EmbeddingModel};
use crate::error::{Error, Result};

/// Additive smoothing, in occurrences per million, applied to both relative
/// frequencies before taking their log ratio.
pub const FREQ_SMOOTHING: f64 = 1.0;

/// `ln((t2 + ε) / (t1 + ε))` with ε = [`FREQ_SMOOTHING`].
pub fn log_ratio(rel_freq_t1: f64, rel_freq_t2: f64) -> f64 {
    ((rel_freq_t2 + FREQ_SMOOTHING) / (rel_freq_t1 + FREQ_SMOOTHING)).ln()
}

/// Frequency change of a word between two bins.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqDelta {
    pub word: String,
    pub count_t1: u64,
    pub count_t2: u64,
    pub rel_freq_t1: f64,
    pub rel_freq_t2: f64,
    pub log_ratio: f64,
    /// Log ratio standardized over the candidate population.
    pub z: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    /// High shift index and high cosine distance.
    TruePositive,
    /// No annotator saw shift, yet the cosine distance is high.
    FalsePositive,
    /// Annotators saw shift, yet the cosine distance is low.
    FalseNegative,
    Unflagged,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::TruePositive => "true_positive",
            Region::FalsePositive => "false_positive_region",
            Region::FalseNegative => "false_negative_region",
            Region::Unflagged => "unflagged",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true_positive" => Ok(Region::TruePositive),
            "false_positive_region" => Ok(Region::FalsePositive),
            "false_negative_region" => Ok(Region::FalseNegative),
            "unflagged" => Ok(Region::Unflagged),
            other => Err(Error::Format(format!("unknown region {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftRecord {
    pub word: String,
    pub cosine: f64,
    pub variability: Option<f64>,
    pub freq_t1: u64,
    pub freq_t2: u64,
    pub z: Option<f64>,
    pub region: Region,
}

fn check_compatible(a: &EmbeddingModel, b: &EmbeddingModel) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::data(format!(
            "models have different dimensions ({} and {})",
            a.dim(),
            b.dim()
        )));
    }
    if !a.chain_compatible(b) {
        return Err(Error::data(
            "models do not share a hierarchical-softmax tree; train the later one with init_from",
        ));
    }
    Ok(())
}

fn score_unchecked(a: &EmbeddingModel, b: &EmbeddingModel, word: &str) -> Result<f64> {
    let missing = |label: &str| Error::data(format!("word {word:?} is missing from the {label} model"));
    let u = a.vector(word).ok_or_else(|| missing("first"))?;
    let v = b.vector(word).ok_or_else(|| missing("second"))?;
    cosine_distance(u, v)
}

/// Cosine distance between a word's input vectors in two chained models.
pub fn shift_score(model_t1: &EmbeddingModel, model_t2: &EmbeddingModel, word: &str) -> Result<f64> {
    check_compatible(model_t1, model_t2)?;
    score_unchecked(model_t1, model_t2, word)
}

/// Scores `words` and sorts by cosine distance, largest first; equal scores
/// are ordered by word. Frequencies come from the two models' vocabularies.
pub fn rank_shifts<S: AsRef<str>>(
    model_t1: &EmbeddingModel,
    model_t2: &EmbeddingModel,
    words: &[S],
) -> Result<Vec<ShiftRecord>> {
    check_compatible(model_t1, model_t2)?;
    let mut records = words
        .iter()
        .map(|w| {
            let word = w.as_ref();
            Ok(ShiftRecord {
                word: word.to_owned(),
                cosine: score_unchecked(model_t1, model_t2, word)?,
                variability: None,
                freq_t1: model_t1.vocab().count_of(word).unwrap_or(0),
                freq_t2: model_t2.vocab().count_of(word).unwrap_or(0),
                z: None,
                region: Region::Unflagged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| b.cosine.total_cmp(&a.cosine).then_with(|| a.word.cmp(&b.word)));
    Ok(records)
}

/// Replaces record frequencies with counts from per-bin vocabularies.
pub fn attach_frequencies(records: &mut [ShiftRecord], vocab_t1: &Vocabulary, vocab_t2: &Vocabulary) {
    for r in records {
        r.freq_t1 = vocab_t1.count_of(&r.word).unwrap_or(0);
        r.freq_t2 = vocab_t2.count_of(&r.word).unwrap_or(0);
    }
}

/// Candidate selection settings.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CandidateFilter {
    /// Minimum z-score of the log frequency ratio.
    pub z_threshold: f64,
    /// Inclusive bounds on the absolute count in the later bin.
    pub min_abs: u64,
    pub max_abs: u64,
}

impl Default for CandidateFilter {
    fn default() -> Self {
        CandidateFilter {
            z_threshold: 2.0,
            min_abs: 50,
            max_abs: 500,
        }
    }
}

/// Frequency statistics for the candidate population: content words found
/// in both bins whose later-bin count lies in `[min_abs, max_abs]`. The
/// z-score standardizes the log ratio by the population mean and population
/// standard deviation. Sorted by z, largest first.
pub fn frequency_deltas(
    vocab_t1: &Vocabulary,
    vocab_t2: &Vocabulary,
    content_words: &HashSet<String>,
    filter: &CandidateFilter,
) -> Result<Vec<FreqDelta>> {
    if content_words.is_empty() {
        return Err(Error::Param("content-word list is empty".into()));
    }
    let mut population: Vec<FreqDelta> = vocab_t2
        .words()
        .iter()
        .filter(|w| content_words.contains(*w))
        .filter_map(|w| {
            let count_t2 = vocab_t2.count_of(w)?;
            let count_t1 = vocab_t1.count_of(w)?;
            if count_t2 < filter.min_abs || count_t2 > filter.max_abs {
                return None;
            }
            let rel_freq_t1 = vocab_t1.rel_freq_of(w)?;
            let rel_freq_t2 = vocab_t2.rel_freq_of(w)?;
            Some(FreqDelta {
                word: w.clone(),
                count_t1,
                count_t2,
                rel_freq_t1,
                rel_freq_t2,
                log_ratio: log_ratio(rel_freq_t1, rel_freq_t2),
                z: 0.0,
            })
        })
        .collect();
    if population.len() < 2 {
        return Err(Error::data(format!(
            "candidate population has {} word(s); at least 2 are needed for a standard deviation",
            population.len()
        )));
    }
    let n = population.len() as f64;
    let mean = population.iter().map(|d| d.log_ratio).sum::<f64>() / n;
    let var = population.iter().map(|d| (d.log_ratio - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(Error::numeric("log frequency ratios have zero variance"));
    }
    for d in &mut population {
        d.z = (d.log_ratio - mean) / sd;
    }
    population.sort_by(|a, b| b.z.total_cmp(&a.z).then_with(|| a.word.cmp(&b.word)));
    Ok(population)
}

/// Content words whose relative frequency rose by at least
/// `filter.z_threshold` standard deviations above the population mean.
pub fn candidate_words(
    vocab_t1: &Vocabulary,
    vocab_t2: &Vocabulary,
    content_words: &HashSet<String>,
    filter: &CandidateFilter,
) -> Result<Vec<FreqDelta>> {
    let mut deltas = frequency_deltas(vocab_t1, vocab_t2, content_words, filter)?;
    deltas.retain(|d| d.z >= filter.z_threshold);
    Ok(deltas)
}

/// Thresholds delimiting the regions of the shift-index/cosine plane.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionThresholds {
    pub index_hi: f64,
    pub cos_hi: f64,
}

impl Default for RegionThresholds {
    fn default() -> Self {
        RegionThresholds {
            index_hi: 0.5,
            cos_hi: 0.25,
        }
    }
}

pub fn classify(index: f64, cosine: f64, t: &RegionThresholds) -> Region {
    if index > t.index_hi {
        if cosine < t.cos_hi {
            Region::FalseNegative
        } else {
            Region::TruePositive
        }
    } else if index == 0.0 && cosine > t.cos_hi {
        Region::FalsePositive
    } else {
        Region::Unflagged
    }
}

/// Labels every record by its shift index and cosine distance.
pub fn classify_regions(
    records: &[ShiftRecord],
    shift_index: &HashMap<String, f64>,
    thresholds: &RegionThresholds,
) -> Result<Vec<ShiftRecord>> {
    records
        .iter()
        .map(|r| {
            let index = shift_index
                .get(&r.word)
                .ok_or_else(|| Error::data(format!("no shift index for word {:?}", r.word)))?;
            Ok(ShiftRecord {
                region: classify(*index, r.cosine, thresholds),
                ..r.clone()
            })
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_owned(), |v| v.to_string())
}

fn parse_opt(s: &str) -> Option<Option<f64>> {
    if s == "NA" {
        Some(None)
    } else {
        s.parse().ok().map(Some)
    }
}

pub const RECORD_HEADER: &str = "word\tcosine\tvariability\tfreq_t1\tfreq_t2\tz\tregion";

/// Writes `word, cosine, variability, freq_t1, freq_t2, z, region` rows;
/// missing values are written as `NA`.
pub fn write_records_tsv<W: Write>(records: &[ShiftRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.word,
            r.cosine,
            opt(r.variability),
            r.freq_t1,
            r.freq_t2,
            opt(r.z),
            r.region
        )?;
    }
    Ok(())
}

pub fn read_records_tsv(path: &Path) -> Result<Vec<ShiftRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(h)) if h == RECORD_HEADER => {}
        Some(Err(e)) => return Err(Error::io(path, e)),
        _ => return Err(Error::Format(format!("{}: missing shift TSV header", path.display()))),
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Format(format!("{}:{}: malformed shift row", path.display(), i + 2));
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(bad());
        }
        records.push(ShiftRecord {
            word: f[0].to_owned(),
            cosine: f[1].parse().map_err(|_| bad())?,
            variability: parse_opt(f[2]).ok_or_else(bad)?,
            freq_t1: f[3].parse().map_err(|_| bad())?,
            freq_t2: f[4].parse().map_err(|_| bad())?,
            z: parse_opt(f[5]).ok_or_else(bad)?,
            region: f[6].parse()?,
        });
    }
    Ok(records)
}

/// Writes `word, x, y` rows for plotting.
pub fn write_scatter_tsv<W: Write>(
    rows: &[(String, f64, f64)],
    x_name: &str,
    y_name: &str,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "word\t{x_name}\t{y_name}")?;
    for (word, x, y) in rows {
        writeln!(w, "{word}\t{x}\t{y}")?;
    }
    Ok(())
}
