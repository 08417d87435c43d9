use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde_json::Value;

use super::{tokenize, TimeBin, TimeBinnedCorpus};
use crate::error::{Error, Result};

/// Field names to read from each JSONL record.
#[derive(Clone, Debug)]
pub struct JsonlFields {
    pub text: String,
    pub time: String,
}

impl Default for JsonlFields {
    fn default() -> Self {
        JsonlFields {
            text: "body".to_owned(),
            time: "created_utc".to_owned(),
        }
    }
}

/// Record counters collected while ingesting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub records: u64,
    pub kept: u64,
    /// Timestamp outside every bin.
    pub out_of_range: u64,
    pub malformed: u64,
    pub missing_field: u64,
}

impl IngestStats {
    fn add(&mut self, other: &IngestStats) {
        self.records += other.records;
        self.kept += other.kept;
        self.out_of_range += other.out_of_range;
        self.malformed += other.malformed;
        self.missing_field += other.missing_field;
    }
}

// Reddit dumps store created_utc as an integer, a float, or a numeric string
// depending on the vintage.
fn epoch_of(value: &Value) -> Option<i64> {
    match value {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().map(|f| f as i64)),
        Value::String(s) => s
            .trim()
            .parse::<i64>()
            .ok()
            .or_else(|| s.trim().parse::<f64>().ok().map(|f| f as i64)),
        _ => None,
    }
}

/// Reads one JSON object per line and assigns each record to the bin
/// containing its timestamp.
///
/// Malformed lines, records lacking either field, and records outside all
/// bins are skipped and counted; none of them is fatal.
pub fn ingest_jsonl(
    path: &Path,
    fields: &JsonlFields,
    bins: &[TimeBin],
) -> Result<(TimeBinnedCorpus, IngestStats)> {
    let mut corpus = TimeBinnedCorpus::new(bins.to_vec())?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut stats = IngestStats::default();

    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        stats.records += 1;
        let record: Value = match serde_json::from_str(&line) {
            Ok(v @ Value::Object(_)) => v,
            _ => {
                stats.malformed += 1;
                warn!("{}:{}: skipping malformed record", path.display(), lineno + 1);
                continue;
            }
        };
        let text = record.get(&fields.text).and_then(Value::as_str);
        let epoch = record.get(&fields.time).and_then(epoch_of);
        let (Some(text), Some(epoch)) = (text, epoch) else {
            stats.missing_field += 1;
            continue;
        };
        match corpus.bin_for_epoch(epoch) {
            Some(bin) => {
                corpus.push_document(bin, tokenize(text));
                stats.kept += 1;
            }
            None => stats.out_of_range += 1,
        }
    }
    Ok((corpus, stats))
}

/// Ingests several JSONL files in parallel and merges them in input order.
pub fn ingest_jsonl_files(
    paths: &[impl AsRef<Path> + Sync],
    fields: &JsonlFields,
    bins: &[TimeBin],
) -> Result<(TimeBinnedCorpus, IngestStats)> {
    let parts = paths
        .par_iter()
        .map(|p| ingest_jsonl(p.as_ref(), fields, bins))
        .collect::<Result<Vec<_>>>()?;
    let mut corpus = TimeBinnedCorpus::new(bins.to_vec())?;
    let mut stats = IngestStats::default();
    for (part, part_stats) in parts {
        corpus.merge(part)?;
        stats.add(&part_stats);
    }
    Ok((corpus, stats))
}

/// Reads a plain UTF-8 file with one document per line into a single bin.
/// Blank lines tokenize to nothing and are dropped.
pub fn ingest_text(path: &Path, bin_label: &str) -> Result<TimeBinnedCorpus> {
    let mut corpus = TimeBinnedCorpus::new(vec![TimeBin::unbounded(bin_label)?])?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        corpus.push_document(0, tokenize(&line));
    }
    Ok(corpus)
}
