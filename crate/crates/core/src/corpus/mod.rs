//! Time-binned corpora: ingestion, tokenization and vocabularies.

mod ingest;
mod tokenize;
mod vocab;

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub use ingest::{ingest_jsonl, ingest_jsonl_files, ingest_text, IngestStats, JsonlFields};
pub use tokenize::tokenize;
pub use vocab::{build_vocab, intersect_vocabs, Vocabulary};

use crate::error::{Error, Result};

/// Name of the manifest file inside a corpus directory.
pub const MANIFEST: &str = "bins.tsv";

/// A labeled, half-open time range `[start_epoch, end_epoch)` in Unix seconds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeBin {
    pub label: String,
    pub start_epoch: i64,
    pub end_epoch: i64,
}

impl TimeBin {
    pub fn new(label: impl Into<String>, start_epoch: i64, end_epoch: i64) -> Result<Self> {
        let label = label.into();
        validate_label(&label)?;
        if start_epoch >= end_epoch {
            return Err(Error::Param(format!(
                "bin {label}: start {start_epoch} must precede end {end_epoch}"
            )));
        }
        Ok(TimeBin {
            label,
            start_epoch,
            end_epoch,
        })
    }

    /// A bin without temporal bounds, used for plain-text fragments.
    pub fn unbounded(label: impl Into<String>) -> Result<Self> {
        Self::new(label, i64::MIN, i64::MAX)
    }

    pub fn contains(&self, epoch: i64) -> bool {
        self.start_epoch <= epoch && epoch < self.end_epoch
    }
}

fn validate_label(label: &str) -> Result<()> {
    let ok = !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !label.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(Error::Param(format!(
            "bin label {label:?} must be non-empty and use only [A-Za-z0-9_.-]"
        )))
    }
}

pub type Document = Vec<String>;

/// Tokenized documents partitioned into labeled time bins.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeBinnedCorpus {
    bins: Vec<TimeBin>,
    documents: Vec<Vec<Document>>,
    token_counts: Vec<u64>,
}

impl TimeBinnedCorpus {
    pub fn new(bins: Vec<TimeBin>) -> Result<Self> {
        let mut corpus = TimeBinnedCorpus::default();
        for bin in bins {
            corpus.add_bin(bin)?;
        }
        Ok(corpus)
    }

    pub fn add_bin(&mut self, bin: TimeBin) -> Result<usize> {
        if self.bin_index(&bin.label).is_some() {
            return Err(Error::Param(format!("duplicate bin label {}", bin.label)));
        }
        self.bins.push(bin);
        self.documents.push(Vec::new());
        self.token_counts.push(0);
        Ok(self.bins.len() - 1)
    }

    pub fn bins(&self) -> &[TimeBin] {
        &self.bins
    }

    pub fn bin_index(&self, label: &str) -> Option<usize> {
        self.bins.iter().position(|b| b.label == label)
    }

    /// Index of the first bin whose range contains `epoch`.
    pub fn bin_for_epoch(&self, epoch: i64) -> Option<usize> {
        self.bins.iter().position(|b| b.contains(epoch))
    }

    /// Appends a document; empty documents are ignored.
    pub fn push_document(&mut self, bin: usize, doc: Document) {
        if doc.is_empty() {
            return;
        }
        self.token_counts[bin] += doc.len() as u64;
        self.documents[bin].push(doc);
    }

    pub fn documents(&self, bin: usize) -> &[Document] {
        &self.documents[bin]
    }

    pub fn token_count(&self, bin: usize) -> u64 {
        self.token_counts[bin]
    }

    /// Borrowed view of one bin.
    pub fn bin(&self, index: usize) -> CorpusBin<'_> {
        CorpusBin {
            bin: &self.bins[index],
            documents: &self.documents[index],
            token_count: self.token_counts[index],
        }
    }

    pub fn bin_by_label(&self, label: &str) -> Result<CorpusBin<'_>> {
        self.bin_index(label)
            .map(|i| self.bin(i))
            .ok_or_else(|| Error::data(format!("corpus has no bin labeled {label:?}")))
    }

    /// Merges another corpus into this one. Bins with the same label must
    /// have identical bounds; their documents are appended.
    pub fn merge(&mut self, other: TimeBinnedCorpus) -> Result<()> {
        for (bin, docs) in other.bins.into_iter().zip(other.documents) {
            let index = match self.bin_index(&bin.label) {
                Some(i) if self.bins[i] == bin => i,
                Some(_) => {
                    return Err(Error::data(format!(
                        "bin {} appears with conflicting bounds",
                        bin.label
                    )))
                }
                None => self.add_bin(bin)?,
            };
            for doc in docs {
                self.push_document(index, doc);
            }
        }
        Ok(())
    }

    /// Writes the corpus as a directory: a `bins.tsv` manifest plus one
    /// `<label>.txt` file per bin holding one space-joined document per line.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (i, bin) in self.bins.iter().enumerate() {
            let path = dir.join(format!("{}.txt", bin.label));
            crate::io::write_atomic(&path, |w| {
                for doc in &self.documents[i] {
                    writeln!(w, "{}", doc.join(" "))?;
                }
                Ok(())
            })?;
        }
        crate::io::write_atomic(&dir.join(MANIFEST), |w| {
            writeln!(w, "label\tstart_epoch\tend_epoch\tn_documents\tn_tokens")?;
            for (i, bin) in self.bins.iter().enumerate() {
                writeln!(
                    w,
                    "{}\t{}\t{}\t{}\t{}",
                    bin.label,
                    bin.start_epoch,
                    bin.end_epoch,
                    self.documents[i].len(),
                    self.token_counts[i]
                )?;
            }
            Ok(())
        })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = dir.join(MANIFEST);
        let file = File::open(&manifest).map_err(|e| Error::io(&manifest, e))?;
        let mut corpus = TimeBinnedCorpus::default();
        let mut declared = HashMap::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate().skip(1) {
            let line = line.map_err(|e| Error::io(&manifest, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = || Error::Format(format!("{}:{}: malformed row", manifest.display(), lineno + 1));
            if fields.len() != 5 {
                return Err(bad());
            }
            let start = fields[1].parse().map_err(|_| bad())?;
            let end = fields[2].parse().map_err(|_| bad())?;
            let tokens: u64 = fields[4].parse().map_err(|_| bad())?;
            let index = corpus.add_bin(TimeBin::new(fields[0], start, end)?)?;
            declared.insert(index, tokens);
        }
        for index in 0..corpus.bins.len() {
            let path = dir.join(format!("{}.txt", corpus.bins[index].label));
            let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                let doc: Document = line.split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect();
                corpus.push_document(index, doc);
            }
            if declared[&index] != corpus.token_counts[index] {
                return Err(Error::Format(format!(
                    "{}: manifest declares {} tokens, found {}",
                    path.display(),
                    declared[&index],
                    corpus.token_counts[index]
                )));
            }
        }
        Ok(corpus)
    }
}

/// Read-only view of a single bin of a corpus.
#[derive(Clone, Copy, Debug)]
pub struct CorpusBin<'a> {
    pub bin: &'a TimeBin,
    pub documents: &'a [Document],
    pub token_count: u64,
}

impl<'a> CorpusBin<'a> {
    /// Builds a view over loose documents (mainly for tests and bindings).
    pub fn from_documents(bin: &'a TimeBin, documents: &'a [Document]) -> Self {
        let token_count = documents.iter().map(|d| d.len() as u64).sum();
        CorpusBin {
            bin,
            documents,
            token_count,
        }
    }

    pub fn label(&self) -> &str {
        &self.bin.label
    }

    pub fn tokens(&self) -> impl Iterator<Item = &'a str> {
        self.documents.iter().flatten().map(String::as_str)
    }
}
