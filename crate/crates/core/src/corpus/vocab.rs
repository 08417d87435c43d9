use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::CorpusBin;
use crate::error::{Error, Result};

/// Word/id map with absolute counts against a bin's total token count.
///
/// Ids are dense and ordered by descending count, ties broken
/// lexicographically, so that Huffman trees built from two equal
/// vocabularies are identical.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Builds a vocabulary from `(word, count)` pairs, assigning ids by
    /// descending count and then by word.
    pub fn from_counts<I>(counts: I, total_tokens: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut entries: Vec<(String, u64)> = counts.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut index = HashMap::with_capacity(entries.len());
        for (id, (word, count)) in entries.iter().enumerate() {
            if *count == 0 {
                return Err(Error::data(format!("word {word:?} has zero count")));
            }
            if index.insert(word.clone(), id as u32).is_some() {
                return Err(Error::data(format!("duplicate word {word:?}")));
            }
        }
        let (words, counts) = entries.into_iter().unzip();
        Ok(Vocabulary {
            words,
            counts,
            index,
            total_tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count_of(&self, word: &str) -> Option<u64> {
        self.id(word).map(|id| self.count(id))
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Frequency per million tokens of the source bin.
    pub fn rel_freq(&self, id: u32) -> f64 {
        self.count(id) as f64 / self.total_tokens as f64 * 1e6
    }

    pub fn rel_freq_of(&self, word: &str) -> Option<f64> {
        self.id(word).map(|id| self.rel_freq(id))
    }

    /// Writes `word<TAB>id<TAB>count<TAB>rel_freq_per_million`, sorted by id.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for id in 0..self.len() as u32 {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                self.word(id),
                id,
                self.count(id),
                self.rel_freq(id)
            )?;
        }
        Ok(())
    }

    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, |w| self.write_tsv(w))
    }

    /// Reads a vocabulary TSV. The total token count is recovered from the
    /// relative frequency column.
    pub fn load_tsv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut counts = Vec::new();
        let mut total = None;
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Format(format!("{}:{}: malformed vocabulary row", path.display(), lineno + 1));
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 || fields[1].parse::<usize>().ok() != Some(counts.len()) {
                return Err(bad());
            }
            let count: u64 = fields[2].parse().map_err(|_| bad())?;
            let rel: f64 = fields[3].parse().map_err(|_| bad())?;
            if total.is_none() && rel > 0.0 {
                total = Some((count as f64 / rel * 1e6).round() as u64);
            }
            counts.push((fields[0].to_owned(), count));
        }
        let total = total.unwrap_or(0);
        let vocab = Vocabulary::from_counts(counts.clone(), total)?;
        if vocab.words().iter().zip(&counts).any(|(w, (c, _))| w != c) {
            return Err(Error::Format(format!("{}: rows are not in id order", path.display())));
        }
        Ok(vocab)
    }
}

/// Counts the tokens of a bin, keeping words seen at least `min_count`
/// times. Relative frequencies use the unfiltered token total.
pub fn build_vocab(bin: CorpusBin<'_>, min_count: u64) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::Param("min_count must be at least 1".into()));
    }
    if bin.token_count == 0 {
        return Err(Error::data(format!("bin {} is empty", bin.label())));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for tok in bin.tokens() {
        *counts.entry(tok).or_default() += 1;
    }
    Vocabulary::from_counts(
        counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .map(|(w, c)| (w.to_owned(), c)),
        bin.token_count,
    )
}

/// Words present in `reference` and in every vocabulary of `others`.
///
/// The result carries the reference counts and token total; counts in the
/// other sources stay available from those vocabularies. Ids are assigned
/// by descending reference count, ties lexicographic.
pub fn intersect_vocabs(reference: &Vocabulary, others: &[&Vocabulary]) -> Result<Vocabulary> {
    if others.is_empty() {
        return Err(Error::Param("intersection needs at least one other vocabulary".into()));
    }
    let shared = reference
        .words()
        .iter()
        .zip(reference.counts())
        .filter(|(w, _)| others.iter().all(|o| o.contains(w)))
        .map(|(w, &c)| (w.clone(), c));
    let vocab = Vocabulary::from_counts(shared, reference.total_tokens())?;
    if vocab.is_empty() {
        return Err(Error::data("vocabulary intersection is empty"));
    }
    Ok(vocab)
}
