use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Sparse binary judgments of annotators about words.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JudgmentTable {
    words: Vec<String>,
    annotators: Vec<String>,
    word_ids: HashMap<String, usize>,
    annotator_ids: HashMap<String, usize>,
    /// (word, annotator) → judgment.
    judgments: BTreeMap<(usize, usize), u8>,
}

#[derive(Deserialize)]
struct Row {
    annotator: String,
    word: String,
    judgment: u8,
}

impl JudgmentTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one judgment. Repeating an identical judgment is a no-op; a
    /// contradicting one is an error.
    pub fn insert(&mut self, annotator: &str, word: &str, judgment: u8) -> Result<()> {
        if judgment > 1 {
            return Err(Error::data(format!(
                "judgment of {annotator} on {word:?} is {judgment}; expected 0 or 1"
            )));
        }
        let w = intern(&mut self.words, &mut self.word_ids, word);
        let a = intern(&mut self.annotators, &mut self.annotator_ids, annotator);
        match self.judgments.insert((w, a), judgment) {
            Some(prev) if prev != judgment => Err(Error::data(format!(
                "annotator {annotator} judged {word:?} both {prev} and {judgment}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn from_triples<'a, I>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str, u8)>,
    {
        let mut table = Self::new();
        for (a, w, j) in triples {
            table.insert(a, w, j)?;
        }
        Ok(table)
    }

    /// Parses CSV with header `annotator,word,judgment`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["annotator", "word", "judgment"] {
            return Err(Error::Format(
                "judgment CSV header must be annotator,word,judgment".into(),
            ));
        }
        let mut table = Self::new();
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Format(format!("judgment CSV: {e}")))?;
            table.insert(&row.annotator, &row.word, row.judgment)?;
        }
        Ok(table)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn annotators(&self) -> &[String] {
        &self.annotators
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    /// Judgments per word, in word order.
    pub(crate) fn units(&self) -> Vec<Vec<u8>> {
        let mut units = vec![Vec::new(); self.words.len()];
        for (&(w, _), &j) in &self.judgments {
            units[w].push(j);
        }
        units
    }

    /// A copy without the listed words.
    pub fn without_words(&self, excluded: &HashSet<String>) -> Self {
        let mut table = Self::new();
        for (&(w, a), &j) in &self.judgments {
            if !excluded.contains(&self.words[w]) {
                table
                    .insert(&self.annotators[a], &self.words[w], j)
                    .expect("judgments were already consistent");
            }
        }
        table
    }
}

fn intern(names: &mut Vec<String>, ids: &mut HashMap<String, usize>, name: &str) -> usize {
    if let Some(&id) = ids.get(name) {
        return id;
    }
    names.push(name.to_owned());
    ids.insert(name.to_owned(), names.len() - 1);
    names.len() - 1
}

/// Fraction of annotators who judged each word as shifted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShiftIndex {
    pub index: BTreeMap<String, f64>,
    pub n_judgments: BTreeMap<String, usize>,
}

impl ShiftIndex {
    pub fn get(&self, word: &str) -> Option<f64> {
        self.index.get(word).copied()
    }

    pub fn to_map(&self) -> HashMap<String, f64> {
        self.index.iter().map(|(w, &v)| (w.clone(), v)).collect()
    }
}

pub fn shift_index(table: &JudgmentTable) -> Result<ShiftIndex> {
    let mut out = ShiftIndex::default();
    for (word, unit) in table.words().iter().zip(table.units()) {
        if unit.is_empty() {
            return Err(Error::data(format!("word {word:?} has no judgments")));
        }
        let positive = unit.iter().filter(|&&j| j == 1).count();
        out.index.insert(word.clone(), positive as f64 / unit.len() as f64);
        out.n_judgments.insert(word.clone(), unit.len());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fractions() {
        let mut t = JudgmentTable::new();
        for a in 0..10 {
            t.insert(&format!("a{a}"), "half", u8::from(a < 5)).unwrap();
            t.insert(&format!("a{a}"), "all", 1).unwrap();
        }
        for (a, j) in [("x", 1), ("y", 0), ("z", 0)] {
            t.insert(a, "third", j).unwrap();
        }
        let idx = shift_index(&t).unwrap();
        assert_eq!(idx.get("half"), Some(0.5));
        assert_eq!(idx.get("all"), Some(1.0));
        assert_eq!(idx.get("third"), Some(1.0 / 3.0));
        assert_eq!(idx.n_judgments["third"], 3);
    }

    #[test]
    fn rejects_bad_judgments() {
        let mut t = JudgmentTable::new();
        assert!(t.insert("a", "w", 2).is_err());
        t.insert("a", "w", 1).unwrap();
        t.insert("a", "w", 1).unwrap();
        assert!(t.insert("a", "w", 0).is_err());
    }

    #[test]
    fn csv_input() {
        let csv = "annotator,word,judgment\nu1,f5,1\nu2,f5,0\nu1,\"vans\",1\n";
        let t = JudgmentTable::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.words(), ["f5", "vans"]);
        assert_eq!(t.len(), 3);
        assert!(JudgmentTable::read_csv("a,b,c\n".as_bytes()).is_err());
        assert!(JudgmentTable::read_csv("annotator,word,judgment\nu1,f5,x\n".as_bytes()).is_err());
    }

    #[test]
    fn exclusion_filter() {
        let t = JudgmentTable::from_triples([("a", "owls", 1), ("a", "f5", 1)]).unwrap();
        let kept = t.without_words(&["owls".to_owned()].into());
        assert_eq!(kept.words(), ["f5"]);
    }

    proptest! {
        #[test]
        fn order_of_judgments_is_irrelevant(
            triples in prop::collection::btree_map((0u8..6, 0u8..5), 0u8..2, 1..30),
            seed in any::<u64>(),
        ) {
            let rows: Vec<(String, String, u8)> = triples
                .iter()
                .map(|(&(a, w), &j)| (format!("a{a}"), format!("w{w}"), j))
                .collect();
            let mut shuffled = rows.clone();
            let k = (seed as usize) % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let build = |r: &[(String, String, u8)]| {
                JudgmentTable::from_triples(r.iter().map(|(a, w, j)| (a.as_str(), w.as_str(), *j))).unwrap()
            };
            prop_assert_eq!(shift_index(&build(&rows)).unwrap(), shift_index(&build(&shuffled)).unwrap());
        }
    }
}
