use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;

use super::{pearson, Correlation, ShiftIndex};
use crate::error::{Error, Result};
use crate::shift::{classify, Region, RegionThresholds};

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterRow {
    pub word: String,
    pub shift_index: f64,
    pub score: f64,
    pub region: Region,
}

/// Correlation of model scores with the human shift index.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub correlation: Correlation,
    /// Sorted by word.
    pub rows: Vec<ScatterRow>,
    pub thresholds: RegionThresholds,
}

/// Compares scores (usually cosine distances) against the shift index on
/// the words both cover, labeling each word's region of the plane.
pub fn evaluate(
    scores: &HashMap<String, f64>,
    index: &ShiftIndex,
    thresholds: &RegionThresholds,
) -> Result<EvalReport> {
    let mut rows: Vec<ScatterRow> = index
        .index
        .iter()
        .filter_map(|(word, &idx)| {
            scores.get(word).map(|&score| ScatterRow {
                word: word.clone(),
                shift_index: idx,
                score,
                region: classify(idx, score, thresholds),
            })
        })
        .collect();
    if rows.len() < 3 {
        return Err(Error::data(format!(
            "only {} word(s) have both a score and a shift index; need 3",
            rows.len()
        )));
    }
    rows.sort_by(|a, b| a.word.cmp(&b.word));
    let x: Vec<f64> = rows.iter().map(|r| r.shift_index).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.score).collect();
    Ok(EvalReport {
        correlation: pearson(&x, &y)?,
        rows,
        thresholds: *thresholds,
    })
}

impl EvalReport {
    pub fn region_counts(&self) -> HashMap<Region, usize> {
        let mut counts = HashMap::new();
        for r in &self.rows {
            *counts.entry(r.region).or_default() += 1;
        }
        counts
    }

    pub fn to_text(&self, score_name: &str) -> String {
        let c = &self.correlation;
        let mut out = String::new();
        let _ = writeln!(out, "words evaluated: {}", c.n);
        let _ = writeln!(out, "pearson r ({score_name} vs shift index) = {:.4}", c.r);
        let _ = writeln!(out, "p = {:.3e}", c.p);
        let counts = self.region_counts();
        let _ = writeln!(
            out,
            "regions (index > {}, {score_name} threshold {}):",
            self.thresholds.index_hi, self.thresholds.cos_hi
        );
        for region in [Region::TruePositive, Region::FalsePositive, Region::FalseNegative, Region::Unflagged] {
            let _ = writeln!(out, "  {region}: {}", counts.get(&region).copied().unwrap_or(0));
        }
        for region in [Region::FalsePositive, Region::FalseNegative] {
            let words: Vec<&str> = self
                .rows
                .iter()
                .filter(|r| r.region == region)
                .map(|r| r.word.as_str())
                .collect();
            if !words.is_empty() {
                let _ = writeln!(out, "  {region} words: {}", words.join(", "));
            }
        }
        out
    }

    /// `word, shift_index, <score_name>, region` rows.
    pub fn write_tsv<W: Write>(&self, score_name: &str, mut w: W) -> std::io::Result<()> {
        writeln!(w, "word\tshift_index\t{score_name}\tregion")?;
        for r in &self.rows {
            writeln!(w, "{}\t{}\t{}\t{}", r.word, r.shift_index, r.score, r.region)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn index(values: &[f64]) -> ShiftIndex {
        ShiftIndex {
            index: values.iter().enumerate().map(|(i, &v)| (format!("w{i}"), v)).collect(),
            n_judgments: values.iter().enumerate().map(|(i, _)| (format!("w{i}"), 10)).collect(),
        }
    }

    #[test]
    fn scores_equal_to_index() {
        let idx = index(&[0.0, 0.3, 0.5, 0.9]);
        let report = evaluate(&idx.to_map(), &idx, &RegionThresholds::default()).unwrap();
        assert!((report.correlation.r - 1.0).abs() < 1e-12);
        assert!(report.to_text("cosine").contains("r (cosine vs shift index) = 1.0000"));
    }

    #[test]
    fn negated_scores() {
        let idx = index(&[0.0, 0.3, 0.5, 0.9]);
        let scores = idx.index.iter().map(|(w, v)| (w.clone(), 1.0 - v)).collect();
        let report = evaluate(&scores, &idx, &RegionThresholds::default()).unwrap();
        assert!((report.correlation.r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_shared_words() {
        let idx = index(&[0.0, 0.3, 0.5]);
        let scores: HashMap<String, f64> = [("w0".to_owned(), 0.1), ("zz".to_owned(), 0.2)].into();
        assert!(evaluate(&scores, &idx, &RegionThresholds::default()).is_err());
    }

    #[test]
    fn regions_are_attached() {
        let idx = index(&[0.0, 0.8, 0.3, 0.9]);
        let scores: HashMap<String, f64> =
            [("w0", 0.4), ("w1", 0.1), ("w2", 0.2), ("w3", 0.5)].map(|(w, s)| (w.to_owned(), s)).into();
        let report = evaluate(&scores, &idx, &RegionThresholds::default()).unwrap();
        let regions: Vec<Region> = report.rows.iter().map(|r| r.region).collect();
        assert_eq!(
            regions,
            [Region::FalsePositive, Region::FalseNegative, Region::Unflagged, Region::TruePositive]
        );
    }
}
