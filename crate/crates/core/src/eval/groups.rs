use std::collections::{BTreeMap, HashMap};

use super::ShiftIndex;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SdKind {
    /// Divide by n.
    #[default]
    Population,
    /// Divide by n - 1.
    Sample,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupStat {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

/// Mean and standard deviation of the shift index within each group.
/// Every labeled word must have an index.
pub fn group_stats(
    index: &ShiftIndex,
    groups: &HashMap<String, String>,
    sd_kind: SdKind,
) -> Result<BTreeMap<String, GroupStat>> {
    let mut members: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (word, label) in groups {
        let value = index
            .get(word)
            .ok_or_else(|| Error::data(format!("grouped word {word:?} has no shift index")))?;
        members.entry(label.as_str()).or_default().push(value);
    }
    members
        .into_iter()
        .map(|(label, values)| {
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            let denom = match sd_kind {
                SdKind::Population => n as f64,
                SdKind::Sample if n > 1 => (n - 1) as f64,
                SdKind::Sample => {
                    return Err(Error::data(format!(
                        "group {label}: sample SD needs at least 2 words"
                    )))
                }
            };
            Ok((label.to_owned(), GroupStat { n, mean, sd: (ss / denom).sqrt() }))
        })
        .collect()
}
