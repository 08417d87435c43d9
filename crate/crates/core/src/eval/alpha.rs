use std::collections::BTreeMap;

use super::JudgmentTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Agreement {
    pub alpha: f64,
    /// Every pairable judgment carries the same label, so expected
    /// disagreement is zero; `alpha` is then reported as 1.
    pub degenerate: bool,
    /// Units (words) with at least two judgments.
    pub pairable_units: usize,
    /// Judgments inside those units.
    pub pairable_values: usize,
}

/// Krippendorff's alpha for nominal data with missing judgments.
///
/// Built from the coincidence matrix: each unit with `m ≥ 2` values adds
/// `1/(m-1)` for every ordered pair of its values. With `n_c` the marginal
/// of label `c` and `n` the total,
/// `α = 1 - (n - 1) Σ_{c≠k} o_ck / Σ_{c≠k} n_c n_k`.
pub fn krippendorff_alpha(table: &JudgmentTable) -> Result<Agreement> {
    alpha_from_units(&table.units())
}

pub(crate) fn alpha_from_units(units: &[Vec<u8>]) -> Result<Agreement> {
    let pairable: Vec<&Vec<u8>> = units.iter().filter(|u| u.len() >= 2).collect();
    if pairable.len() < 2 {
        return Err(Error::data(format!(
            "alpha needs at least 2 words with 2 or more judgments, found {}",
            pairable.len()
        )));
    }
    let mut coincidence: BTreeMap<(u8, u8), f64> = BTreeMap::new();
    for unit in &pairable {
        let mut label_counts: BTreeMap<u8, f64> = BTreeMap::new();
        for &v in unit.iter() {
            *label_counts.entry(v).or_default() += 1.0;
        }
        let weight = 1.0 / (unit.len() as f64 - 1.0);
        for (&c, &nc) in &label_counts {
            for (&k, &nk) in &label_counts {
                let pairs = if c == k { nc * (nc - 1.0) } else { nc * nk };
                *coincidence.entry((c, k)).or_default() += pairs * weight;
            }
        }
    }
    let mut marginals: BTreeMap<u8, f64> = BTreeMap::new();
    for (&(c, _), &o) in &coincidence {
        *marginals.entry(c).or_default() += o;
    }
    let n: f64 = marginals.values().sum();
    let observed: f64 = coincidence
        .iter()
        .filter(|((c, k), _)| c != k)
        .map(|(_, &o)| o)
        .sum();
    let expected: f64 = marginals
        .iter()
        .flat_map(|(c, nc)| marginals.iter().filter(move |(k, _)| *k != c).map(move |(_, nk)| nc * nk))
        .sum();
    let pairable_values = pairable.iter().map(|u| u.len()).sum();
    if expected == 0.0 {
        return Ok(Agreement {
            alpha: 1.0,
            degenerate: true,
            pairable_units: pairable.len(),
            pairable_values,
        });
    }
    Ok(Agreement {
        alpha: 1.0 - (n - 1.0) * observed / expected,
        degenerate: false,
        pairable_units: pairable.len(),
        pairable_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, &str, u8)]) -> JudgmentTable {
        JudgmentTable::from_triples(rows.iter().copied()).unwrap()
    }

    #[test]
    fn perfect_agreement() {
        let t = table(&[
            ("a", "w1", 1), ("b", "w1", 1),
            ("a", "w2", 0), ("b", "w2", 0),
            ("a", "w3", 1), ("b", "w3", 1),
            ("a", "w4", 0), ("b", "w4", 0),
        ]);
        let a = krippendorff_alpha(&t).unwrap();
        assert_eq!(a.alpha, 1.0);
        assert!(!a.degenerate);
    }

    #[test]
    fn hand_computed_units() {
        // o00 = o11 = 2, o01 = o10 = 1, n0 = n1 = 3, n = 6:
        // α = 1 - 5 · 2 / 18 = 4/9.
        let t = table(&[
            ("a", "w1", 1), ("b", "w1", 1),
            ("a", "w2", 0), ("b", "w2", 0),
            ("a", "w3", 1), ("b", "w3", 0),
        ]);
        assert!((krippendorff_alpha(&t).unwrap().alpha - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn singletons_are_not_pairable() {
        let t = table(&[("a", "w1", 1), ("b", "w1", 0), ("a", "w2", 1), ("a", "w3", 0), ("b", "w3", 0)]);
        let a = krippendorff_alpha(&t).unwrap();
        assert_eq!(a.pairable_units, 2);
        assert_eq!(a.pairable_values, 4);
    }

    #[test]
    fn unanimous_data_is_flagged() {
        let t = table(&[("a", "w1", 1), ("b", "w1", 1), ("a", "w2", 1), ("b", "w2", 1)]);
        let a = krippendorff_alpha(&t).unwrap();
        assert_eq!(a.alpha, 1.0);
        assert!(a.degenerate);
    }

    #[test]
    fn insufficient_data() {
        assert!(krippendorff_alpha(&table(&[("a", "w1", 1), ("b", "w1", 0)])).is_err());
        assert!(krippendorff_alpha(&table(&[("a", "w1", 1), ("a", "w2", 0)])).is_err());
    }
}
