//! Oracles shared by the integration tests. Each one follows a different
//! computational route from the library code it checks.

#![allow(dead_code)]

use rand::Rng;
use shortshift::corpus::{TimeBin, TimeBinnedCorpus};
use shortshift::eval::JudgmentTable;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Pearson's r from raw sums, and the two-tailed p from statrs.
pub fn naive_pearson(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let r = (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
    let df = n - 2.0;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        2.0 * StudentsT::new(0.0, 1.0, df).unwrap().sf(t.abs())
    };
    (r, p)
}

/// Krippendorff's alpha by enumerating value pairs: observed disagreement
/// over within-unit pairs, expected disagreement over all pairs of pairable
/// values.
pub fn pairwise_alpha(units: &[Vec<u8>]) -> f64 {
    let pairable: Vec<&Vec<u8>> = units.iter().filter(|u| u.len() >= 2).collect();
    let values: Vec<u8> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
    let n = values.len() as f64;
    let mut within = 0.0;
    for u in &pairable {
        let mut d = 0.0;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j && u[i] != u[j] {
                    d += 1.0;
                }
            }
        }
        within += d / (u.len() as f64 - 1.0);
    }
    let mut across = 0.0;
    for i in 0..values.len() {
        for j in 0..values.len() {
            if i != j && values[i] != values[j] {
                across += 1.0;
            }
        }
    }
    let d_o = within / n;
    let d_e = across / (n * (n - 1.0));
    1.0 - d_o / d_e
}

/// A random table with some judgments missing. Returns the table and the
/// judgments grouped per word.
pub fn random_table<R: Rng>(rng: &mut R, words: usize, annotators: usize, missing: f64) -> (JudgmentTable, Vec<Vec<u8>>) {
    let mut table = JudgmentTable::new();
    let mut units = vec![Vec::new(); words];
    for (w, unit) in units.iter_mut().enumerate() {
        // Per-word bias so that tables carry some real agreement.
        let bias: f64 = rng.random();
        for a in 0..annotators {
            if rng.random::<f64>() < missing {
                continue;
            }
            let j = u8::from(rng.random::<f64>() < bias);
            table.insert(&format!("a{a}"), &format!("w{w}"), j).unwrap();
            unit.push(j);
        }
    }
    (table, units)
}

pub fn single_bin(label: &str, docs: &[&str]) -> TimeBinnedCorpus {
    let mut c = TimeBinnedCorpus::new(vec![TimeBin::unbounded(label).unwrap()]).unwrap();
    for d in docs {
        c.push_document(0, d.split_whitespace().map(str::to_owned).collect());
    }
    c
}
