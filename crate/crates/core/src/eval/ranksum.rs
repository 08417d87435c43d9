//! Mann–Whitney rank-sum test and ranking AUC.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankSum {
    /// Pairs `(x, y)` with `x > y`, ties counted one half.
    pub u: f64,
    /// `u / (n_x n_y)`: the probability that a random `x` outranks a random `y`.
    pub auc: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub exact: bool,
}

// Above this many observations the normal approximation is used.
const EXACT_LIMIT: usize = 60;

fn u_statistic(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .map(|a| {
            y.iter()
                .map(|b| match a.partial_cmp(b) {
                    Some(std::cmp::Ordering::Greater) => 1.0,
                    Some(std::cmp::Ordering::Equal) => 0.5,
                    _ => 0.0,
                })
                .sum::<f64>()
        })
        .sum()
}

/// Probability that `x` outranks `y`; `None` when either sample is empty.
pub fn auc(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.is_empty() || y.is_empty() {
        return None;
    }
    Some(u_statistic(x, y) / (x.len() * y.len()) as f64)
}

/// Number of ways to pick `n1` of `n1 + n2` ranks with each U value,
/// `counts[u]` for `u` in `0..=n1*n2`.
fn u_distribution(n1: usize, n2: usize) -> Vec<f64> {
    // f[i][j][u]: sequences of i x's and j y's with statistic u, built by
    // appending the largest element.
    let max = n1 * n2;
    let mut prev: Vec<Vec<f64>> = vec![vec![0.0; max + 1]; n2 + 1];
    for row in prev.iter_mut() {
        row[0] = 1.0;
    }
    for i in 1..=n1 {
        let mut cur: Vec<Vec<f64>> = vec![vec![0.0; max + 1]; n2 + 1];
        cur[0][0] = 1.0;
        for j in 1..=n2 {
            for u in 0..=i * j {
                // Largest is an x: it beats all j y's.
                let from_x = if u >= j { prev[j][u - j] } else { 0.0 };
                let from_y = cur[j - 1][u];
                cur[j][u] = from_x + from_y;
            }
        }
        prev = cur;
    }
    prev.swap_remove(n2)
}

fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

// Chebyshev fit (Numerical Recipes `erfcc`), fractional error below 1.2e-7.
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

/// Two-sided Mann–Whitney test of `x` against `y`.
///
/// Without ties and with at most 60 observations in total, the p-value is
/// exact; otherwise the normal approximation with tie and continuity
/// corrections is used.
pub fn rank_sum_test(x: &[f64], y: &[f64]) -> Result<RankSum> {
    let (n1, n2) = (x.len(), y.len());
    if n1 == 0 || n2 == 0 {
        return Err(Error::data("rank-sum test needs two non-empty samples"));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::numeric("rank-sum test: NaN input"));
    }
    let u = u_statistic(x, y);
    let total = (n1 * n2) as f64;
    let auc = u / total;

    let mut all: Vec<f64> = x.iter().chain(y).copied().collect();
    all.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1] == all[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }

    if tie_term == 0.0 && n1 + n2 <= EXACT_LIMIT {
        let dist = u_distribution(n1, n2);
        let all_ways: f64 = dist.iter().sum();
        let u = u as usize;
        let lower: f64 = dist[..=u].iter().sum::<f64>() / all_ways;
        let upper: f64 = dist[u..].iter().sum::<f64>() / all_ways;
        return Ok(RankSum {
            u: u as f64,
            auc,
            p: (2.0 * lower.min(upper)).min(1.0),
            exact: true,
        });
    }

    Ok(RankSum {
        u,
        auc,
        p: normal_p(u, n1, n2, tie_term),
        exact: false,
    })
}

fn normal_p(u: f64, n1: usize, n2: usize, tie_term: f64) -> f64 {
    let n = (n1 + n2) as f64;
    let total = (n1 * n2) as f64;
    let var = total / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        // Every value tied.
        return 1.0;
    }
    let z = ((u - total / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
    (2.0 * normal_sf(z)).min(1.0)
}
