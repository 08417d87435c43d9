use super::special::student_t_two_tailed;
use crate::error::{Error, Result};

/// Product-moment correlation with its two-tailed p-value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Pearson's r; the p-value tests r = 0 with
/// `t = r √((n - 2) / (1 - r²))` against Student's t on `n - 2` degrees of
/// freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::data(format!(
            "pearson: samples have different lengths ({} and {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::data(format!("pearson needs at least 3 points, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::numeric("pearson: non-finite input"));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::numeric("pearson: a sample has zero variance"));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        student_t_two_tailed(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    Ok(Correlation { r, p, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_correlations() {
        let c = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((c.r - 1.0).abs() < 1e-15);
        assert!(c.p < 1e-6);
        let c = pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap();
        assert!((c.r + 1.0).abs() < 1e-15);
    }

    #[test]
    fn worked_example() {
        // r = 0.8 exactly; t = 0.8·√(2/0.36) ≈ 1.8856 on df = 2, where the
        // closed form p = 1 - t/√(2 + t²) reduces to 1 - r = 0.2.
        let c = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((c.r - 0.8).abs() < 1e-12);
        let t: f64 = 0.8 * (2.0f64 / 0.36).sqrt();
        assert!((t - 1.8856).abs() < 1e-4);
        assert!((c.p - 0.2).abs() < 1e-12);
        // Table check: t = 2.3094 on df = 2 gives p ≈ 0.1470.
        assert!((student_t_two_tailed(2.3094, 2.0) - 0.1470).abs() < 5e-4);
    }

    #[test]
    fn errors() {
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, f64::NAN, 3.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
