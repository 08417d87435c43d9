use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Skip-gram training hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainParams {
    /// Context tokens considered on each side of the center word.
    pub window: u32,
    pub dim: u32,
    /// Learning rate at the first processed token.
    pub lr_initial: f64,
    /// Learning rate reached after the last processed token.
    pub lr_final: f64,
    pub epochs: u32,
    pub seed: u64,
    /// Worker lanes. Anything above 1 trades reproducibility for speed.
    pub threads: u32,
    /// Frequent-word subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            window: 5,
            dim: 200,
            lr_initial: 0.01,
            lr_final: 1e-4,
            epochs: 5,
            seed: 1,
            threads: 1,
            subsample: 0.0,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Param(m.to_owned()));
        if self.window < 1 {
            return fail("window must be at least 1");
        }
        if self.dim < 1 {
            return fail("dim must be at least 1");
        }
        if !(self.lr_final > 0.0 && self.lr_final <= self.lr_initial) || !self.lr_initial.is_finite() {
            return fail("learning rates must satisfy 0 < lr_final <= lr_initial");
        }
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if self.threads < 1 {
            return fail("threads must be at least 1");
        }
        if !(self.subsample >= 0.0 && self.subsample.is_finite()) {
            return fail("subsample must be a finite non-negative threshold");
        }
        Ok(())
    }

    /// Linearly decayed rate after `processed` of `total` tokens.
    pub fn learning_rate(&self, processed: u64, total: u64) -> f64 {
        if total == 0 {
            return self.lr_initial;
        }
        let progress = (processed as f64 / total as f64).min(1.0);
        (self.lr_initial - (self.lr_initial - self.lr_final) * progress).max(self.lr_final)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = TrainParams::default();
        p.validate().unwrap();
        assert_eq!((p.window, p.dim, p.lr_initial), (5, 200, 0.01));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            TrainParams { window: 0, ..Default::default() },
            TrainParams { dim: 0, ..Default::default() },
            TrainParams { lr_final: 0.0, ..Default::default() },
            TrainParams { lr_final: 0.1, ..Default::default() },
            TrainParams { epochs: 0, ..Default::default() },
            TrainParams { threads: 0, ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn linear_decay() {
        let p = TrainParams::default();
        assert_eq!(p.learning_rate(0, 100), 0.01);
        assert!((p.learning_rate(50, 100) - 0.00505).abs() < 1e-12);
        assert_eq!(p.learning_rate(100, 100), 1e-4);
        assert_eq!(p.learning_rate(200, 100), 1e-4);
    }
}
