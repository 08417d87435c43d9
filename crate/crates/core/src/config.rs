//! Pipeline configuration, read from a TOML file.
//!
//! ```toml
//! min_count = 5
//!
//! [paths]
//! corpus = "data/corpus"
//! models = "out/models"
//! judgments = "data/judgments.csv"
//! content_words = "data/content_words.txt"
//! output = "out"
//!
//! [train]
//! dim = 200
//! epochs = 5
//!
//! [candidates]
//! z_threshold = 2.0
//!
//! [regions]
//! cos_hi = 0.25
//!
//! [variability]
//! max_contexts = 200
//! ```
//!
//! Every section and key is optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embedding::TrainParams;
use crate::error::{Error, Result};
use crate::shift::{CandidateFilter, RegionThresholds};
use crate::variability::VariabilityParams;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Corpus directory as written by `TimeBinnedCorpus::save`.
    pub corpus: Option<PathBuf>,
    /// Directory holding one model file per bin.
    pub models: Option<PathBuf>,
    pub judgments: Option<PathBuf>,
    /// One content word per line.
    pub content_words: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub min_count: u64,
    pub paths: Paths,
    pub train: TrainParams,
    pub candidates: CandidateFilter,
    pub regions: RegionThresholds,
    pub variability: VariabilityParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_count: 5,
            paths: Paths::default(),
            train: TrainParams::default(),
            candidates: CandidateFilter::default(),
            regions: RegionThresholds::default(),
            variability: VariabilityParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: PipelineConfig = toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        config.check_params()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Param(m) => Error::Param(format!("{}: {m}", path.display())),
            e => Error::Format(format!("{}: {e}", path.display())),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn check_params(&self) -> Result<()> {
        self.train.validate()?;
        let c = &self.candidates;
        if c.min_abs > c.max_abs || !c.z_threshold.is_finite() {
            return Err(Error::Param("candidates: need min_abs <= max_abs and a finite z_threshold".into()));
        }
        if self.variability.window == 0 || self.variability.max_contexts < 2 {
            return Err(Error::Param("variability: window must be positive and max_contexts at least 2".into()));
        }
        Ok(())
    }

    /// Checks that every configured input exists and that the output
    /// directory can be created, so a long run does not fail at its end.
    pub fn validate(&self) -> Result<()> {
        self.check_params()?;
        let p = &self.paths;
        for (name, path) in [("corpus", &p.corpus), ("models", &p.models)] {
            if let Some(path) = path {
                if !path.is_dir() {
                    return Err(Error::data(format!("{name} directory {} does not exist", path.display())));
                }
            }
        }
        for (name, path) in [("judgments", &p.judgments), ("content_words", &p.content_words)] {
            if let Some(path) = path {
                if !path.is_file() {
                    return Err(Error::data(format!("{name} file {} does not exist", path.display())));
                }
            }
        }
        if let Some(out) = &p.output {
            std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        }
        Ok(())
    }
}

/// Reads a word list: one word per line, blank lines and `#` comments
/// skipped.
pub fn load_word_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(PipelineConfig::from_toml("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn partial_sections() {
        let c = PipelineConfig::from_toml("min_count = 2\n[train]\ndim = 50\n[regions]\ncos_hi = 0.3\n").unwrap();
        assert_eq!(c.min_count, 2);
        assert_eq!(c.train.dim, 50);
        assert_eq!(c.train.window, 5);
        assert_eq!(c.regions.cos_hi, 0.3);
        assert_eq!(c.regions.index_hi, 0.5);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(PipelineConfig::from_toml("[train]\ndimension = 5\n").is_err());
        assert!(PipelineConfig::from_toml("[train]\ndim = 0\n").is_err());
        assert!(PipelineConfig::from_toml("[candidates]\nmin_abs = 10\nmax_abs = 5\n").is_err());
    }

    #[test]
    fn round_trip() {
        let mut c = PipelineConfig::default();
        c.paths.output = Some("out".into());
        c.train.epochs = 3;
        assert_eq!(PipelineConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn validate_checks_paths() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = PipelineConfig::default();
        c.paths.judgments = Some(dir.path().join("missing.csv"));
        assert!(matches!(c.validate(), Err(Error::Data(_))));
        c.paths.judgments = None;
        c.paths.output = Some(dir.path().join("a/b"));
        c.validate().unwrap();
        assert!(dir.path().join("a/b").is_dir());
    }

    #[test]
    fn word_list() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        std::fs::write(&path, "# header\nalpha\n\n  beta \n").unwrap();
        assert_eq!(load_word_list(&path).unwrap(), ["alpha", "beta"]);
    }
}
