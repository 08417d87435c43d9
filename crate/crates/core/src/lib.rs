//! Detection of short-term lexical meaning shift between time-binned
//! corpora.
//!
//! Embeddings for a later time bin are initialized from those of an earlier
//! bin and trained further with skip-gram and hierarchical softmax, so the
//! vectors of the two bins live in one space and can be compared by cosine
//! distance. A contextual-variability score separates genuine shift from
//! words whose contexts changed only because they started referring to one
//! specific entity or event.

pub mod config;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod io;
pub mod shift;
pub mod synth;
pub mod variability;

pub use error::{Error, Result};

/// Version of this library, reported by the command-line tool.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
