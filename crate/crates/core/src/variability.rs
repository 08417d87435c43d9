//! Contextual variability: how spread out the contexts of a word are in one
//! bin, measured as the mean pairwise cosine distance between per-occurrence
//! context vectors.
//!
//! Words that change context only because they come to refer to one person
//! or event occur in a narrow set of contexts and score low; words with a
//! genuinely new meaning keep a broad range of contexts.

use std::io::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::CorpusBin;
use crate::embedding::{cosine_distance, EmbeddingModel};
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_MAX_CONTEXTS: usize = 200;

/// Position of a token: document index within the bin and token offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccurrenceId {
    pub document: usize,
    pub offset: usize,
}

/// Mean embedding of the in-vocabulary tokens around one occurrence.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextVector {
    pub vector: Vec<f32>,
    pub occurrence: OccurrenceId,
    pub n_context_tokens: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContextSet {
    pub contexts: Vec<ContextVector>,
    pub n_occurrences: usize,
    /// Occurrences without a single usable context token.
    pub n_skipped: usize,
}

/// One context vector per occurrence of `word` in the bin.
///
/// The context is up to `window` tokens on each side inside the same
/// document, minus the occurrence itself and any token the model does not
/// know. The embedding space is the model's input vectors.
pub fn context_vectors(
    bin: CorpusBin<'_>,
    word: &str,
    model: &EmbeddingModel,
    window: usize,
) -> Result<ContextSet> {
    if window == 0 {
        return Err(Error::Param("context window must be at least 1".into()));
    }
    let dim = model.dim();
    let vocab = model.vocab();
    let mut set = ContextSet {
        contexts: Vec::new(),
        n_occurrences: 0,
        n_skipped: 0,
    };
    let mut sum = vec![0.0f64; dim];
    for (d, doc) in bin.documents.iter().enumerate() {
        for (pos, tok) in doc.iter().enumerate() {
            if tok != word {
                continue;
            }
            set.n_occurrences += 1;
            sum.iter_mut().for_each(|x| *x = 0.0);
            let lo = pos.saturating_sub(window);
            let hi = (pos + window + 1).min(doc.len());
            let mut n = 0;
            for (i, ctx) in doc[lo..hi].iter().enumerate() {
                if lo + i == pos {
                    continue;
                }
                if let Some(id) = vocab.id(ctx) {
                    for (s, &v) in sum.iter_mut().zip(model.vector_by_id(id)) {
                        *s += f64::from(v);
                    }
                    n += 1;
                }
            }
            if n == 0 {
                set.n_skipped += 1;
                continue;
            }
            set.contexts.push(ContextVector {
                vector: sum.iter().map(|&s| (s / n as f64) as f32).collect(),
                occurrence: OccurrenceId {
                    document: d,
                    offset: pos,
                },
                n_context_tokens: n,
            });
        }
    }
    if set.n_occurrences == 0 {
        return Err(Error::data(format!(
            "word {word:?} does not occur in bin {}",
            bin.label()
        )));
    }
    Ok(set)
}

/// Mean cosine distance over all unordered pairs of context vectors.
///
/// Vectors are first put in occurrence order; if there are more than
/// `max_contexts`, a uniform subsample of that size is drawn with a
/// generator seeded by `seed`. The result does not depend on the order of
/// the input list.
pub fn contextual_variability(contexts: &[ContextVector], max_contexts: usize, seed: u64) -> Result<f64> {
    if contexts.len() < 2 {
        return Err(Error::data(format!(
            "variability needs at least 2 context vectors, got {}",
            contexts.len()
        )));
    }
    if max_contexts < 2 {
        return Err(Error::Param("max_contexts must be at least 2".into()));
    }
    let mut ordered: Vec<&ContextVector> = contexts.iter().collect();
    ordered.sort_by_key(|c| c.occurrence);
    if ordered.len() > max_contexts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = sample(&mut rng, ordered.len(), max_contexts).into_vec();
        picked.sort_unstable();
        ordered = picked.into_iter().map(|i| ordered[i]).collect();
    }
    let mut total = 0.0;
    let mut pairs = 0u64;
    for (i, a) in ordered.iter().enumerate() {
        for b in &ordered[i + 1..] {
            total += cosine_distance(&a.vector, &b.vector)?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariabilityEntry {
    pub word: String,
    /// The variability, or why it could not be computed.
    pub variability: std::result::Result<f64, String>,
    pub n_occurrences: usize,
    pub n_used: usize,
    pub n_skipped: usize,
}

/// Settings shared by all words of a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariabilityParams {
    pub window: usize,
    pub max_contexts: usize,
    pub seed: u64,
}

impl Default for VariabilityParams {
    fn default() -> Self {
        VariabilityParams {
            window: DEFAULT_WINDOW,
            max_contexts: DEFAULT_MAX_CONTEXTS,
            seed: 1,
        }
    }
}

/// Variability for each word, computed in parallel. A word that cannot be
/// scored (absent, or fewer than two usable contexts) gets an error entry
/// and does not abort the batch. Entries keep the order of `words`.
pub fn variability_report<S: AsRef<str> + Sync>(
    bin: CorpusBin<'_>,
    words: &[S],
    model: &EmbeddingModel,
    params: &VariabilityParams,
) -> Vec<VariabilityEntry> {
    words
        .par_iter()
        .map(|w| {
            let word = w.as_ref();
            match context_vectors(bin, word, model, params.window) {
                Ok(set) => VariabilityEntry {
                    word: word.to_owned(),
                    variability: contextual_variability(&set.contexts, params.max_contexts, params.seed)
                        .map_err(|e| e.to_string()),
                    n_occurrences: set.n_occurrences,
                    n_used: set.contexts.len().min(params.max_contexts),
                    n_skipped: set.n_skipped,
                },
                Err(e) => VariabilityEntry {
                    word: word.to_owned(),
                    variability: Err(e.to_string()),
                    n_occurrences: 0,
                    n_used: 0,
                    n_skipped: 0,
                },
            }
        })
        .collect()
}

pub const REPORT_HEADER: &str = "word\tvariability\tn_occurrences\tn_used\tn_skipped";

pub fn write_report_tsv<W: Write>(entries: &[VariabilityEntry], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for e in entries {
        let v = e.variability.as_ref().map_or_else(|_| "NA".to_owned(), |v| v.to_string());
        writeln!(w, "{}\t{}\t{}\t{}\t{}", e.word, v, e.n_occurrences, e.n_used, e.n_skipped)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{TimeBin, Vocabulary};
    use crate::embedding::{init_random, TrainParams};
    use proptest::prelude::*;

    fn cv(v: &[f32], offset: usize) -> ContextVector {
        ContextVector {
            vector: v.to_vec(),
            occurrence: OccurrenceId { document: 0, offset },
            n_context_tokens: 1,
        }
    }

    fn model() -> EmbeddingModel {
        let vocab = Vocabulary::from_counts(
            ["a", "b", "x"].map(|w| (w.to_owned(), 1)),
            3,
        )
        .unwrap();
        init_random(&vocab, &TrainParams { dim: 4, seed: 2, ..Default::default() }).unwrap()
    }

    fn docs(text: &[&str]) -> Vec<Vec<String>> {
        text.iter().map(|d| d.split_whitespace().map(str::to_owned).collect()).collect()
    }

    #[test]
    fn context_is_mean_of_neighbors() {
        let m = model();
        let bin = TimeBin::unbounded("t2").unwrap();
        let d = docs(&["a x b"]);
        let set = context_vectors(CorpusBin::from_documents(&bin, &d), "x", &m, 5).unwrap();
        assert_eq!(set.contexts.len(), 1);
        let expected: Vec<f32> = m
            .vector("a")
            .unwrap()
            .iter()
            .zip(m.vector("b").unwrap())
            .map(|(a, b)| ((f64::from(*a) + f64::from(*b)) / 2.0) as f32)
            .collect();
        assert_eq!(set.contexts[0].vector, expected);
        assert_eq!(set.contexts[0].n_context_tokens, 2);
    }

    #[test]
    fn context_at_document_start() {
        let m = model();
        let bin = TimeBin::unbounded("t2").unwrap();
        let d = docs(&["x a"]);
        let set = context_vectors(CorpusBin::from_documents(&bin, &d), "x", &m, 5).unwrap();
        assert_eq!(set.contexts[0].vector, m.vector("a").unwrap());
    }

    #[test]
    fn unknown_context_is_skipped() {
        let m = model();
        let bin = TimeBin::unbounded("t2").unwrap();
        let d = docs(&["q x q", "a x"]);
        let set = context_vectors(CorpusBin::from_documents(&bin, &d), "x", &m, 5).unwrap();
        assert_eq!(set.n_skipped, 1);
        assert_eq!(set.n_occurrences, 2);
        assert_eq!(set.contexts.len(), 1);
        assert!(context_vectors(CorpusBin::from_documents(&bin, &d), "b", &m, 5).is_err());
    }

    #[test]
    fn target_itself_is_excluded() {
        let m = model();
        let bin = TimeBin::unbounded("t2").unwrap();
        let d = docs(&["x x"]);
        let set = context_vectors(CorpusBin::from_documents(&bin, &d), "x", &m, 5).unwrap();
        // Each occurrence sees the other one, never itself.
        assert_eq!(set.contexts.len(), 2);
        assert!(set.contexts.iter().all(|c| c.n_context_tokens == 1));
    }

    #[test]
    fn worked_examples() {
        let same = [cv(&[1.0, 2.0], 0), cv(&[1.0, 2.0], 1)];
        assert_eq!(contextual_variability(&same, 200, 0).unwrap(), 0.0);

        let three = [cv(&[1.0, 0.0], 0), cv(&[0.0, 1.0], 1), cv(&[1.0, 0.0], 2)];
        assert!((contextual_variability(&three, 200, 0).unwrap() - 2.0 / 3.0).abs() < 1e-12);

        let basis: Vec<ContextVector> = (0..6)
            .map(|i| {
                let mut v = vec![0.0; 6];
                v[i] = 1.0;
                cv(&v, i)
            })
            .collect();
        assert_eq!(contextual_variability(&basis, 200, 0).unwrap(), 1.0);

        assert!(contextual_variability(&three[..1], 200, 0).is_err());
    }

    #[test]
    fn subsampling_is_seeded() {
        let many: Vec<ContextVector> = (0..50)
            .map(|i| cv(&[(i as f32).cos(), (i as f32).sin()], i))
            .collect();
        let a = contextual_variability(&many, 10, 7).unwrap();
        assert_eq!(a, contextual_variability(&many, 10, 7).unwrap());
        assert_ne!(a, contextual_variability(&many, 10, 8).unwrap());
    }

    #[test]
    fn report_records_failures() {
        let m = model();
        let bin = TimeBin::unbounded("t2").unwrap();
        let d = docs(&["a x b", "b x a", "a b"]);
        let view = CorpusBin::from_documents(&bin, &d);
        let params = VariabilityParams::default();
        let report = variability_report(view, &["x", "b", "nope", "q"], &m, &params);
        assert!(report[0].variability.is_ok());
        assert!(report[1].variability.is_ok());
        assert!(report[2].variability.is_err());
        let once = docs(&["a q b"]);
        let r = variability_report(CorpusBin::from_documents(&bin, &once), &["q"], &m, &params);
        assert!(r[0].variability.is_err());
        assert_eq!(r[0].n_occurrences, 1);
        assert_eq!(report, variability_report(view, &["x", "b", "nope", "q"], &m, &params));
    }

    fn vectors() -> impl Strategy<Value = Vec<ContextVector>> {
        prop::collection::vec(prop::collection::vec(0.1f32..5.0, 3), 2..25).prop_map(|vs| {
            vs.iter()
                .enumerate()
                .map(|(i, v)| cv(v, i))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut cs in vectors(), rot in 0usize..25, cap in 2usize..30) {
            let a = contextual_variability(&cs, cap, 11).unwrap();
            let n = cs.len();
            cs.rotate_left(rot % n);
            cs.reverse();
            prop_assert_eq!(a, contextual_variability(&cs, cap, 11).unwrap());
        }

        #[test]
        fn bounded_and_scale_invariant(cs in vectors()) {
            let a = contextual_variability(&cs, 200, 3).unwrap();
            prop_assert!((0.0..=2.0).contains(&a));
            let doubled: Vec<ContextVector> = cs
                .iter()
                .map(|c| ContextVector { vector: c.vector.iter().map(|x| x * 2.0).collect(), ..c.clone() })
                .collect();
            let b = contextual_variability(&doubled, 200, 3).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn zero_for_parallel_vectors(base in prop::collection::vec(0.1f32..5.0, 3), scales in prop::collection::vec(1u8..8, 2..10)) {
            let cs: Vec<ContextVector> = scales
                .iter()
                .enumerate()
                .map(|(i, &s)| cv(&base.iter().map(|x| x * f32::from(s)).collect::<Vec<_>>(), i))
                .collect();
            prop_assert!(contextual_variability(&cs, 200, 0).unwrap() < 1e-6);
        }
    }
}
