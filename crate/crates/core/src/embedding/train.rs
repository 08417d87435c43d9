use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hs::window_kernel;
use super::{EmbeddingModel, HuffmanTree, TrainParams};
use crate::corpus::CorpusBin;
use crate::error::{Error, Result};

/// Bookkeeping from one call to [`train_with_stats`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainStats {
    /// In-vocabulary tokens seen, summed over epochs.
    pub tokens: u64,
    /// (center, context) pairs trained, summed over epochs.
    pub pairs: u64,
    /// Mean pair loss per epoch.
    pub epoch_loss: Vec<f64>,
    pub seconds: f64,
}

impl TrainStats {
    pub fn tokens_per_second(&self) -> f64 {
        self.tokens as f64 / self.seconds.max(f64::MIN_POSITIVE)
    }
}

/// Trains skip-gram with hierarchical softmax on one bin.
pub fn train(model: EmbeddingModel, bin: CorpusBin<'_>, params: &TrainParams) -> Result<EmbeddingModel> {
    train_with_stats(model, bin, params).map(|(m, _)| m)
}

/// Like [`train`], also returning loss and throughput statistics.
///
/// Tokens outside the model vocabulary are removed before windows are
/// formed, and windows never cross document boundaries. Every token acts as
/// a center for each neighbor within `params.window` positions on either
/// side. The learning rate falls linearly from `lr_initial` to `lr_final`
/// over all processed tokens.
///
/// Words that never occur in the bin are never centers, so their input
/// vectors are left untouched.
pub fn train_with_stats(
    mut model: EmbeddingModel,
    bin: CorpusBin<'_>,
    params: &TrainParams,
) -> Result<(EmbeddingModel, TrainStats)> {
    params.validate()?;
    if params.dim != model.params.dim {
        return Err(Error::Param(format!(
            "training dim {} differs from model dim {}",
            params.dim, model.params.dim
        )));
    }
    if bin.token_count == 0 {
        return Err(Error::data(format!("bin {} is empty", bin.label())));
    }
    let started = Instant::now();
    let docs: Vec<Vec<u32>> = bin
        .documents
        .iter()
        .map(|doc| doc.iter().filter_map(|t| model.vocab.id(t)).collect::<Vec<u32>>())
        .filter(|d: &Vec<u32>| !d.is_empty())
        .collect();
    let corpus_tokens: u64 = docs.iter().map(|d| d.len() as u64).sum();
    let keep_prob = keep_probabilities(&model, &docs, corpus_tokens, params.subsample);

    let job = Job {
        tree: &model.tree,
        dim: params.dim as usize,
        params,
        keep_prob: keep_prob.as_deref(),
        total_work: corpus_tokens * u64::from(params.epochs),
        progress: AtomicU64::new(0),
    };

    let lanes = (params.threads as usize).min(docs.len()).max(1);
    let tallies = if lanes == 1 {
        job.run_lane(&docs, &mut model.input, &mut model.inner, 0)
    } else {
        let shards = shard(&docs, lanes);
        let input = Shared::new(&mut model.input);
        let inner = Shared::new(&mut model.inner);
        let job = &job;
        let per_lane: Vec<Vec<Tally>> = std::thread::scope(|scope| {
            let handles: Vec<_> = shards
                .into_iter()
                .enumerate()
                .map(|(lane, shard)| {
                    let (input, inner) = (&input, &inner);
                    scope.spawn(move || {
                        // SAFETY: hogwild contract. Lanes race on rows they
                        // share; updates may be lost but every element stays
                        // an f32 written by some lane. Both buffers outlive
                        // the scope.
                        let (input, inner) = unsafe { (input.slice(), inner.slice()) };
                        job.run_lane(shard, input, inner, lane as u64)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("training lane panicked")).collect()
        });
        let mut merged = vec![Tally::default(); params.epochs as usize];
        for lane in per_lane {
            for (m, t) in merged.iter_mut().zip(lane) {
                m.loss += t.loss;
                m.pairs += t.pairs;
                m.tokens += t.tokens;
            }
        }
        merged
    };

    if model.input.iter().chain(&model.inner).any(|x| !x.is_finite()) {
        return Err(Error::numeric("training diverged to non-finite parameters"));
    }
    model.params = params.clone();
    model.bin_label = bin.label().to_owned();

    let stats = TrainStats {
        tokens: tallies.iter().map(|t| t.tokens).sum(),
        pairs: tallies.iter().map(|t| t.pairs).sum(),
        epoch_loss: tallies
            .iter()
            .map(|t| if t.pairs == 0 { 0.0 } else { t.loss / t.pairs as f64 })
            .collect(),
        seconds: started.elapsed().as_secs_f64(),
    };
    debug!(
        "trained {} on {} tokens, {} pairs, {:.0} tokens/s",
        bin.label(),
        stats.tokens,
        stats.pairs,
        stats.tokens_per_second()
    );
    Ok((model, stats))
}

fn keep_probabilities(
    model: &EmbeddingModel,
    docs: &[Vec<u32>],
    total: u64,
    threshold: f64,
) -> Option<Vec<f32>> {
    if threshold <= 0.0 {
        return None;
    }
    let mut counts = vec![0u64; model.vocab.len()];
    for &id in docs.iter().flatten() {
        counts[id as usize] += 1;
    }
    Some(
        counts
            .into_iter()
            .map(|c| {
                if c == 0 {
                    return 1.0;
                }
                let ratio = c as f64 / (threshold * total as f64);
                (((ratio.sqrt() + 1.0) / ratio) as f32).min(1.0)
            })
            .collect(),
    )
}

/// Splits documents into contiguous shards of roughly equal token mass.
fn shard(docs: &[Vec<u32>], lanes: usize) -> Vec<&[Vec<u32>]> {
    let total: usize = docs.iter().map(Vec::len).sum();
    let target = total.div_ceil(lanes);
    let mut shards = Vec::with_capacity(lanes);
    let (mut start, mut acc) = (0, 0);
    for (i, doc) in docs.iter().enumerate() {
        acc += doc.len();
        if acc >= target && shards.len() + 1 < lanes {
            shards.push(&docs[start..=i]);
            start = i + 1;
            acc = 0;
        }
    }
    shards.push(&docs[start..]);
    shards
}

#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    loss: f64,
    pairs: u64,
    tokens: u64,
}

struct Job<'a> {
    tree: &'a HuffmanTree,
    dim: usize,
    params: &'a TrainParams,
    keep_prob: Option<&'a [f32]>,
    total_work: u64,
    progress: AtomicU64,
}

impl Job<'_> {
    fn run_lane(&self, docs: &[Vec<u32>], input: &mut [f32], inner: &mut [f32], lane: u64) -> Vec<Tally> {
        let dim = self.dim;
        let window = self.params.window as usize;
        let mut scratch = vec![0.0f32; dim];
        let kernel = window_kernel();
        let mut contexts = Vec::with_capacity(2 * window);
        let mut kept: Vec<u32> = Vec::new();
        let mut tallies = vec![Tally::default(); self.params.epochs as usize];

        for (epoch, tally) in tallies.iter_mut().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(
                self.params.seed ^ (lane << 32) ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            for doc in docs {
                let base = self.progress.load(Ordering::Relaxed);
                let sentence: &[u32] = match self.keep_prob {
                    None => doc,
                    Some(keep) => {
                        kept.clear();
                        kept.extend(doc.iter().copied().filter(|&w| rng.random::<f32>() < keep[w as usize]));
                        &kept
                    }
                };
                for (pos, &center) in sentence.iter().enumerate() {
                    let offset = doc.len() as u64 * pos as u64 / sentence.len().max(1) as u64;
                    let lr = self.params.learning_rate(base + offset, self.total_work) as f32;
                    let lo = pos.saturating_sub(window);
                    let hi = (pos + window + 1).min(sentence.len());
                    let row = center as usize * dim;
                    contexts.clear();
                    contexts.extend(
                        (lo..hi)
                            .filter(|&c| c != pos)
                            .map(|c| (self.tree.path(sentence[c]), self.tree.code(sentence[c]))),
                    );
                    tally.loss += kernel(&mut input[row..row + dim], inner, &contexts, lr, &mut scratch);
                    tally.pairs += contexts.len() as u64;
                }
                tally.tokens += doc.len() as u64;
                self.progress.fetch_add(doc.len() as u64, Ordering::Relaxed);
            }
        }
        tallies
    }
}

/// Raw view of a parameter buffer shared by hogwild lanes.
struct Shared {
    ptr: *mut f32,
    len: usize,
}

// SAFETY: see the hogwild note in `train_with_stats`; the pointer is only
// dereferenced inside the thread scope that borrows the buffer.
unsafe impl Sync for Shared {}

impl Shared {
    fn new(buf: &mut [f32]) -> Self {
        Shared {
            ptr: buf.as_mut_ptr(),
            len: buf.len(),
        }
    }

    #[allow(clippy::mut_from_ref)]
    unsafe fn slice(&self) -> &mut [f32] {
        std::slice::from_raw_parts_mut(self.ptr, self.len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, TimeBin, Vocabulary};
    use crate::embedding::init_random;

    fn docs(text: &[&str]) -> Vec<Vec<String>> {
        text.iter()
            .map(|d| d.split_whitespace().map(str::to_owned).collect())
            .collect()
    }

    fn params() -> TrainParams {
        TrainParams { dim: 10, epochs: 1, seed: 9, ..Default::default() }
    }

    #[test]
    fn two_token_document_gives_two_pairs() {
        let bin = TimeBin::unbounded("t1").unwrap();
        let d = docs(&["a b"]);
        let view = CorpusBin::from_documents(&bin, &d);
        let vocab = build_vocab(view, 1).unwrap();
        let model = init_random(&vocab, &params()).unwrap();
        let (_, stats) = train_with_stats(model, view, &params()).unwrap();
        assert_eq!(stats.pairs, 2);
        assert_eq!(stats.tokens, 2);
    }

    #[test]
    fn windows_use_filtered_sequence_and_stop_at_documents() {
        let bin = TimeBin::unbounded("t1").unwrap();
        let d = docs(&["a oov oov oov b", "c"]);
        let view = CorpusBin::from_documents(&bin, &d);
        let vocab = Vocabulary::from_counts(
            ["a", "b", "c"].map(|w| (w.to_owned(), 1)),
            3,
        )
        .unwrap();
        let p = TrainParams { window: 1, ..params() };
        let model = init_random(&vocab, &p).unwrap();
        let (trained, stats) = train_with_stats(model, view, &p).unwrap();
        // a<->b adjacent after filtering; c alone in its document.
        assert_eq!(stats.pairs, 2);
        assert_eq!(trained.bin_label(), "t1");
    }

    #[test]
    fn empty_bin_is_an_error() {
        let bin = TimeBin::unbounded("t1").unwrap();
        let empty: Vec<Vec<String>> = Vec::new();
        let vocab = Vocabulary::from_counts([("a".to_owned(), 1), ("b".to_owned(), 1)], 2).unwrap();
        let model = init_random(&vocab, &params()).unwrap();
        assert!(train(model, CorpusBin::from_documents(&bin, &empty), &params()).is_err());
    }

    #[test]
    fn dim_mismatch_is_an_error() {
        let bin = TimeBin::unbounded("t1").unwrap();
        let d = docs(&["a b"]);
        let view = CorpusBin::from_documents(&bin, &d);
        let vocab = build_vocab(view, 1).unwrap();
        let model = init_random(&vocab, &params()).unwrap();
        assert!(train(model, view, &TrainParams { dim: 11, ..params() }).is_err());
    }

    #[test]
    fn shards_cover_everything() {
        let docs: Vec<Vec<u32>> = (0..10).map(|i| vec![0; i + 1]).collect();
        let shards = shard(&docs, 3);
        assert_eq!(shards.len(), 3);
        assert_eq!(shards.iter().map(|s| s.len()).sum::<usize>(), 10);
    }

    #[test]
    fn subsampling_keeps_rare_words() {
        let vocab = Vocabulary::from_counts([("a".to_owned(), 1), ("b".to_owned(), 1)], 2).unwrap();
        let model = init_random(&vocab, &params()).unwrap();
        let docs = vec![vec![0u32; 1000], vec![1u32]];
        let keep = keep_probabilities(&model, &docs, 1001, 1e-3).unwrap();
        assert!(keep[0] < 0.1);
        assert_eq!(keep[1], 1.0);
    }
}
