//! Synthetic time-binned corpora with planted pseudowords of known
//! behavior, plus a benchmark that runs the whole detection pipeline on
//! them.
//!
//! Topics have disjoint vocabularies, each split into facets. A document
//! belongs to one topic and leans towards one of its facets: each token is
//! drawn from that facet's Zipfian unigram distribution with probability
//! `facet_weight`, otherwise from a random facet of the same topic. Facets
//! give words within a topic distinct distributional profiles, so the
//! breadth of a word's contexts is visible in embedding space. Pseudowords
//! are planted over existing tokens:
//!
//! * `stable`: the same topic in both bins;
//! * `shift`: topic A in the first bin and a different topic B in the
//!   second, with contexts spanning all of topic B;
//! * `referential`: topic A in both bins, but in the second bin every
//!   occurrence sits inside one of a few fixed context frames, all drawn
//!   from a single facet of A.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::corpus::{build_vocab, intersect_vocabs, CorpusBin, TimeBin, TimeBinnedCorpus};
use crate::embedding::{init_from, init_random, train_with_stats, TrainParams, TrainStats};
use crate::error::{Error, Result};
use crate::eval::{auc, pearson, rank_sum_test, Correlation, RankSum};
use crate::shift::shift_score;
use crate::variability::{variability_report, VariabilityParams};

pub const FIRST_BIN: &str = "t1";
pub const SECOND_BIN: &str = "t2";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Shift,
    Referential,
    Stable,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Shift, Kind::Referential, Kind::Stable];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Shift => "shift",
            Kind::Referential => "referential",
            Kind::Stable => "stable",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shift" => Ok(Kind::Shift),
            "referential" => Ok(Kind::Referential),
            "stable" => Ok(Kind::Stable),
            other => Err(Error::Format(format!("unknown pseudoword kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pseudoword {
    pub name: String,
    pub kind: Kind,
    /// Occurrences planted in each bin.
    pub occurrences: usize,
}

/// Generator settings. Deserializes from TOML; omitted keys take the
/// defaults (about one million tokens per bin, ten pseudowords per kind).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub n_topics: usize,
    pub topic_vocab_size: usize,
    pub facets_per_topic: usize,
    /// Probability that a token comes from its document's own facet.
    pub facet_weight: f64,
    /// Documents per bin.
    pub n_documents: usize,
    pub doc_length_mean: f64,
    pub doc_length_sd: f64,
    /// Exponent of the within-topic Zipf distribution.
    pub zipf_exponent: f64,
    /// Distinct context frames used by referential pseudowords in the
    /// second bin.
    pub referential_frames: usize,
    /// Tokens on each side of the pseudoword inside a frame.
    pub frame_half_width: usize,
    pub pseudowords: Vec<Pseudoword>,
    pub seed: u64,
}

/// Shortest document the generator produces: one full frame.
fn min_doc_len(spec: &SynthSpec) -> usize {
    2 * spec.frame_half_width + 1
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_topics: 10,
            topic_vocab_size: 500,
            facets_per_topic: 5,
            facet_weight: 0.8,
            n_documents: 20_000,
            doc_length_mean: 50.0,
            doc_length_sd: 10.0,
            zipf_exponent: 1.0,
            referential_frames: 3,
            frame_half_width: 5,
            pseudowords: default_pseudowords(10, 200),
            seed: 2019,
        }
    }
}

/// `per_kind` pseudowords of each kind, named `shift00`, `referential00`,
/// `stable00`, ...
pub fn default_pseudowords(per_kind: usize, occurrences: usize) -> Vec<Pseudoword> {
    Kind::ALL
        .iter()
        .flat_map(|&kind| {
            (0..per_kind).map(move |i| Pseudoword {
                name: format!("{kind}{i:02}"),
                kind,
                occurrences,
            })
        })
        .collect()
}

impl SynthSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("synth spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Param(m));
        if self.n_topics < 2 {
            return fail("n_topics must be at least 2".into());
        }
        if self.topic_vocab_size < 2 * self.frame_half_width.max(1) {
            return fail("topic_vocab_size is too small".into());
        }
        if self.facets_per_topic == 0 || self.facets_per_topic > self.topic_vocab_size {
            return fail("facets_per_topic must be between 1 and topic_vocab_size".into());
        }
        if !(0.0..=1.0).contains(&self.facet_weight) {
            return fail("facet_weight must lie in [0, 1]".into());
        }
        if self.n_documents == 0 {
            return fail("n_documents must be positive".into());
        }
        if !(self.doc_length_mean >= min_doc_len(self) as f64) || !(self.doc_length_sd >= 0.0) {
            return fail(format!(
                "doc_length_mean must be at least {} and doc_length_sd non-negative",
                min_doc_len(self)
            ));
        }
        if !(self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite()) {
            return fail("zipf_exponent must be finite and non-negative".into());
        }
        if self.referential_frames == 0 || self.referential_frames > 5 {
            return fail("referential_frames must be between 1 and 5".into());
        }
        if self.frame_half_width == 0 {
            return fail("frame_half_width must be at least 1".into());
        }
        let mut names = HashSet::new();
        for p in &self.pseudowords {
            if p.occurrences < 10 {
                return fail(format!("pseudoword {} needs at least 10 occurrences per bin", p.name));
            }
            if !names.insert(p.name.as_str()) {
                return fail(format!("pseudoword {} listed twice", p.name));
            }
            if p.name.is_empty() || p.name.chars().any(|c| !c.is_alphanumeric()) || p.name != p.name.to_lowercase() {
                return fail(format!("pseudoword name {:?} must be lowercase alphanumeric", p.name));
            }
            if is_natural_word(&p.name) {
                return fail(format!("pseudoword {} collides with the topic vocabulary", p.name));
            }
        }
        Ok(())
    }
}

/// Natural words are named `t<topic>w<rank>`.
pub fn natural_word(topic: usize, rank: usize) -> String {
    format!("t{topic}w{rank}")
}

fn is_natural_word(word: &str) -> bool {
    let Some(rest) = word.strip_prefix('t') else {
        return false;
    };
    let Some((topic, rank)) = rest.split_once('w') else {
        return false;
    };
    !topic.is_empty()
        && !rank.is_empty()
        && topic.chars().all(|c| c.is_ascii_digit())
        && rank.chars().all(|c| c.is_ascii_digit())
}

/// Where a pseudoword lives in each bin.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    pub word: String,
    pub kind: Kind,
    pub topic_t1: usize,
    pub topic_t2: usize,
    /// Facet of `topic_t2` holding the frames of a referential word.
    pub frame_facet: Option<usize>,
    /// Context frames `(left, right)` used in the second bin; empty unless
    /// the word is referential.
    pub frames: Vec<(Vec<String>, Vec<String>)>,
}

#[derive(Clone, Debug)]
pub struct SynthCorpus {
    pub corpus: TimeBinnedCorpus,
    pub gold: BTreeMap<String, Kind>,
    pub placements: Vec<Placement>,
}

impl SynthCorpus {
    /// Writes the corpus directory plus `gold.tsv` (`word<TAB>kind`).
    pub fn save(&self, dir: &Path) -> Result<()> {
        self.corpus.save(dir)?;
        crate::io::write_atomic(&dir.join("gold.tsv"), |w| write_gold(&self.gold, w))
    }
}

pub fn write_gold<W: Write>(gold: &BTreeMap<String, Kind>, mut w: W) -> std::io::Result<()> {
    for (word, kind) in gold {
        writeln!(w, "{word}\t{kind}")?;
    }
    Ok(())
}

pub fn load_gold(path: &Path) -> Result<BTreeMap<String, Kind>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let (word, kind) = line
                .split_once('\t')
                .ok_or_else(|| Error::Format(format!("{}: malformed gold row {line:?}", path.display())))?;
            Ok((word.to_owned(), kind.trim().parse()?))
        })
        .collect()
}

/// Word `t<topic>w<rank>` belongs to facet `rank % facets` and has Zipf
/// rank `rank / facets` within it.
struct TopicSampler {
    /// `words[topic][facet]`, most frequent first.
    words: Vec<Vec<Vec<String>>>,
    /// Rank distribution per facet (facet sizes differ by at most one).
    rank: Vec<WeightedIndex<f64>>,
    facet_weight: f64,
}

impl TopicSampler {
    fn new(spec: &SynthSpec) -> Result<Self> {
        let f = spec.facets_per_topic;
        let words = (0..spec.n_topics)
            .map(|t| {
                (0..f)
                    .map(|facet| (facet..spec.topic_vocab_size).step_by(f).map(|r| natural_word(t, r)).collect())
                    .collect()
            })
            .collect::<Vec<Vec<Vec<String>>>>();
        let rank = words[0]
            .iter()
            .map(|facet_words| {
                let weights = (1..=facet_words.len()).map(|r| (r as f64).powf(-spec.zipf_exponent));
                WeightedIndex::new(weights).map_err(|e| Error::Param(format!("zipf weights: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(TopicSampler {
            words,
            rank,
            facet_weight: spec.facet_weight,
        })
    }

    fn facets(&self) -> usize {
        self.rank.len()
    }

    /// A word of `facet` in `topic`.
    fn draw<R: Rng>(&self, topic: usize, facet: usize, rng: &mut R) -> String {
        self.words[topic][facet][self.rank[facet].sample(rng)].clone()
    }

    /// A token of a document about `topic` leaning towards `facet`.
    fn draw_token<R: Rng>(&self, topic: usize, facet: usize, rng: &mut R) -> String {
        let facet = if rng.random::<f64>() < self.facet_weight {
            facet
        } else {
            rng.random_range(0..self.facets())
        };
        self.draw(topic, facet, rng)
    }
}

/// One bin's documents with their topic and facet labels.
struct BinDraft {
    docs: Vec<Vec<String>>,
    by_topic: Vec<Vec<usize>>,
    by_facet: Vec<Vec<Vec<usize>>>,
    /// Positions already holding a planted token or frame.
    reserved: HashSet<(usize, usize)>,
}

impl BinDraft {
    fn generate<R: Rng>(spec: &SynthSpec, sampler: &TopicSampler, rng: &mut R) -> Result<Self> {
        let lengths = Normal::new(spec.doc_length_mean, spec.doc_length_sd)
            .map_err(|e| Error::Param(format!("document length distribution: {e}")))?;
        let min_len = min_doc_len(spec);
        let mut docs = Vec::with_capacity(spec.n_documents);
        let mut by_topic = vec![Vec::new(); spec.n_topics];
        let mut by_facet = vec![vec![Vec::new(); spec.facets_per_topic]; spec.n_topics];
        for d in 0..spec.n_documents {
            let topic = d % spec.n_topics;
            let facet = (d / spec.n_topics) % spec.facets_per_topic;
            let len = (lengths.sample(rng).round().max(0.0) as usize).max(min_len);
            docs.push((0..len).map(|_| sampler.draw_token(topic, facet, rng)).collect());
            by_topic[topic].push(d);
            by_facet[topic][facet].push(d);
        }
        Ok(BinDraft {
            docs,
            by_topic,
            by_facet,
            reserved: HashSet::new(),
        })
    }

    /// Writes `left word right` at a free spot in a random document of
    /// `topic` (of `facet` if given), the word landing at the center.
    fn plant<R: Rng>(
        &mut self,
        topic: usize,
        facet: Option<usize>,
        left: &[String],
        word: &str,
        right: &[String],
        rng: &mut R,
    ) -> Result<()> {
        const ATTEMPTS: usize = 1000;
        let pool = match facet {
            Some(f) => &self.by_facet[topic][f],
            None => &self.by_topic[topic],
        };
        for _ in 0..ATTEMPTS {
            let Some(&d) = pool.choose(rng) else { break };
            let len = self.docs[d].len();
            let span = left.len() + 1 + right.len();
            if len < span {
                continue;
            }
            let start = rng.random_range(0..=len - span);
            if (start..start + span).any(|p| self.reserved.contains(&(d, p))) {
                continue;
            }
            let doc = &mut self.docs[d];
            doc[start..start + left.len()].clone_from_slice(left);
            doc[start + left.len()] = word.to_owned();
            doc[start + left.len() + 1..start + span].clone_from_slice(right);
            self.reserved.extend((start..start + span).map(|p| (d, p)));
            return Ok(());
        }
        Err(Error::Param(format!(
            "could not place {word} in topic {topic}; the spec plants more tokens than the corpus holds"
        )))
    }
}

fn check_capacity(spec: &SynthSpec, placements: &[Placement]) -> Result<()> {
    let per_topic = spec.n_documents as f64 / spec.n_topics as f64 * spec.doc_length_mean;
    let per_facet = per_topic / spec.facets_per_topic as f64;
    // Planted tokens per (bin, topic) and per (topic, facet) for frames.
    let mut topic_demand = vec![[0.0f64; 2]; spec.n_topics];
    let mut facet_demand: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (p, pl) in spec.pseudowords.iter().zip(placements) {
        let n = p.occurrences as f64;
        topic_demand[pl.topic_t1][0] += n;
        match pl.frame_facet {
            Some(f) => {
                let tokens = n * min_doc_len(spec) as f64;
                topic_demand[pl.topic_t2][1] += tokens;
                *facet_demand.entry((pl.topic_t2, f)).or_default() += tokens;
            }
            None => topic_demand[pl.topic_t2][1] += n,
        }
    }
    for (topic, d) in topic_demand.iter().enumerate() {
        for (bin, &tokens) in d.iter().enumerate() {
            if tokens > 0.25 * per_topic {
                return Err(Error::Param(format!(
                    "infeasible spec: topic {topic} in bin {} needs {tokens} planted tokens, more than a quarter of its ~{per_topic:.0}",
                    bin + 1
                )));
            }
        }
    }
    for (&(topic, facet), &tokens) in &facet_demand {
        if tokens > 0.25 * per_facet {
            return Err(Error::Param(format!(
                "infeasible spec: frames in topic {topic} facet {facet} need {tokens} tokens, more than a quarter of its ~{per_facet:.0}"
            )));
        }
    }
    Ok(())
}

/// Generates both bins and the gold labels. Deterministic given the seed.
pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sampler = TopicSampler::new(spec)?;

    let placements: Vec<Placement> = spec
        .pseudowords
        .iter()
        .map(|p| {
            let topic_t1 = rng.random_range(0..spec.n_topics);
            let topic_t2 = match p.kind {
                Kind::Shift => (topic_t1 + rng.random_range(1..spec.n_topics)) % spec.n_topics,
                _ => topic_t1,
            };
            let frame_facet = (p.kind == Kind::Referential).then(|| rng.random_range(0..spec.facets_per_topic));
            let frames = match frame_facet {
                Some(facet) => (0..spec.referential_frames)
                    .map(|_| {
                        let mut side = || -> Vec<String> {
                            (0..spec.frame_half_width).map(|_| sampler.draw(topic_t1, facet, &mut rng)).collect()
                        };
                        (side(), side())
                    })
                    .collect(),
                None => Vec::new(),
            };
            Placement {
                word: p.name.clone(),
                kind: p.kind,
                topic_t1,
                topic_t2,
                frame_facet,
                frames,
            }
        })
        .collect();
    check_capacity(spec, &placements)?;

    let mut corpus = TimeBinnedCorpus::new(vec![
        // 2011-01-01 .. 2014-01-01 and 2017-01-01 .. 2018-01-01
        TimeBin::new(FIRST_BIN, 1_293_840_000, 1_388_534_400)?,
        TimeBin::new(SECOND_BIN, 1_483_228_800, 1_514_764_800)?,
    ])?;
    for bin in 0..2 {
        let mut draft = BinDraft::generate(spec, &sampler, &mut rng)?;
        for (p, pl) in spec.pseudowords.iter().zip(&placements) {
            for _ in 0..p.occurrences {
                if bin == 1 && pl.kind == Kind::Referential {
                    let (left, right) = pl.frames.choose(&mut rng).expect("at least one frame");
                    draft.plant(pl.topic_t2, pl.frame_facet, left, &p.name, right, &mut rng)?;
                } else {
                    let topic = if bin == 0 { pl.topic_t1 } else { pl.topic_t2 };
                    draft.plant(topic, None, &[], &p.name, &[], &mut rng)?;
                }
            }
        }
        for doc in draft.docs {
            corpus.push_document(bin, doc);
        }
    }

    let gold = spec.pseudowords.iter().map(|p| (p.name.clone(), p.kind)).collect();
    Ok(SynthCorpus {
        corpus,
        gold,
        placements,
    })
}

/// Pipeline settings for [`score_benchmark`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub train: TrainParams,
    pub min_count: u64,
    pub variability_window: usize,
    pub max_contexts: usize,
    pub variability_seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            train: TrainParams {
                dim: 100,
                epochs: 5,
                ..TrainParams::default()
            },
            min_count: 5,
            variability_window: 5,
            max_contexts: 200,
            variability_seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordScore {
    pub word: String,
    pub kind: Kind,
    pub cosine: f64,
    pub variability: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        Some(Summary { n, mean, sd })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkReport {
    pub words: Vec<WordScore>,
    pub cosine_by_kind: BTreeMap<Kind, Summary>,
    pub variability_by_kind: BTreeMap<Kind, Summary>,
    /// Median cosine distance over the whole shared vocabulary.
    pub median_cosine: f64,
    /// Ranking AUC of cosine distance, shift against stable. `None` when
    /// either kind is absent.
    pub auc_shift_vs_stable: Option<f64>,
    /// Variability of referential against shift pseudowords.
    pub referential_vs_shift: Option<RankSum>,
    /// Variability against the binary gold label "is shift", all pseudowords.
    pub variability_vs_gold: Option<Correlation>,
    /// Variability against cosine over stable and referential pseudowords.
    pub variability_vs_cosine_nonshift: Option<Correlation>,
    pub train_t1: TrainStats,
    pub train_t2: TrainStats,
    pub variability_params: VariabilityParams,
}

/// Trains the first bin from random vectors, chains the second bin from
/// it, and scores every gold pseudoword by cosine distance and by
/// contextual variability in the second bin.
pub fn score_benchmark(
    corpus: &TimeBinnedCorpus,
    gold: &BTreeMap<String, Kind>,
    config: &BenchmarkConfig,
) -> Result<BenchmarkReport> {
    let t1 = corpus.bin_by_label(FIRST_BIN)?;
    let t2 = corpus.bin_by_label(SECOND_BIN)?;
    let stage = |name: &'static str| move |e: Error| Error::data(format!("benchmark {name}: {e}"));

    let v1 = build_vocab(t1, config.min_count).map_err(stage("vocabulary"))?;
    let v2 = build_vocab(t2, config.min_count).map_err(stage("vocabulary"))?;
    let vocab = intersect_vocabs(&v1, &[&v2]).map_err(stage("vocabulary"))?;

    let m0 = init_random(&vocab, &config.train).map_err(stage("init"))?;
    let (m1, train_t1) = train_with_stats(m0, t1, &config.train).map_err(stage("training t1"))?;
    let m2 = init_from(&m1, &vocab).map_err(stage("chaining"))?;
    let (m2, train_t2) = train_with_stats(m2, t2, &config.train).map_err(stage("training t2"))?;

    let mut all_scores: Vec<f64> = vocab
        .words()
        .iter()
        .map(|w| shift_score(&m1, &m2, w))
        .collect::<Result<_>>()?;
    all_scores.sort_by(f64::total_cmp);
    let median_cosine = median_sorted(&all_scores);

    let scored: Vec<(&String, Kind)> = gold
        .iter()
        .filter(|(w, _)| vocab.contains(w))
        .map(|(w, &k)| (w, k))
        .collect();
    let names: Vec<&str> = scored.iter().map(|(w, _)| w.as_str()).collect();
    let variability_params = VariabilityParams {
        window: config.variability_window,
        max_contexts: config.max_contexts,
        seed: config.variability_seed,
    };
    let variability = variability_report(t2, &names, &m2, &variability_params);
    let words = scored
        .iter()
        .zip(variability)
        .map(|(&(w, kind), var)| {
            Ok(WordScore {
                word: w.clone(),
                kind,
                cosine: shift_score(&m1, &m2, w)?,
                variability: var.variability.ok(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let cosines = |k: Kind| -> Vec<f64> { words.iter().filter(|s| s.kind == k).map(|s| s.cosine).collect() };
    let variabilities =
        |k: Kind| -> Vec<f64> { words.iter().filter(|s| s.kind == k).filter_map(|s| s.variability).collect() };
    let cosine_by_kind = Kind::ALL.iter().filter_map(|&k| Summary::of(&cosines(k)).map(|s| (k, s))).collect();
    let variability_by_kind =
        Kind::ALL.iter().filter_map(|&k| Summary::of(&variabilities(k)).map(|s| (k, s))).collect();

    let with_var: Vec<&WordScore> = words.iter().filter(|s| s.variability.is_some()).collect();
    let variability_vs_gold = {
        let v: Vec<f64> = with_var.iter().filter_map(|s| s.variability).collect();
        let g: Vec<f64> = with_var.iter().map(|s| f64::from(u8::from(s.kind == Kind::Shift))).collect();
        pearson(&v, &g).ok()
    };
    let variability_vs_cosine_nonshift = {
        let rows: Vec<&&WordScore> = with_var.iter().filter(|s| s.kind != Kind::Shift).collect();
        let v: Vec<f64> = rows.iter().filter_map(|s| s.variability).collect();
        let c: Vec<f64> = rows.iter().map(|s| s.cosine).collect();
        pearson(&v, &c).ok()
    };
    let (ref_var, shift_var) = (variabilities(Kind::Referential), variabilities(Kind::Shift));

    Ok(BenchmarkReport {
        auc_shift_vs_stable: auc(&cosines(Kind::Shift), &cosines(Kind::Stable)),
        referential_vs_shift: rank_sum_test(&ref_var, &shift_var).ok(),
        variability_vs_gold,
        variability_vs_cosine_nonshift,
        cosine_by_kind,
        variability_by_kind,
        median_cosine,
        words,
        train_t1,
        train_t2,
        variability_params,
    })
}

fn median_sorted(v: &[f64]) -> f64 {
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.4}"))
}

impl BenchmarkReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(format!(
            "training: t1 {} tokens at {:.0} tokens/s, t2 {} tokens at {:.0} tokens/s",
            self.train_t1.tokens,
            self.train_t1.tokens_per_second(),
            self.train_t2.tokens,
            self.train_t2.tokens_per_second()
        ));
        line(format!("median cosine distance (vocabulary): {:.4}", self.median_cosine));
        for kind in Kind::ALL {
            let c = self.cosine_by_kind.get(&kind);
            let v = self.variability_by_kind.get(&kind);
            line(format!(
                "{kind:>12}: n={} cosine {}±{} variability {}±{}",
                c.map_or(0, |s| s.n),
                fmt_opt(c.map(|s| s.mean)),
                fmt_opt(c.map(|s| s.sd)),
                fmt_opt(v.map(|s| s.mean)),
                fmt_opt(v.map(|s| s.sd)),
            ));
        }
        line(format!("AUC cosine shift vs stable: {}", fmt_opt(self.auc_shift_vs_stable)));
        line(format!(
            "variability referential vs shift: U={} p={}",
            fmt_opt(self.referential_vs_shift.map(|r| r.u)),
            self.referential_vs_shift.map_or_else(|| "n/a".to_owned(), |r| format!("{:.3e}", r.p))
        ));
        for (name, c) in [
            ("variability vs gold shift", self.variability_vs_gold),
            ("variability vs cosine (stable+referential)", self.variability_vs_cosine_nonshift),
        ] {
            line(format!(
                "{name}: r={} p={}",
                fmt_opt(c.map(|c| c.r)),
                c.map_or_else(|| "n/a".to_owned(), |c| format!("{:.3e}", c.p))
            ));
        }
        line(format!(
            "variability window {} cap {} seed {}",
            self.variability_params.window, self.variability_params.max_contexts, self.variability_params.seed
        ));
        out
    }

    /// `word, kind, cosine, variability` rows.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "word\tkind\tcosine\tvariability")?;
        for s in &self.words {
            let v = s.variability.map_or_else(|| "NA".to_owned(), |v| v.to_string());
            writeln!(w, "{}\t{}\t{}\t{}", s.word, s.kind, s.cosine, v)?;
        }
        Ok(())
    }
}

/// Distinct natural words within `window` positions of each occurrence of
/// `word` in a bin.
pub fn context_words(bin: CorpusBin<'_>, word: &str, window: usize) -> HashSet<String> {
    let mut out = HashSet::new();
    for doc in bin.documents {
        for (i, tok) in doc.iter().enumerate() {
            if tok == word {
                let lo = i.saturating_sub(window);
                let hi = (i + window + 1).min(doc.len());
                out.extend(
                    doc[lo..hi]
                        .iter()
                        .enumerate()
                        .filter(|&(j, t)| lo + j != i && is_natural_word(t))
                        .map(|(_, t)| t.clone()),
                );
            }
        }
    }
    out
}

/// Topic of a natural word, parsed from its name.
pub fn topic_of(word: &str) -> Option<usize> {
    if !is_natural_word(word) {
        return None;
    }
    word[1..].split_once('w').and_then(|(t, _)| t.parse().ok())
}
