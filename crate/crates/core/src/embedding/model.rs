use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_huffman, HuffmanTree, TrainParams};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Word embeddings and hierarchical-softmax parameters for one time bin.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub(crate) vocab: Vocabulary,
    /// `|V| × dim`, row-major.
    pub(crate) input: Vec<f32>,
    /// `inner_count × dim`, row-major.
    pub(crate) inner: Vec<f32>,
    pub(crate) tree: HuffmanTree,
    pub(crate) bin_label: String,
    pub(crate) params: TrainParams,
}

impl EmbeddingModel {
    pub(crate) fn from_parts(
        vocab: Vocabulary,
        input: Vec<f32>,
        inner: Vec<f32>,
        tree: HuffmanTree,
        bin_label: String,
        params: TrainParams,
    ) -> Result<Self> {
        let dim = params.dim as usize;
        if input.len() != vocab.len() * dim
            || inner.len() != tree.inner_count() * dim
            || tree.len() != vocab.len()
        {
            return Err(Error::Format("matrix shapes disagree with vocabulary and dim".into()));
        }
        if input.iter().chain(&inner).any(|x| !x.is_finite()) {
            return Err(Error::numeric("model contains non-finite values"));
        }
        Ok(EmbeddingModel {
            vocab,
            input,
            inner,
            tree,
            bin_label,
            params,
        })
    }

    pub fn dim(&self) -> usize {
        self.params.dim as usize
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn tree(&self) -> &HuffmanTree {
        &self.tree
    }

    pub fn params(&self) -> &TrainParams {
        &self.params
    }

    pub fn bin_label(&self) -> &str {
        &self.bin_label
    }

    pub fn set_bin_label(&mut self, label: impl Into<String>) {
        self.bin_label = label.into();
    }

    pub fn input_matrix(&self) -> &[f32] {
        &self.input
    }

    pub fn inner_matrix(&self) -> &[f32] {
        &self.inner
    }

    pub fn vector_by_id(&self, id: u32) -> &[f32] {
        let dim = self.dim();
        &self.input[id as usize * dim..(id as usize + 1) * dim]
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.vocab.id(word).map(|id| self.vector_by_id(id))
    }

    pub fn inner_vector(&self, node: u32) -> &[f32] {
        let dim = self.dim();
        &self.inner[node as usize * dim..(node as usize + 1) * dim]
    }

    /// Whether `other` shares this model's space: same dimension and an
    /// identical tree over the common words.
    pub fn chain_compatible(&self, other: &EmbeddingModel) -> bool {
        self.dim() == other.dim()
            && self.tree.inner_count() == other.tree.inner_count()
            && self.vocab.words().iter().enumerate().all(|(id, w)| match other.vocab.id(w) {
                Some(oid) => {
                    self.tree.code(id as u32) == other.tree.code(oid)
                        && self.tree.path(id as u32) == other.tree.path(oid)
                }
                None => true,
            })
    }

    /// Writes `|V| dim` followed by one `word v1 ... vd` line per word.
    pub fn write_text<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.vocab.len(), self.dim())?;
        for (id, word) in self.vocab.words().iter().enumerate() {
            write!(w, "{word}")?;
            for x in self.vector_by_id(id as u32) {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Fresh model: input vectors uniform in `[-0.5/dim, 0.5/dim)` drawn from a
/// generator seeded with `params.seed`, inner vectors zero, and a Huffman
/// tree over the vocabulary counts.
pub fn init_random(vocab: &Vocabulary, params: &TrainParams) -> Result<EmbeddingModel> {
    params.validate()?;
    let dim = params.dim as usize;
    let tree = build_huffman(vocab)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let scale = 1.0 / dim as f32;
    let input = (0..vocab.len() * dim)
        .map(|_| (rng.random::<f32>() - 0.5) * scale)
        .collect();
    let inner = vec![0.0; tree.inner_count() * dim];
    EmbeddingModel::from_parts(vocab.clone(), input, inner, tree, String::new(), params.clone())
}

/// Model for the next time bin, starting from `parent`.
///
/// Every word of `vocab` must exist in the parent. Input vectors are copied
/// per word; the inner matrix is copied whole and the parent's codes are
/// reused, so the output layer keeps meaning the same thing.
pub fn init_from(parent: &EmbeddingModel, vocab: &Vocabulary) -> Result<EmbeddingModel> {
    let leaves = vocab
        .words()
        .iter()
        .map(|w| {
            parent.vocab.id(w).ok_or_else(|| {
                Error::data(format!("word {w:?} is not in the parent model's vocabulary"))
            })
        })
        .collect::<Result<Vec<u32>>>()?;
    let mut input = Vec::with_capacity(leaves.len() * parent.dim());
    for &leaf in &leaves {
        input.extend_from_slice(parent.vector_by_id(leaf));
    }
    EmbeddingModel::from_parts(
        vocab.clone(),
        input,
        parent.inner.clone(),
        parent.tree.select(&leaves),
        parent.bin_label.clone(),
        parent.params.clone(),
    )
}

/// `1 - cos(u, v)`, in `[0, 2]`.
pub fn cosine_distance(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::data(format!(
            "cannot compare vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    let (mut uv, mut uu, mut vv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (f64::from(a), f64::from(b));
        uv += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::numeric("cosine distance of a zero vector"));
    }
    // sqrt(uu * vv) rather than sqrt(uu) * sqrt(vv): identical vectors then
    // give exactly 0.
    let cos = (uv / (uu * vv).sqrt()).clamp(-1.0, 1.0);
    Ok(1.0 - cos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vocab() -> Vocabulary {
        Vocabulary::from_counts(
            [("a", 4), ("b", 2), ("c", 1), ("d", 1)].map(|(w, c)| (w.to_owned(), c)),
            8,
        )
        .unwrap()
    }

    fn params(dim: u32) -> TrainParams {
        TrainParams { dim, seed: 42, ..Default::default() }
    }

    #[test]
    fn random_init_is_seeded_and_bounded() {
        let a = init_random(&vocab(), &params(200)).unwrap();
        let b = init_random(&vocab(), &params(200)).unwrap();
        assert_eq!(a, b);
        assert!(a.input.iter().all(|x| x.abs() <= 0.0025));
        assert!(a.inner.iter().all(|&x| x == 0.0));
        assert_eq!(a.inner.len(), 3 * 200);
        let c = init_random(&vocab(), &TrainParams { seed: 43, ..params(200) }).unwrap();
        assert_ne!(a.input, c.input);
    }

    #[test]
    fn chained_init_copies_parent() {
        let parent = init_random(&vocab(), &params(8)).unwrap();
        let child = init_from(&parent, &vocab()).unwrap();
        assert_eq!(child, parent);
    }

    #[test]
    fn chained_init_with_subset() {
        let mut parent = init_random(&vocab(), &params(8)).unwrap();
        parent.inner.iter_mut().enumerate().for_each(|(i, x)| *x = i as f32);
        let sub = Vocabulary::from_counts([("d".to_owned(), 9), ("b".to_owned(), 1)], 10).unwrap();
        let child = init_from(&parent, &sub).unwrap();
        assert_eq!(child.vector("d"), parent.vector("d"));
        assert_eq!(child.vector("b"), parent.vector("b"));
        assert_eq!(child.inner, parent.inner);
        assert_eq!(child.tree.code(0), parent.tree.code(parent.vocab.id("d").unwrap()));
        assert!(child.chain_compatible(&parent));
    }

    #[test]
    fn chained_init_rejects_unknown_words() {
        let parent = init_random(&vocab(), &params(8)).unwrap();
        let other = Vocabulary::from_counts([("zzz".to_owned(), 1), ("a".to_owned(), 1)], 2).unwrap();
        assert!(init_from(&parent, &other).is_err());
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_distance(&[0.3, -2.0], &[0.3, -2.0]).unwrap(), 0.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        let d = cosine_distance(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((d - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-7);
        assert!(cosine_distance(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(cosine_distance(&[1.0], &[1.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn cosine_bounded_and_symmetric(
            u in prop::collection::vec(-10.0f32..10.0, 4),
            v in prop::collection::vec(-10.0f32..10.0, 4),
        ) {
            prop_assume!(u.iter().any(|&x| x != 0.0) && v.iter().any(|&x| x != 0.0));
            let d = cosine_distance(&u, &v).unwrap();
            prop_assert!((0.0..=2.0).contains(&d));
            prop_assert_eq!(d, cosine_distance(&v, &u).unwrap());
        }
    }
}
