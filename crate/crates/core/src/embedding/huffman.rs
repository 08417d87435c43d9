use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Binary prefix code over a vocabulary, used as the hierarchical-softmax
/// output tree.
///
/// For word `w`, `path(w)[k]` is the k-th inner node on the way from the
/// root, and `code(w)[k]` is the branch (0 or 1) taken at that node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuffmanTree {
    codes: Vec<Vec<u8>>,
    paths: Vec<Vec<u32>>,
    inner_count: usize,
}

impl HuffmanTree {
    /// Builds an optimal code for the given leaf weights.
    ///
    /// The two lightest nodes are merged first; equal weights are resolved
    /// in favor of the smaller node id (leaves are `0..n`, inner nodes are
    /// numbered from `n` in creation order). The lighter node takes bit 0.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let n = counts.len();
        if n < 2 {
            return Err(Error::data(format!(
                "hierarchical softmax needs at least 2 words, vocabulary has {n}"
            )));
        }
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
            counts.iter().enumerate().map(|(id, &c)| Reverse((c, id))).collect();
        let mut parent = vec![0usize; 2 * n - 1];
        let mut bit = vec![0u8; 2 * n - 1];
        for next in n..2 * n - 1 {
            let Reverse((c1, lo)) = heap.pop().expect("heap holds at least two nodes");
            let Reverse((c2, hi)) = heap.pop().expect("heap holds at least two nodes");
            parent[lo] = next;
            parent[hi] = next;
            bit[hi] = 1;
            heap.push(Reverse((c1 + c2, next)));
        }
        let root = 2 * n - 2;
        let mut codes = Vec::with_capacity(n);
        let mut paths = Vec::with_capacity(n);
        for leaf in 0..n {
            let mut code = Vec::new();
            let mut path = Vec::new();
            let mut node = leaf;
            while node != root {
                code.push(bit[node]);
                node = parent[node];
                path.push((node - n) as u32);
            }
            code.reverse();
            path.reverse();
            codes.push(code);
            paths.push(path);
        }
        Ok(HuffmanTree {
            codes,
            paths,
            inner_count: n - 1,
        })
    }

    pub(crate) fn from_parts(codes: Vec<Vec<u8>>, paths: Vec<Vec<u32>>, inner_count: usize) -> Result<Self> {
        let consistent = codes.len() == paths.len()
            && codes.iter().zip(&paths).all(|(c, p)| {
                c.len() == p.len()
                    && !c.is_empty()
                    && c.iter().all(|&b| b <= 1)
                    && p.iter().all(|&i| (i as usize) < inner_count)
            });
        if !consistent {
            return Err(Error::Format("inconsistent Huffman tree".into()));
        }
        Ok(HuffmanTree {
            codes,
            paths,
            inner_count,
        })
    }

    /// Keeps the codes of the selected leaves, in the given order. Inner node
    /// numbering is preserved so trained inner vectors stay aligned.
    pub(crate) fn select(&self, leaves: &[u32]) -> Self {
        HuffmanTree {
            codes: leaves.iter().map(|&l| self.codes[l as usize].clone()).collect(),
            paths: leaves.iter().map(|&l| self.paths[l as usize].clone()).collect(),
            inner_count: self.inner_count,
        }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code(&self, word: u32) -> &[u8] {
        &self.codes[word as usize]
    }

    pub fn path(&self, word: u32) -> &[u32] {
        &self.paths[word as usize]
    }

    pub fn inner_count(&self) -> usize {
        self.inner_count
    }

    /// Σ count × code length.
    pub fn weighted_path_length(&self, counts: &[u64]) -> u64 {
        self.codes
            .iter()
            .zip(counts)
            .map(|(code, &c)| c * code.len() as u64)
            .sum()
    }
}

/// Huffman tree over the counts of a vocabulary.
pub fn build_huffman(vocab: &Vocabulary) -> Result<HuffmanTree> {
    HuffmanTree::from_counts(vocab.counts())
}
