//! Binary model files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic "SSEM1" | dim u32 | vocab_size u32
//! vocab block:  total_tokens u64, then per word: len u32, utf-8 bytes, count u64
//! input matrix: vocab_size × dim f32, row-major
//! inner matrix: rows u32, then rows × dim f32, row-major
//! tree block:   per word: code_len u32, code bits as u8, path as u32
//! params block: window u32, lr_initial f64, lr_final f64, epochs u32,
//!               seed u64, threads u32, subsample f64, label len u32, label bytes
//! ```

use std::fs::File;
use std::io::{self, BufReader, ErrorKind, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::{EmbeddingModel, HuffmanTree, TrainParams};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"SSEM1";
pub const FORMAT_VERSION: u32 = 1;

// Refuse absurd length prefixes instead of attempting huge allocations.
const MAX_WORD_BYTES: u32 = 1 << 16;
const MAX_CODE_LEN: u32 = 256;

pub fn write_model<W: Write>(model: &EmbeddingModel, mut w: W) -> io::Result<()> {
    let vocab = &model.vocab;
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(model.params.dim)?;
    w.write_u32::<LE>(vocab.len() as u32)?;

    w.write_u64::<LE>(vocab.total_tokens())?;
    for (word, &count) in vocab.words().iter().zip(vocab.counts()) {
        w.write_u32::<LE>(word.len() as u32)?;
        w.write_all(word.as_bytes())?;
        w.write_u64::<LE>(count)?;
    }

    for &x in &model.input {
        w.write_f32::<LE>(x)?;
    }
    w.write_u32::<LE>(model.tree.inner_count() as u32)?;
    for &x in &model.inner {
        w.write_f32::<LE>(x)?;
    }

    for id in 0..vocab.len() as u32 {
        let code = model.tree.code(id);
        w.write_u32::<LE>(code.len() as u32)?;
        w.write_all(code)?;
        for &node in model.tree.path(id) {
            w.write_u32::<LE>(node)?;
        }
    }

    let p = &model.params;
    w.write_u32::<LE>(p.window)?;
    w.write_f64::<LE>(p.lr_initial)?;
    w.write_f64::<LE>(p.lr_final)?;
    w.write_u32::<LE>(p.epochs)?;
    w.write_u64::<LE>(p.seed)?;
    w.write_u32::<LE>(p.threads)?;
    w.write_f64::<LE>(p.subsample)?;
    w.write_u32::<LE>(model.bin_label.len() as u32)?;
    w.write_all(model.bin_label.as_bytes())?;
    Ok(())
}

fn truncated(what: &str) -> impl Fn(io::Error) -> Error + '_ {
    move |e| {
        if e.kind() == ErrorKind::UnexpectedEof {
            Error::Truncated(format!("model file ends inside the {what}"))
        } else {
            Error::Stream(e)
        }
    }
}

fn read_f32s<R: Read>(r: &mut R, n: usize, what: &str) -> Result<Vec<f32>> {
    let mut bytes = Vec::new();
    let got = r
        .take(n as u64 * 4)
        .read_to_end(&mut bytes)
        .map_err(Error::Stream)?;
    if got != n * 4 {
        return Err(Error::Truncated(format!("model file ends inside the {what}")));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

fn read_string<R: Read>(r: &mut R, what: &str) -> Result<String> {
    let len = r.read_u32::<LE>().map_err(truncated(what))?;
    if len > MAX_WORD_BYTES {
        return Err(Error::Format(format!("{what}: implausible string length {len}")));
    }
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf).map_err(truncated(what))?;
    String::from_utf8(buf).map_err(|_| Error::Format(format!("{what}: invalid UTF-8")))
}

pub fn read_model<R: Read>(mut r: R) -> Result<EmbeddingModel> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(truncated("header"))?;
    if &magic != MAGIC {
        if &magic[..4] == b"SSEM" {
            return Err(Error::Format(format!(
                "unsupported model format version {:?}, expected {FORMAT_VERSION}",
                magic[4] as char
            )));
        }
        return Err(Error::Format("not a model file (bad magic bytes)".into()));
    }
    let dim = r.read_u32::<LE>().map_err(truncated("header"))?;
    let n = r.read_u32::<LE>().map_err(truncated("header"))? as usize;
    if dim == 0 {
        return Err(Error::Format("model dim is zero".into()));
    }

    let total = r.read_u64::<LE>().map_err(truncated("vocabulary"))?;
    let mut entries = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let word = read_string(&mut r, "vocabulary")?;
        let count = r.read_u64::<LE>().map_err(truncated("vocabulary"))?;
        entries.push((word, count));
    }
    let vocab = Vocabulary::from_counts(entries.clone(), total)?;
    if vocab.words().iter().zip(&entries).any(|(a, (b, _))| a != b) {
        return Err(Error::Format("vocabulary block is not in id order".into()));
    }

    let dim_us = dim as usize;
    let input = read_f32s(&mut r, n * dim_us, "input matrix")?;
    let rows = r.read_u32::<LE>().map_err(truncated("inner matrix"))? as usize;
    let inner = read_f32s(&mut r, rows * dim_us, "inner matrix")?;

    let mut codes = Vec::with_capacity(n);
    let mut paths = Vec::with_capacity(n);
    for _ in 0..n {
        let len = r.read_u32::<LE>().map_err(truncated("tree"))?;
        if len > MAX_CODE_LEN {
            return Err(Error::Format(format!("implausible code length {len}")));
        }
        let mut code = vec![0u8; len as usize];
        r.read_exact(&mut code).map_err(truncated("tree"))?;
        let path = (0..len)
            .map(|_| r.read_u32::<LE>())
            .collect::<io::Result<Vec<u32>>>()
            .map_err(truncated("tree"))?;
        codes.push(code);
        paths.push(path);
    }
    let tree = HuffmanTree::from_parts(codes, paths, rows)?;

    let p = || truncated("parameters");
    let params = TrainParams {
        window: r.read_u32::<LE>().map_err(p())?,
        dim,
        lr_initial: r.read_f64::<LE>().map_err(p())?,
        lr_final: r.read_f64::<LE>().map_err(p())?,
        epochs: r.read_u32::<LE>().map_err(p())?,
        seed: r.read_u64::<LE>().map_err(p())?,
        threads: r.read_u32::<LE>().map_err(p())?,
        subsample: r.read_f64::<LE>().map_err(p())?,
    };
    let label = read_string(&mut r, "parameters")?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(Error::Stream)? != 0 {
        return Err(Error::Format("trailing bytes after parameter block".into()));
    }
    EmbeddingModel::from_parts(vocab, input, inner, tree, label, params)
}

/// Writes a model atomically.
pub fn save_model(model: &EmbeddingModel, path: &Path) -> Result<()> {
    crate::io::write_atomic(path, |w| write_model(model, w))
}

pub fn load_model(path: &Path) -> Result<EmbeddingModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(file)).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        Error::Truncated(m) => Error::Truncated(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Exports vectors in word2vec text format.
pub fn save_text(model: &EmbeddingModel, path: &Path) -> Result<()> {
    crate::io::write_atomic(path, |w| model.write_text(w))
}
