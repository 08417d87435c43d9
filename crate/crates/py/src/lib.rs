//! Python bindings: corpora, chained embedding training, shift scores,
//! contextual variability and the evaluation statistics.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyKeyError, PyOSError, PyValueError};
use pyo3::prelude::*;

use shortshift::corpus::{self, TimeBin, TimeBinnedCorpus};
use shortshift::embedding::{self, EmbeddingModel, TrainParams};
use shortshift::eval::{self, SdKind};
use shortshift::shift::{self, RegionThresholds};
use shortshift::synth::{self, SynthSpec};
use shortshift::variability::{self, VariabilityParams};
use shortshift::Error;

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Param(_) | Error::Data(_) | Error::Format(_) | Error::Truncated(_) => PyValueError::new_err(msg),
        Error::Io { .. } | Error::Stream(_) => PyOSError::new_err(msg),
        Error::Numeric(_) => PyArithmeticError::new_err(msg),
    }
}

fn ok<T>(r: shortshift::Result<T>) -> PyResult<T> {
    r.map_err(py_err)
}

/// Tokenized documents grouped into labeled time bins.
#[pyclass(name = "Corpus", module = "shortshift", skip_from_py_object)]
#[derive(Clone)]
pub struct PyCorpus {
    pub inner: TimeBinnedCorpus,
}

#[pymethods]
impl PyCorpus {
    #[new]
    fn new() -> Self {
        PyCorpus {
            inner: TimeBinnedCorpus::default(),
        }
    }

    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        Ok(PyCorpus {
            inner: ok(TimeBinnedCorpus::load(&dir))?,
        })
    }

    fn save(&self, dir: PathBuf) -> PyResult<()> {
        ok(self.inner.save(&dir))
    }

    /// Adds `documents` (lists of tokens) to the bin `label`, creating an
    /// unbounded bin if it does not exist.
    fn add_documents(&mut self, label: &str, documents: Vec<Vec<String>>) -> PyResult<()> {
        let bin = match self.inner.bin_index(label) {
            Some(i) => i,
            None => ok(self.inner.add_bin(ok(TimeBin::unbounded(label))?))?,
        };
        for doc in documents {
            self.inner.push_document(bin, doc);
        }
        Ok(())
    }

    /// Adds raw text lines as documents, tokenized like ingested text.
    fn add_texts(&mut self, label: &str, texts: Vec<String>) -> PyResult<()> {
        let docs = texts.iter().map(|t| corpus::tokenize(t)).collect();
        self.add_documents(label, docs)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.bins().iter().map(|b| b.label.clone()).collect()
    }

    fn documents(&self, label: &str) -> PyResult<Vec<Vec<String>>> {
        Ok(self.inner.documents(self.index(label)?).to_vec())
    }

    fn token_count(&self, label: &str) -> PyResult<u64> {
        Ok(self.inner.token_count(self.index(label)?))
    }

    fn __repr__(&self) -> String {
        let bins: Vec<String> = self
            .inner
            .bins()
            .iter()
            .enumerate()
            .map(|(i, b)| format!("{}: {} docs", b.label, self.inner.documents(i).len()))
            .collect();
        format!("Corpus({})", bins.join(", "))
    }
}

impl PyCorpus {
    fn index(&self, label: &str) -> PyResult<usize> {
        self.inner
            .bin_index(label)
            .ok_or_else(|| PyKeyError::new_err(format!("no bin {label:?}")))
    }
}

/// Word counts of one bin, ids ordered by descending count.
#[pyclass(name = "Vocabulary", module = "shortshift", skip_from_py_object, frozen)]
#[derive(Clone)]
pub struct PyVocabulary {
    pub inner: corpus::Vocabulary,
}

#[pymethods]
impl PyVocabulary {
    #[staticmethod]
    fn from_counts(counts: HashMap<String, u64>, total_tokens: u64) -> PyResult<Self> {
        Ok(PyVocabulary {
            inner: ok(corpus::Vocabulary::from_counts(counts, total_tokens))?,
        })
    }

    #[getter]
    fn words(&self) -> Vec<String> {
        self.inner.words().to_vec()
    }

    #[getter]
    fn total_tokens(&self) -> u64 {
        self.inner.total_tokens()
    }

    fn count(&self, word: &str) -> Option<u64> {
        self.inner.count_of(word)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, word: &str) -> bool {
        self.inner.contains(word)
    }
}

/// Word vectors plus the hierarchical-softmax tree they were trained with.
#[pyclass(name = "Model", module = "shortshift", skip_from_py_object)]
#[derive(Clone)]
pub struct PyModel {
    pub inner: EmbeddingModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyModel {
            inner: ok(embedding::load_model(&path))?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        ok(embedding::save_model(&self.inner, &path))
    }

    fn save_text(&self, path: PathBuf) -> PyResult<()> {
        ok(embedding::save_text(&self.inner, &path))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn bin_label(&self) -> String {
        self.inner.bin_label().to_owned()
    }

    #[getter]
    fn vocabulary(&self) -> PyVocabulary {
        PyVocabulary {
            inner: self.inner.vocab().clone(),
        }
    }

    fn vector(&self, word: &str) -> PyResult<Vec<f32>> {
        self.inner
            .vector(word)
            .map(<[f32]>::to_vec)
            .ok_or_else(|| PyKeyError::new_err(format!("{word:?} is not in the vocabulary")))
    }

    fn __contains__(&self, word: &str) -> bool {
        self.inner.vocab().contains(word)
    }

    fn __len__(&self) -> usize {
        self.inner.vocab().len()
    }
}

/// Binary shift judgments of annotators about words.
#[pyclass(name = "JudgmentTable", module = "shortshift", skip_from_py_object)]
#[derive(Clone)]
pub struct PyJudgmentTable {
    pub inner: eval::JudgmentTable,
}

#[pymethods]
impl PyJudgmentTable {
    /// From `(annotator, word, judgment)` triples.
    #[new]
    #[pyo3(signature = (triples = Vec::new()))]
    fn new(triples: Vec<(String, String, u8)>) -> PyResult<Self> {
        let mut inner = eval::JudgmentTable::new();
        for (a, w, j) in &triples {
            ok(inner.insert(a, w, j.to_owned()))?;
        }
        Ok(PyJudgmentTable { inner })
    }

    #[staticmethod]
    fn load_csv(path: PathBuf) -> PyResult<Self> {
        Ok(PyJudgmentTable {
            inner: ok(eval::JudgmentTable::load_csv(&path))?,
        })
    }

    fn insert(&mut self, annotator: &str, word: &str, judgment: u8) -> PyResult<()> {
        ok(self.inner.insert(annotator, word, judgment))
    }

    #[getter]
    fn words(&self) -> Vec<String> {
        self.inner.words().to_vec()
    }

    #[getter]
    fn annotators(&self) -> Vec<String> {
        self.inner.annotators().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn train_params(dim: u32, epochs: u32, seed: u64, threads: u32) -> PyResult<TrainParams> {
    let params = TrainParams {
        dim,
        epochs,
        seed,
        threads,
        ..TrainParams::default()
    };
    ok(params.validate())?;
    Ok(params)
}

/// Generates a synthetic two-bin corpus with planted pseudowords. Returns
/// the corpus and a `{pseudoword: kind}` dict.
#[pyfunction]
#[pyo3(signature = (spec_toml = None, seed = None))]
fn synth_generate(spec_toml: Option<&str>, seed: Option<u64>) -> PyResult<(PyCorpus, BTreeMap<String, String>)> {
    let mut spec = match spec_toml {
        Some(text) => ok(SynthSpec::from_toml(text))?,
        None => SynthSpec::default(),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    let out = ok(synth::generate(&spec))?;
    let gold = out.gold.iter().map(|(w, k)| (w.clone(), k.to_string())).collect();
    Ok((PyCorpus { inner: out.corpus }, gold))
}

#[pyfunction]
#[pyo3(signature = (corpus, label, min_count = 1))]
fn build_vocab(corpus: &PyCorpus, label: &str, min_count: u64) -> PyResult<PyVocabulary> {
    let bin = ok(corpus.inner.bin_by_label(label))?;
    Ok(PyVocabulary {
        inner: ok(corpus::build_vocab(bin, min_count))?,
    })
}

/// Keeps the words of `reference` present in every one of `others`.
#[pyfunction]
fn intersect_vocabs(reference: &PyVocabulary, others: Vec<PyRef<'_, PyVocabulary>>) -> PyResult<PyVocabulary> {
    let others: Vec<&corpus::Vocabulary> = others.iter().map(|v| &v.inner).collect();
    Ok(PyVocabulary {
        inner: ok(corpus::intersect_vocabs(&reference.inner, &others))?,
    })
}

#[pyfunction]
#[pyo3(signature = (vocabulary, dim = 200, seed = 1))]
fn init_random(vocabulary: &PyVocabulary, dim: u32, seed: u64) -> PyResult<PyModel> {
    let params = train_params(dim, 5, seed, 1)?;
    Ok(PyModel {
        inner: ok(embedding::init_random(&vocabulary.inner, &params))?,
    })
}

/// A copy of `parent` to continue training on a later bin.
#[pyfunction]
fn init_from(parent: &PyModel) -> PyResult<PyModel> {
    Ok(PyModel {
        inner: ok(embedding::init_from(&parent.inner, parent.inner.vocab()))?,
    })
}

/// Trains `model` on the bin `label` and returns the trained copy. The
/// interpreter lock is released while training.
#[pyfunction]
#[pyo3(signature = (model, corpus, label, epochs = 5, seed = 1, threads = 1))]
fn train(
    py: Python<'_>,
    model: &PyModel,
    corpus: &PyCorpus,
    label: &str,
    epochs: u32,
    seed: u64,
    threads: u32,
) -> PyResult<PyModel> {
    let params = train_params(model.inner.dim() as u32, epochs, seed, threads)?;
    let start = model.inner.clone();
    let c = &corpus.inner;
    let trained = py.detach(|| {
        let bin = c.bin_by_label(label)?;
        embedding::train(start, bin, &params)
    });
    Ok(PyModel { inner: ok(trained)? })
}

#[pyfunction]
fn shift_score(t1: &PyModel, t2: &PyModel, word: &str) -> PyResult<f64> {
    ok(shift::shift_score(&t1.inner, &t2.inner, word))
}

/// `(word, cosine distance)` pairs, largest shift first.
#[pyfunction]
fn rank_shifts(t1: &PyModel, t2: &PyModel, words: Vec<String>) -> PyResult<Vec<(String, f64)>> {
    let records = ok(shift::rank_shifts(&t1.inner, &t2.inner, &words))?;
    Ok(records.into_iter().map(|r| (r.word, r.cosine)).collect())
}

/// Contextual variability of each word in the bin `label`; `None` where a
/// word has too few usable contexts.
#[pyfunction]
#[pyo3(signature = (corpus, label, model, words, window = 5, max_contexts = 200, seed = 1))]
fn contextual_variability(
    py: Python<'_>,
    corpus: &PyCorpus,
    label: &str,
    model: &PyModel,
    words: Vec<String>,
    window: usize,
    max_contexts: usize,
    seed: u64,
) -> PyResult<BTreeMap<String, Option<f64>>> {
    let params = VariabilityParams {
        window,
        max_contexts,
        seed,
    };
    let bin = ok(corpus.inner.bin_by_label(label))?;
    let m = &model.inner;
    let entries = py.detach(|| variability::variability_report(bin, &words, m, &params));
    Ok(entries.into_iter().map(|e| (e.word, e.variability.ok())).collect())
}

/// Pearson correlation `(r, two-sided p)`.
#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64)> {
    let c = ok(eval::pearson(&x, &y))?;
    Ok((c.r, c.p))
}

/// Krippendorff's alpha for the nominal binary judgments.
#[pyfunction]
fn krippendorff_alpha(table: &PyJudgmentTable) -> PyResult<f64> {
    Ok(ok(eval::krippendorff_alpha(&table.inner))?.alpha)
}

/// Fraction of judgments that say "shifted", per word.
#[pyfunction]
fn shift_index(table: &PyJudgmentTable) -> PyResult<BTreeMap<String, f64>> {
    Ok(ok(eval::shift_index(&table.inner))?.index)
}

/// `{group: (n, mean, sd)}` of the shift index over labeled words.
#[pyfunction]
#[pyo3(signature = (table, groups, sample_sd = false))]
fn group_stats(
    table: &PyJudgmentTable,
    groups: HashMap<String, String>,
    sample_sd: bool,
) -> PyResult<BTreeMap<String, (usize, f64, f64)>> {
    let index = ok(eval::shift_index(&table.inner))?;
    let kind = if sample_sd { SdKind::Sample } else { SdKind::Population };
    let stats = ok(eval::group_stats(&index, &groups, kind))?;
    Ok(stats.into_iter().map(|(g, s)| (g, (s.n, s.mean, s.sd))).collect())
}

/// Correlates `scores` with the shift index. Returns `(r, p, rows)` where
/// each row is `(word, shift_index, score, region)`.
#[pyfunction]
fn evaluate(
    table: &PyJudgmentTable,
    scores: HashMap<String, f64>,
) -> PyResult<(f64, f64, Vec<(String, f64, f64, String)>)> {
    let index = ok(eval::shift_index(&table.inner))?;
    let report = ok(eval::evaluate(&scores, &index, &RegionThresholds::default()))?;
    let rows = report
        .rows
        .into_iter()
        .map(|r| (r.word, r.shift_index, r.score, r.region.to_string()))
        .collect();
    Ok((report.correlation.r, report.correlation.p, rows))
}

/// Name of the training kernel selected for this CPU.
#[pyfunction]
fn kernel_name() -> &'static str {
    embedding::kernel_name()
}

#[pymodule]
#[pyo3(name = "shortshift")]
pub fn shortshift_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", shortshift::VERSION)?;
    m.add_class::<PyCorpus>()?;
    m.add_class::<PyVocabulary>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyJudgmentTable>()?;
    m.add_function(wrap_pyfunction!(synth_generate, m)?)?;
    m.add_function(wrap_pyfunction!(build_vocab, m)?)?;
    m.add_function(wrap_pyfunction!(intersect_vocabs, m)?)?;
    m.add_function(wrap_pyfunction!(init_random, m)?)?;
    m.add_function(wrap_pyfunction!(init_from, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(shift_score, m)?)?;
    m.add_function(wrap_pyfunction!(rank_shifts, m)?)?;
    m.add_function(wrap_pyfunction!(contextual_variability, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(krippendorff_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(shift_index, m)?)?;
    m.add_function(wrap_pyfunction!(group_stats, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_name, m)?)?;
    Ok(())
}
