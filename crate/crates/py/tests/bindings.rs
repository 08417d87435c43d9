use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

/// Runs `code` with the module bound to `ss`.
fn run(code: &str) {
    Python::attach(|py| {
        let m = PyModule::new(py, "shortshift").unwrap();
        shortshift_py::shortshift_module(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("ss", m).unwrap();
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python code failed");
        }
    });
}

#[test]
fn statistics_match_hand_values() {
    run(r#"
r, p = ss.pearson([1, 2, 3, 4, 5], [2, 1, 4, 3, 5])
assert abs(r - 0.8) < 1e-12, r
assert abs(p - 0.10408803866182779) < 1e-6, p
t = ss.JudgmentTable([("a", "x", 1), ("b", "x", 1), ("a", "y", 0), ("b", "y", 0)])
assert ss.krippendorff_alpha(t) == 1.0
t.insert("c", "y", 1)
idx = ss.shift_index(t)
assert idx == {"x": 1.0, "y": 1 / 3}, idx
g = ss.group_stats(t, {"x": "s", "y": "s"})
assert g["s"][0] == 2 and abs(g["s"][1] - 2 / 3) < 1e-12
try:
    t.insert("a", "x", 0)
    raise AssertionError("contradiction accepted")
except ValueError:
    pass
"#);
}

#[test]
fn chained_training_and_scoring() {
    run(r#"
spec = """
n_topics = 4
facets_per_topic = 2
topic_vocab_size = 80
n_documents = 600
pseudowords = [
  { name = "shifty", kind = "shift", occurrences = 30 },
  { name = "steady", kind = "stable", occurrences = 30 },
]
"""
corpus, gold = ss.synth_generate(spec, seed=5)
assert gold == {"shifty": "shift", "steady": "stable"}
assert corpus.labels == ["t1", "t2"]
v = ss.intersect_vocabs(ss.build_vocab(corpus, "t1"), [ss.build_vocab(corpus, "t2")])
assert "shifty" in v
m1 = ss.train(ss.init_random(v, dim=16, seed=2), corpus, "t1", epochs=2)
m2 = ss.train(ss.init_from(m1), corpus, "t2", epochs=2)
assert m2.dim == 16 and len(m2) == len(v)
d = ss.shift_score(m1, m2, "shifty")
ranked = ss.rank_shifts(m1, m2, ["steady", "shifty"])
assert ranked[0][1] >= ranked[1][1]
assert dict(ranked)["shifty"] == d
again = ss.train(ss.init_random(v, dim=16, seed=2), corpus, "t1", epochs=2)
assert again.vector("shifty") == m1.vector("shifty")
var = ss.contextual_variability(corpus, "t2", m2, ["shifty", "absent"])
assert var["absent"] is None and 0 <= var["shifty"] <= 2
try:
    m1.vector("absent")
    raise AssertionError("missing word returned a vector")
except KeyError:
    pass
"#);
}

#[test]
fn text_corpus_and_evaluation() {
    run(r#"
c = ss.Corpus()
c.add_texts("a", ["The cat sat.", "A dog ran"])
assert c.documents("a")[0][:2] == ["the", "cat"], c.documents("a")
assert c.token_count("a") == 6
t = ss.JudgmentTable([(n, w, j) for w, js in {"x": [1, 1], "y": [1, 0], "z": [0, 0]}.items() for n, j in zip("ab", js)])
r, p, rows = ss.evaluate(t, {"x": 1.0, "y": 0.5, "z": 0.0})
assert abs(r - 1.0) < 1e-12 and [row[0] for row in rows] == ["x", "y", "z"]
assert ss.kernel_name() in ("avx512", "avx2", "portable")
"#);
}
