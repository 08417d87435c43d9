use std::collections::HashMap;

use shortshift::corpus::{build_vocab, intersect_vocabs, TimeBinnedCorpus};
use shortshift::embedding::{init_from, init_random, load_model, save_model, train, TrainParams};
use shortshift::eval::{evaluate, shift_index, JudgmentTable};
use shortshift::shift::{classify_regions, rank_shifts, read_records_tsv, write_records_tsv, RegionThresholds};
use shortshift::synth::{default_pseudowords, generate, load_gold, Kind, SynthSpec, FIRST_BIN, SECOND_BIN};
use shortshift::variability::{variability_report, VariabilityParams};

#[test]
fn synthetic_corpus_through_every_stage() {
    let spec = SynthSpec {
        n_topics: 4,
        facets_per_topic: 2,
        topic_vocab_size: 80,
        n_documents: 1200,
        pseudowords: default_pseudowords(3, 40),
        seed: 3,
        ..SynthSpec::default()
    };
    let dir = tempfile::tempdir().unwrap();
    generate(&spec).unwrap().save(&dir.path().join("corpus")).unwrap();

    let corpus = TimeBinnedCorpus::load(&dir.path().join("corpus")).unwrap();
    let gold = load_gold(&dir.path().join("corpus/gold.tsv")).unwrap();
    let (t1, t2) = (corpus.bin_by_label(FIRST_BIN).unwrap(), corpus.bin_by_label(SECOND_BIN).unwrap());
    let v1 = build_vocab(t1, 3).unwrap();
    let v2 = build_vocab(t2, 3).unwrap();
    let vocab = intersect_vocabs(&v1, &[&v2]).unwrap();

    let p = TrainParams { dim: 32, epochs: 3, ..TrainParams::default() };
    let m1 = train(init_random(&vocab, &p).unwrap(), t1, &p).unwrap();
    save_model(&m1, &dir.path().join("t1.bin")).unwrap();
    let m1 = load_model(&dir.path().join("t1.bin")).unwrap();
    let m2 = train(init_from(&m1, &vocab).unwrap(), t2, &p).unwrap();

    let words: Vec<&String> = gold.keys().collect();
    let records = rank_shifts(&m1, &m2, &words).unwrap();
    assert!(records.windows(2).all(|w| w[0].cosine >= w[1].cosine));

    let mut table = JudgmentTable::new();
    for (w, kind) in &gold {
        for a in 0..3 {
            table.insert(&format!("a{a}"), w, u8::from(*kind == Kind::Shift)).unwrap();
        }
    }
    let index = shift_index(&table).unwrap();
    let labeled = classify_regions(&records, &index.to_map(), &RegionThresholds::default()).unwrap();
    let path = dir.path().join("shift.tsv");
    let mut buf = Vec::new();
    write_records_tsv(&labeled, &mut buf).unwrap();
    std::fs::write(&path, buf).unwrap();
    assert_eq!(read_records_tsv(&path).unwrap(), labeled);

    let scores: HashMap<String, f64> = records.iter().map(|r| (r.word.clone(), r.cosine)).collect();
    let report = evaluate(&scores, &index, &RegionThresholds::default()).unwrap();
    assert!(report.correlation.r > 0.5, "r = {}", report.correlation.r);

    let var = variability_report(t2, &words, &m2, &VariabilityParams::default());
    assert_eq!(var.len(), words.len());
    assert!(var.iter().all(|e| e.variability.is_ok()));
    let again = variability_report(t2, &words, &m2, &VariabilityParams::default());
    assert_eq!(var, again);
}
