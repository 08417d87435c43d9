mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shortshift::eval::{evaluate, group_stats, krippendorff_alpha, pearson, shift_index, JudgmentTable, SdKind};
use shortshift::shift::RegionThresholds;

use common::{naive_pearson, pairwise_alpha, random_table};

fn triples_table(triples: &[(usize, usize, u8)]) -> JudgmentTable {
    let mut t = JudgmentTable::new();
    for &(a, w, j) in triples {
        t.insert(&format!("a{a}"), &format!("w{w}"), j).unwrap();
    }
    t
}

/// Full tables over up to 3 annotators and 4 words, possibly with holes.
fn small_tables() -> impl Strategy<Value = Vec<(usize, usize, u8)>> {
    (1usize..=3, 2usize..=4).prop_flat_map(|(na, nw)| {
        prop::collection::vec(prop::option::weighted(0.85, 0u8..=1), na * nw).prop_map(move |cells| {
            cells
                .into_iter()
                .enumerate()
                .filter_map(|(i, c)| c.map(|j| (i % na, i / na, j)))
                .collect()
        })
    })
}

proptest! {
    #[test]
    fn alpha_matches_pairwise_oracle_on_small_tables(triples in small_tables()) {
        let table = triples_table(&triples);
        let mut units = vec![Vec::new(); 4];
        for &(_, w, j) in &triples {
            units[w].push(j);
        }
        match krippendorff_alpha(&table) {
            Ok(a) if !a.degenerate => prop_assert!((a.alpha - pairwise_alpha(&units)).abs() < 1e-12),
            Ok(a) => prop_assert_eq!(a.alpha, 1.0),
            Err(_) => prop_assert!(units.iter().filter(|u| u.len() >= 2).count() < 2),
        }
    }

    #[test]
    fn alpha_ignores_annotator_names_and_word_order(triples in small_tables(), shift in 1usize..5) {
        let table = triples_table(&triples);
        let relabeled: Vec<(usize, usize, u8)> =
            triples.iter().rev().map(|&(a, w, j)| ((a + shift) % 7, 3 - w, j)).collect();
        let other = triples_table(&relabeled);
        match (krippendorff_alpha(&table), krippendorff_alpha(&other)) {
            (Ok(x), Ok(y)) => prop_assert!((x.alpha - y.alpha).abs() < 1e-12),
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn pearson_invariant_under_positive_affine_maps(
        xs in prop::collection::vec(-100.0f64..100.0, 3..30),
        noise in prop::collection::vec(-10.0f64..10.0, 30),
        a in 0.01f64..50.0,
        b in -100.0f64..100.0,
    ) {
        let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| 0.3 * x + e).collect();
        let Ok(base) = pearson(&xs, &ys) else { return Ok(()) };
        let scaled: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let moved = pearson(&scaled, &ys).unwrap();
        prop_assert!((base.r - moved.r).abs() < 1e-9);
        prop_assert!((base.p - moved.p).abs() < 1e-7);
    }

    #[test]
    fn shift_index_is_a_fraction(triples in small_tables()) {
        prop_assume!(!triples.is_empty());
        let index = shift_index(&triples_table(&triples)).unwrap();
        for (w, &v) in &index.index {
            let w: usize = w[1..].parse().unwrap();
            let votes: Vec<u8> = triples.iter().filter(|t| t.1 == w).map(|t| t.2).collect();
            let expected = votes.iter().map(|&j| f64::from(j)).sum::<f64>() / votes.len() as f64;
            prop_assert_eq!(v, expected);
        }
    }
}

#[test]
fn pearson_and_alpha_agree_with_oracles_on_random_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..40 {
        let n = 3 + round % 17;
        let x: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, -5.0..5.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| v * 0.4 + rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
        let got = pearson(&x, &y).unwrap();
        let (r, p) = naive_pearson(&x, &y);
        assert!((got.r - r).abs() < 1e-9, "r {} vs {r}", got.r);
        assert!((got.p - p).abs() < 1e-9, "p {} vs {p}", got.p);

        let (table, units) = random_table(&mut rng, 4 + round % 9, 3 + round % 6, 0.2);
        let got = krippendorff_alpha(&table).unwrap();
        if !got.degenerate {
            assert!((got.alpha - pairwise_alpha(&units)).abs() < 1e-9);
        }
    }
}

#[test]
fn independent_judgments_give_alpha_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2019);
    let mut table = JudgmentTable::new();
    for w in 0..400 {
        for a in 0..10 {
            let j = u8::from(rand::Rng::random_bool(&mut rng, 0.3));
            table.insert(&format!("a{a}"), &format!("w{w}"), j).unwrap();
        }
    }
    let a = krippendorff_alpha(&table).unwrap();
    assert!(a.alpha.abs() < 0.05, "alpha {}", a.alpha);
}

#[test]
fn csv_judgments_through_to_evaluation() {
    let csv = "annotator,word,judgment\n\
               a1,alpha,1\na2,alpha,1\na3,alpha,0\n\
               a1,beta,0\na2,beta,0\n\
               a1,gamma,1\na3,gamma,1\n\
               a2,delta,0\na3,delta,1\n";
    let table = JudgmentTable::read_csv(csv.as_bytes()).unwrap();
    let index = shift_index(&table).unwrap();
    assert_eq!(index.get("alpha"), Some(2.0 / 3.0));
    assert_eq!(index.get("delta"), Some(0.5));

    let scores: HashMap<String, f64> = index.index.iter().map(|(w, v)| (w.clone(), 0.1 + 0.5 * v)).collect();
    let report = evaluate(&scores, &index, &RegionThresholds::default()).unwrap();
    assert!((report.correlation.r - 1.0).abs() < 1e-12);
    assert!(report.to_text("cosine").contains("shift index) = 1.0000"));

    let groups: HashMap<String, String> = [("alpha", "g"), ("gamma", "g"), ("beta", "h")]
        .iter()
        .map(|(w, g)| (w.to_string(), g.to_string()))
        .collect();
    let stats = group_stats(&index, &groups, SdKind::Population).unwrap();
    assert!((stats["g"].mean - 5.0 / 6.0).abs() < 1e-12);
    assert!((stats["g"].sd - 1.0 / 6.0).abs() < 1e-12);
    assert_eq!(stats["h"].sd, 0.0);
}
