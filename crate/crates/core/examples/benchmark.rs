//! Runs the synthetic benchmark with default settings and prints the report.
//!
//!     cargo run --release -p shortshift --example benchmark [threads]

use shortshift::synth::{generate, score_benchmark, BenchmarkConfig, SynthSpec};

fn main() -> shortshift::Result<()> {
    let threads = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let start = std::time::Instant::now();
    let synth = generate(&SynthSpec::default())?;
    println!("generated in {:.1}s", start.elapsed().as_secs_f64());
    let mut config = BenchmarkConfig::default();
    config.train.threads = threads;
    let report = score_benchmark(&synth.corpus, &synth.gold, &config)?;
    print!("{}", report.to_text());
    for w in &report.words {
        println!("{:>14} {:>11} cos {:.4} var {:?}", w.word, w.kind, w.cosine, w.variability);
    }
    println!("total {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
