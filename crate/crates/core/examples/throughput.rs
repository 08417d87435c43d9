//! Single-lane training throughput at dim 200, window 5 on the default
//! synthetic corpus.
//!
//!     cargo run --release -p shortshift --example throughput

use shortshift::corpus::build_vocab;
use shortshift::embedding::{init_random, train_with_stats, TrainParams};
use shortshift::synth::{generate, SynthSpec};

fn main() -> shortshift::Result<()> {
    let synth = generate(&SynthSpec::default())?;
    let bin = synth.corpus.bin(0);
    let vocab = build_vocab(bin, 5)?;
    let params = TrainParams { epochs: 1, ..TrainParams::default() };
    let model = init_random(&vocab, &params)?;
    let mean_path = model.tree().weighted_path_length(vocab.counts()) as f64 / vocab.counts().iter().sum::<u64>() as f64;
    let (_, stats) = train_with_stats(model, bin, &params)?;
    println!(
        "|V|={} dim={} window={}: {} tokens in {:.2}s, {:.0} tokens/s/lane",
        vocab.len(),
        params.dim,
        params.window,
        stats.tokens,
        stats.seconds,
        stats.tokens_per_second()
    );
    println!(
        "{} pairs, mean path length {mean_path:.2}, {:.1} ns per tree node",
        stats.pairs,
        stats.seconds * 1e9 / (stats.pairs as f64 * mean_path)
    );
    Ok(())
}
