//! Corpus analytics and the significance tools used to compare guessers:
//! guess-count histogram, first-guess locations, Cohen's d, Wilson
//! intervals and the Wilcoxon signed-rank test.
//!
//! ```text
//! cargo run --example statistics
//! ```

use std::path::Path;

use sketchqa::corpus::parse_corpus;
use sketchqa::stats::{
    cohens_d, first_guess_stats, guess_count_histogram, wilcoxon_signed_rank, wilson_interval, CategoryAccuracy,
    EffectSize,
};

fn main() -> sketchqa::Result<()> {
    let corpus = parse_corpus(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/mini_corpus.jsonl"), true)?.corpus;

    let h = guess_count_histogram(&corpus);
    for (bucket, count) in h.rows() {
        println!("{bucket:>3} unique guesses: {count}");
    }
    for c in first_guess_stats(&corpus) {
        println!("{:<9} first guess at {:.2} of the strokes (MAD {:.2}, n = {})", c.category, c.median, c.mad, c.count);
    }

    // per-sequence final correctness of two hypothetical guessers
    let machine = CategoryAccuracy::from_samples("cat", vec![true, true, false, true, false, true, true, false])?;
    let human = CategoryAccuracy::from_samples("cat", vec![true, true, true, true, false, true, true, true])?;
    let d = cohens_d(&machine, &human)?;
    println!("\nCohen's d = {d:.3} ({:?})", EffectSize::classify(d));
    let (lo, hi) = wilson_interval(5, 8, 1.96)?;
    println!("machine accuracy 5/8, 95% Wilson interval [{lo:.3}, {hi:.3}]");

    let pairs = [(2.0, 1.0), (1.0, -1.0), (2.0, 2.0), (0.0, -2.0), (1.0, 0.0), (2.0, -1.0), (1.0, 1.0), (2.0, 0.0)];
    let w = wilcoxon_signed_rank(&pairs)?;
    println!(
        "Wilcoxon: n = {}, W = {}, Z = {:.3}, p = {:.4} (exact {:?})",
        w.n, w.statistic, w.z, w.p, w.p_exact
    );
    Ok(())
}
