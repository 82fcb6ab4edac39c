//! Trains the unified guesser until it memorizes the 20-sequence separable
//! corpus, then streams one sketch through the trained model.
//!
//! ```text
//! cargo run --release --example train_unified [-- <epochs> <hidden>]
//! ```

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use sketchqa::corpus::{parse_corpus, RasterExtractor};
use sketchqa::guesser::{featurize, fit_normalizer, train_unified, StreamingGuesser, UnifiedConfig};
use sketchqa::lexnet::Lexicon;
use sketchqa::neuralcore::OptimizerConfig;

fn main() -> sketchqa::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs = args.next().and_then(|a| a.parse().ok()).unwrap_or(200);
    let hidden = args.next().and_then(|a| a.parse().ok()).unwrap_or(32);

    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let lex = Lexicon::load_dir(&data.join("lexicon"))?;
    let table = Arc::new(lex.embeddings()?.clone());
    let corpus = parse_corpus(&data.join("separable_corpus.jsonl"), true)?.corpus;

    let fx = RasterExtractor::default();
    let examples = featurize(&corpus, &fx)?;
    let normalizer = fit_normalizer(&examples)?;
    let config = UnifiedConfig {
        hidden,
        max_epochs: epochs,
        optimizer: OptimizerConfig {
            early_stop_patience: 0,
            ..OptimizerConfig::default()
        },
        ..UnifiedConfig::default()
    };

    let started = Instant::now();
    let (model, report) = train_unified(&examples, &examples, &config, normalizer, Some(fx.0), table)?;
    for e in report.log.iter().filter(|e| e.epoch % 20 == 0 || e.epoch == 1) {
        println!("{}", e.line());
    }
    let best = report.best().expect("at least one epoch");
    println!(
        "best epoch {} acc@1 {:.3} ({:.1}s)",
        best.epoch,
        best.val_acc[0],
        started.elapsed().as_secs_f64()
    );

    let sample = &examples[examples.len() - 1];
    let mut stream = StreamingGuesser::new(Arc::new(model), 3);
    for (t, (x, truth)) in sample.features.iter().zip(&sample.guesses).enumerate() {
        let step = stream.push(x)?;
        let top: Vec<&str> = step.top_k.iter().map(|n| n.word.as_str()).collect();
        println!("stroke {:>2}  truth {:<10} top-3 {:?}", t + 1, if truth.is_empty() { "#" } else { truth }, top);
    }
    Ok(())
}
