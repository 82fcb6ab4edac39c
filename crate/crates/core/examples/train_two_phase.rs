//! Trains the two-phase baseline on the separable corpus: a transition
//! localizer that decides when to start guessing, then a guess regressor
//! on the suffix. Prints localization and per-sketch transition points.
//!
//! ```text
//! cargo run --release --example train_two_phase
//! ```

use std::path::Path;
use std::sync::Arc;

use sketchqa::corpus::{parse_corpus, RasterExtractor};
use sketchqa::eval::localization_accuracy;
use sketchqa::guesser::{featurize, fit_normalizer, train_two_phase, Phase1Aux, Phase1Config, TwoPhaseConfig, UnifiedConfig};
use sketchqa::lexnet::Lexicon;
use sketchqa::neuralcore::OptimizerConfig;

fn main() -> sketchqa::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let lex = Lexicon::load_dir(&data.join("lexicon"))?;
    let table = Arc::new(lex.embeddings()?.clone());
    let corpus = parse_corpus(&data.join("separable_corpus.jsonl"), true)?.corpus;
    let fx = RasterExtractor::default();
    let examples = featurize(&corpus, &fx)?;
    let normalizer = fit_normalizer(&examples)?;

    let no_stop = |o: OptimizerConfig| OptimizerConfig {
        early_stop_patience: 0,
        ..o
    };
    let config = TwoPhaseConfig {
        phase1: Phase1Config {
            hidden: 32,
            optimizer: no_stop(OptimizerConfig {
                learning_rate: 0.05,
                ..OptimizerConfig::phase_one()
            }),
            aux: Phase1Aux::TransitionWeighted { alpha: 7.0 },
            ..Phase1Config::default()
        },
        phase2: UnifiedConfig {
            hidden: 32,
            max_epochs: 100,
            optimizer: no_stop(OptimizerConfig::default()),
            ..UnifiedConfig::default()
        },
    };
    let (model, report) = train_two_phase(&examples, &examples, &config, normalizer, Some(fx.0), table)?;
    for e in report.phase1_log.iter().filter(|e| e.epoch % 25 == 0 || e.epoch == 1) {
        println!(
            "phase 1 epoch {:>3}  loss {:.4}  loc@0 {:.2}",
            e.epoch, e.train_loss, e.localization[0]
        );
    }
    println!("phase 1 best epoch {:?}", report.phase1_best_epoch);
    if let Some(b) = report.phase2.best() {
        println!("phase 2 best epoch {} acc@1 {:.3}", b.epoch, b.val_acc[0]);
    }

    let mut preds = Vec::new();
    let mut truth = Vec::new();
    for e in &examples {
        let p = model.predict_transition(&e.features)?;
        preds.push(p.index);
        truth.push(e.no_guess_prefix_len() + 1);
        let ranked = model.ranked(&e.features, 1)?;
        let words: Vec<&str> = ranked.iter().map(|r| r[0].as_str()).collect();
        println!("{:<12} first guess at {} (truth {})  {words:?}", e.sketch_id, p.index, e.no_guess_prefix_len() + 1);
    }
    for d in 0..3 {
        println!("localization@{d} = {:.3}", localization_accuracy(&preds, &truth, d)?);
    }
    Ok(())
}
