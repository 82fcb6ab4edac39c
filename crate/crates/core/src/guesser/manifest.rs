use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::two_phase::train_two_phase;
use super::unified::train_unified;
use super::{featurize, fit_normalizer, Phase1Config, SequenceExample, TwoPhaseConfig, UnifiedConfig};
use crate::corpus::{
    parse_corpus, preprocess_corpus, split_corpus, Corpus, FeatureConfig, FeatureExtractor, PrecomputedFeatures,
    RasterExtractor, SplitRatios,
};
use crate::error::{read_to_string, write_string, Error, Result};
use crate::eval::{accuracy_report, check_monotone, localization_report, EvalConfig, EvalMode};
use crate::lexnet::Lexicon;
use crate::neuralcore::{LossConfig, OptimizerConfig};
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ManifestModel {
    #[default]
    Unified,
    TwoPhase,
}

impl std::str::FromStr for ManifestModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unified" => Ok(ManifestModel::Unified),
            "two-phase" => Ok(ManifestModel::TwoPhase),
            other => Err(Error::invalid(format!("unknown model {other:?}"))),
        }
    }
}

fn default_hidden_sizes() -> Vec<usize> {
    vec![64, 128, 256, 512]
}

fn default_epochs() -> usize {
    200
}

/// A declarative training run. Relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: ManifestModel,
    pub corpus: PathBuf,
    pub lexicon_dir: PathBuf,
    /// Precomputed per-step features; raster features are used otherwise.
    #[serde(default)]
    pub feature_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Run the guess-normalization pipeline before training.
    #[serde(default)]
    pub preprocess: bool,
    /// Train, validate and test on the whole corpus (memorization checks).
    #[serde(default)]
    pub memorize: bool,
    #[serde(default)]
    pub split: Option<SplitRatios>,
    #[serde(default = "default_hidden_sizes")]
    pub hidden_sizes: Vec<usize>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub loss: LossConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub phase1: Option<Phase1Config>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("manifest: {e}")))
    }

    /// Loads a manifest and resolves its paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut m = Self::parse(&read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut m.corpus, &mut m.lexicon_dir, &mut m.output_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(f) = m.feature_file.as_mut().filter(|f| f.is_relative()) {
            *f = base.join(&*f);
        }
        Ok(m)
    }

    pub fn unified_config(&self, hidden: usize) -> UnifiedConfig {
        UnifiedConfig {
            hidden,
            loss: self.loss,
            optimizer: self.optimizer,
            max_epochs: self.epochs,
            seed: self.seed,
            ..UnifiedConfig::default()
        }
    }
}

/// Outcome of one hidden size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRun {
    pub hidden: usize,
    pub best_val_at1: f64,
    pub checkpoint: PathBuf,
    pub run_log: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub runs: Vec<GridRun>,
    pub best_hidden: usize,
    /// Test-split metrics of the best run.
    pub report: Report,
}

fn load_examples(m: &Manifest, corpus: &Corpus) -> Result<(Vec<SequenceExample>, Option<FeatureConfig>)> {
    match &m.feature_file {
        Some(path) => {
            let fx = PrecomputedFeatures::load(path)?;
            Ok((featurize(corpus, &fx)?, None))
        }
        None => {
            let fx = RasterExtractor(m.features);
            Ok((featurize(corpus, &fx as &dyn FeatureExtractor)?, Some(m.features)))
        }
    }
}

/// Trains one model per hidden size, writes a run log and a checkpoint for
/// each, and evaluates the best one (by validation accuracy@1) on the test
/// split.
pub fn run_manifest(m: &Manifest) -> Result<RunSummary> {
    if m.hidden_sizes.is_empty() {
        return Err(Error::invalid("manifest lists no hidden sizes"));
    }
    let lexicon = Lexicon::load_dir(&m.lexicon_dir)?;
    let embeddings = Arc::new(lexicon.embeddings()?.clone());
    let mut corpus = parse_corpus(&m.corpus, true)?.corpus;
    if m.preprocess {
        corpus = preprocess_corpus(&corpus, &lexicon).0;
    }
    let (train, val, test) = if m.memorize {
        (corpus.clone(), corpus.clone(), corpus)
    } else {
        split_corpus(&corpus, m.split.unwrap_or_default(), m.seed)?
    };
    let (train, features) = load_examples(m, &train)?;
    let (val, _) = load_examples(m, &val)?;
    let (test, _) = load_examples(m, &test)?;
    let normalizer = fit_normalizer(&train)?;
    std::fs::create_dir_all(&m.output_dir).map_err(|e| Error::io(&m.output_dir, e))?;

    let eval_cfg = EvalConfig::default();
    let mut runs = Vec::new();
    let mut best: Option<(f64, usize, Report)> = None;
    for &hidden in &m.hidden_sizes {
        let checkpoint = m.output_dir.join(format!("model-h{hidden}.pgm"));
        let run_log = m.output_dir.join(format!("run-h{hidden}.log"));
        let cfg2 = m.unified_config(hidden);
        let test_set = if test.is_empty() { &val } else { &test };
        let (best_val, report) = match m.model {
            ManifestModel::Unified => {
                let (model, rep) = train_unified(&train, &val, &cfg2, normalizer.clone(), features, Arc::clone(&embeddings))?;
                write_string(&run_log, &rep.log_text())?;
                model.to_checkpoint().save(&checkpoint)?;
                let truths: Vec<Vec<String>> = test_set.iter().map(|e| e.guesses.clone()).collect();
                let ranked: Vec<Vec<Vec<String>>> =
                    test_set.iter().map(|e| model.ranked(&e.features, eval_cfg.max_k())).collect::<Result<_>>()?;
                let mut r = Report::new();
                for mode in [EvalMode::GuessPortion, EvalMode::Full] {
                    r.extend(accuracy_report(&ranked, &truths, &EvalConfig { mode, ..eval_cfg.clone() })?);
                }
                (rep.best().map_or(0.0, |e| e.val_acc[0]), r)
            }
            ManifestModel::TwoPhase => {
                let cfg = TwoPhaseConfig {
                    phase1: m.phase1.clone().unwrap_or_default(),
                    phase2: cfg2,
                };
                let (model, rep) = train_two_phase(&train, &val, &cfg, normalizer.clone(), features, Arc::clone(&embeddings))?;
                let mut log = String::from("# phase1\n");
                for e in &rep.phase1_log {
                    log += &format!(
                        "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
                        e.epoch, e.train_loss, e.localization[0], e.localization[1], e.localization[2]
                    );
                }
                log += "# phase2\n";
                log += &rep.phase2.log_text();
                write_string(&run_log, &log)?;
                model.to_checkpoint().save(&checkpoint)?;
                let truths: Vec<Vec<String>> = test_set.iter().map(|e| e.guesses.clone()).collect();
                let gt: Vec<usize> = test_set.iter().map(|e| e.no_guess_prefix_len() + 1).collect();
                let preds: Vec<usize> = test_set
                    .iter()
                    .map(|e| Ok(model.predict_transition(&e.features)?.index))
                    .collect::<Result<_>>()?;
                let full: Vec<Vec<Vec<String>>> = test_set
                    .iter()
                    .zip(&preds)
                    .map(|(e, &p)| model.ranked_from(&e.features, p, eval_cfg.max_k()))
                    .collect::<Result<_>>()?;
                let oracle: Vec<Vec<Vec<String>>> = test_set
                    .iter()
                    .zip(&gt)
                    .map(|(e, &g)| model.ranked_from(&e.features, g, eval_cfg.max_k()))
                    .collect::<Result<_>>()?;
                let mut r = Report::new();
                for (label, ranked) in [("phase2-only", &oracle), ("full", &full)] {
                    let acc = crate::eval::sequence_accuracy(ranked, &truths, &eval_cfg)?;
                    for (k, a) in eval_cfg.k_values.iter().zip(acc) {
                        r.push("accuracy", [label.to_string(), k.to_string()], a);
                    }
                }
                r.extend(localization_report(&preds, &gt, &eval_cfg.deltas)?);
                let best_p2 = rep.phase2.best().map_or(0.0, |e| e.val_acc[0]);
                (best_p2, r)
            }
        };
        check_monotone(&report)?;
        runs.push(GridRun {
            hidden,
            best_val_at1: best_val,
            checkpoint,
            run_log,
        });
        if best.as_ref().is_none_or(|(b, _, _)| best_val > *b) {
            best = Some((best_val, hidden, report));
        }
    }
    let (_, best_hidden, report) = best.expect("at least one run");
    Ok(RunSummary {
        runs,
        best_hidden,
        report,
    })
}
