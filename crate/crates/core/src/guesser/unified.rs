use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{normalize_all, SequenceExample};
use crate::corpus::{FeatureConfig, FeatureNormalizer};
use crate::error::{Error, Result};
use crate::eval::{ranked_words, sequence_accuracy, EvalConfig, EvalMode};
use crate::lexnet::{Candidates, EmbeddingTable, Neighbor};
use crate::neuralcore::{
    compute_loss, init_lstm, lstm_from_checkpoint, lstm_tensors, Adagrad, Checkpoint, LossConfig, LstmParams,
    LstmShape, LstmState, NegativeSampling, OptimizerConfig, ORTHOGONAL_GAIN,
};

/// The k values reported in every run-log line.
pub const LOG_K: [usize; 3] = [1, 3, 5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnifiedConfig {
    pub hidden: usize,
    pub loss: LossConfig,
    pub optimizer: OptimizerConfig,
    pub max_epochs: usize,
    pub seed: u64,
    pub init_gain: f64,
    /// Steps scored for early stopping.
    pub eval_mode: EvalMode,
    /// Whether "#" competes in nearest-neighbour retrieval at inference.
    pub include_no_guess: bool,
}

impl Default for UnifiedConfig {
    fn default() -> Self {
        UnifiedConfig {
            hidden: 128,
            loss: LossConfig::default(),
            optimizer: OptimizerConfig::default(),
            max_epochs: 200,
            seed: 1,
            init_gain: ORTHOGONAL_GAIN,
            eval_mode: EvalMode::GuessPortion,
            include_no_guess: true,
        }
    }
}

impl UnifiedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::invalid("hidden size must be positive"));
        }
        self.loss.validate()?;
        self.optimizer.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    /// Validation accuracy at each of [`LOG_K`].
    pub val_acc: [f64; 3],
}

impl EpochLog {
    /// `epoch<TAB>train_loss<TAB>val@1<TAB>val@3<TAB>val@5`
    pub fn line(&self) -> String {
        format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            self.epoch, self.train_loss, self.val_acc[0], self.val_acc[1], self.val_acc[2]
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainReport {
    pub log: Vec<EpochLog>,
    /// Epoch whose weights were kept.
    pub best_epoch: Option<usize>,
    /// Training steps skipped because the guess has no embedding.
    pub oov_steps: usize,
    pub stopped_early: bool,
}

impl TrainReport {
    pub fn log_text(&self) -> String {
        self.log.iter().map(|e| e.line() + "\n").collect()
    }

    pub fn best(&self) -> Option<&EpochLog> {
        self.best_epoch.and_then(|b| self.log.iter().find(|e| e.epoch == b))
    }
}

/// LSTM regressing the embedding of the current guess (or of "#") from
/// each stroke prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct GuesserModel {
    pub config: UnifiedConfig,
    pub lstm: LstmParams,
    pub normalizer: FeatureNormalizer,
    /// Raster settings the model was trained with, when features are not
    /// loaded from file.
    pub features: Option<FeatureConfig>,
    embeddings: Arc<EmbeddingTable>,
}

impl GuesserModel {
    /// A freshly initialized model.
    pub fn new(
        config: UnifiedConfig,
        normalizer: FeatureNormalizer,
        features: Option<FeatureConfig>,
        embeddings: Arc<EmbeddingTable>,
    ) -> Result<Self> {
        config.validate()?;
        let shape = LstmShape::new(normalizer.dim(), config.hidden, embeddings.dim());
        let lstm = init_lstm(shape, config.init_gain, config.seed)?;
        Ok(GuesserModel {
            config,
            lstm,
            normalizer,
            features,
            embeddings,
        })
    }

    pub fn embeddings(&self) -> &EmbeddingTable {
        &self.embeddings
    }

    pub fn shared_embeddings(&self) -> Arc<EmbeddingTable> {
        Arc::clone(&self.embeddings)
    }

    pub fn feature_dim(&self) -> usize {
        self.normalizer.dim()
    }

    pub fn candidates(&self) -> Candidates {
        if self.config.include_no_guess {
            Candidates::All
        } else {
            Candidates::WordsOnly
        }
    }

    /// Predicted embedding for every step of a raw feature sequence.
    pub fn predict(&self, raw: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        Ok(self.lstm.forward(&normalize_all(&self.normalizer, raw)?)?.outputs)
    }

    /// The `k` nearest words per step, best first.
    pub fn ranked(&self, raw: &[Vec<f64>], k: usize) -> Result<Vec<Vec<String>>> {
        self.predict(raw)?
            .iter()
            .map(|p| ranked_words(&self.embeddings, p, k, self.candidates()))
            .collect()
    }

    /// Advances a recurrent state by one raw feature vector.
    pub fn step(&self, state: &mut LstmState, raw: &[f64], k: usize) -> Result<(Vec<f64>, Vec<Neighbor>)> {
        let x = self.normalizer.apply(raw)?;
        let y = self.lstm.step(state, &x)?;
        let pool = self.embeddings.len() - usize::from(!self.config.include_no_guess);
        let top = self.embeddings.knn_among(&y, k.min(pool), self.candidates())?;
        Ok((y, top))
    }

    pub fn evaluate(&self, examples: &[SequenceExample], cfg: &EvalConfig) -> Result<Vec<f64>> {
        let ranked: Vec<Vec<Vec<String>>> = examples
            .iter()
            .map(|e| self.ranked(&e.features, cfg.max_k()))
            .collect::<Result<_>>()?;
        let truths: Vec<Vec<String>> = examples.iter().map(|e| e.guesses.clone()).collect();
        sequence_accuracy(&ranked, &truths, cfg)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            kind: "unified".into(),
            seed: self.config.seed,
            config: serde_json::json!({
                "model": self.config,
                "normalizer": self.normalizer,
                "features": self.features,
                "embedding_dim": self.embeddings.dim(),
            }),
            tensors: lstm_tensors(&self.lstm, "lstm"),
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint, embeddings: Arc<EmbeddingTable>) -> Result<Self> {
        if ck.kind != "unified" {
            return Err(Error::invalid(format!("expected a unified checkpoint, found {:?}", ck.kind)));
        }
        Self::from_parts(&ck.config, ck, "lstm", embeddings)
    }

    pub(crate) fn from_parts(
        cfg: &serde_json::Value,
        ck: &Checkpoint,
        prefix: &str,
        embeddings: Arc<EmbeddingTable>,
    ) -> Result<Self> {
        let config: UnifiedConfig = serde_json::from_value(cfg["model"].clone())?;
        let normalizer: FeatureNormalizer = serde_json::from_value(cfg["normalizer"].clone())?;
        let features: Option<FeatureConfig> = serde_json::from_value(cfg["features"].clone())?;
        let lstm = lstm_from_checkpoint(ck, prefix)?;
        let shape = lstm.shape();
        if shape.output != embeddings.dim() {
            return Err(Error::Dimension {
                expected: shape.output,
                got: embeddings.dim(),
            });
        }
        if shape.input != normalizer.dim() {
            return Err(Error::Dimension {
                expected: shape.input,
                got: normalizer.dim(),
            });
        }
        Ok(GuesserModel {
            config,
            lstm,
            normalizer,
            features,
            embeddings,
        })
    }

    pub(crate) fn to_parts(&self) -> serde_json::Value {
        self.to_checkpoint().config
    }
}

/// Draws a negative embedding index different from `target` whose vector
/// differs from the target's.
fn sample_negative(rng: &mut ChaCha8Rng, table: &EmbeddingTable, pool: &[usize], target: usize) -> Option<usize> {
    let tv = table.vector(target);
    for _ in 0..32 {
        let i = pool[rng.random_range(0..pool.len())];
        if i != target && table.vector(i) != tv {
            return Some(i);
        }
    }
    None
}

/// Trains the unified model with early stopping on validation
/// accuracy@1, returning the best weights and the per-epoch log.
///
/// Validation falls back to the training set when `val` is empty. Guess
/// words missing from the embedding table are skipped and counted.
pub fn train_unified(
    train: &[SequenceExample],
    val: &[SequenceExample],
    config: &UnifiedConfig,
    normalizer: FeatureNormalizer,
    features: Option<FeatureConfig>,
    embeddings: Arc<EmbeddingTable>,
) -> Result<(GuesserModel, TrainReport)> {
    if train.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let mut model = GuesserModel::new(config.clone(), normalizer, features, embeddings)?;
    let table = model.shared_embeddings();
    let mut report = TrainReport::default();
    if config.max_epochs == 0 {
        return Ok((model, report));
    }

    let inputs: Vec<Vec<Vec<f64>>> = train
        .iter()
        .map(|e| normalize_all(&model.normalizer, &e.features))
        .collect::<Result<_>>()?;
    let targets: Vec<Vec<Option<usize>>> = train
        .iter()
        .map(|e| {
            e.guesses
                .iter()
                .map(|g| {
                    if g.is_empty() {
                        Some(table.no_guess_index())
                    } else {
                        table.index_of(g)
                    }
                })
                .collect()
        })
        .collect();
    report.oov_steps = targets.iter().flatten().filter(|t| t.is_none()).count();

    let pool: Vec<usize> = match config.loss.negative_sampling {
        NegativeSampling::WholeDictionary => (0..table.len()).collect(),
        NegativeSampling::OtherCategory => {
            let cats: BTreeSet<&str> = train.iter().map(|e| e.category.as_str()).collect();
            let idx: Vec<usize> = cats.iter().filter_map(|c| table.index_of(c)).collect();
            if idx.len() >= 2 {
                idx
            } else {
                (0..table.len()).collect()
            }
        }
    };

    let val_set = if val.is_empty() { train } else { val };
    let eval_cfg = EvalConfig {
        k_values: LOG_K.to_vec(),
        mode: config.eval_mode,
        ..EvalConfig::default()
    };
    let mut opt = Adagrad::new(config.optimizer, model.lstm.as_slice().len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5eed));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(f64, LstmParams)> = None;
    let mut wait = 0;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let (mut total, mut steps) = (0.0, 0usize);
        for &i in &order {
            let trace = model.lstm.forward(&inputs[i])?;
            let mut d_out = Vec::with_capacity(trace.len());
            let mut any = false;
            for (y, target) in trace.outputs.iter().zip(&targets[i]) {
                let Some(target) = *target else {
                    d_out.push(vec![0.0; y.len()]);
                    continue;
                };
                let negative = if config.loss.kind.needs_negative() {
                    sample_negative(&mut rng, &table, &pool, target).map(|n| table.vector(n))
                } else {
                    None
                };
                if config.loss.kind.needs_negative() && negative.is_none() {
                    d_out.push(vec![0.0; y.len()]);
                    continue;
                }
                let (l, g) = compute_loss(&config.loss, y, table.vector(target), negative)?;
                total += l;
                steps += 1;
                any = true;
                d_out.push(g);
            }
            if any {
                let grad = model.lstm.backward(&trace, &d_out)?;
                opt.step(model.lstm.as_mut_slice(), &grad)?;
            }
        }
        let acc = model.evaluate(val_set, &eval_cfg)?;
        let entry = EpochLog {
            epoch,
            train_loss: if steps > 0 { total / steps as f64 } else { 0.0 },
            val_acc: [acc[0], acc[1], acc[2]],
        };
        report.log.push(entry);
        if best.as_ref().is_none_or(|(b, _)| acc[0] > *b) {
            best = Some((acc[0], model.lstm.clone()));
            report.best_epoch = Some(epoch);
            wait = 0;
        } else {
            wait += 1;
            let patience = config.optimizer.early_stop_patience;
            if patience > 0 && wait >= patience {
                report.stopped_early = true;
                break;
            }
        }
    }
    if let Some((_, params)) = best {
        model.lstm = params;
    }
    Ok((model, report))
}
