use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::unified::train_unified;
use super::{normalize_all, GuesserModel, SequenceExample, TrainReport, UnifiedConfig};
use crate::corpus::{FeatureConfig, FeatureNormalizer};
use crate::error::{Error, Result};
use crate::eval::{localization_accuracy, ranked_words};
use crate::lexnet::{Candidates, EmbeddingTable};
use crate::neuralcore::{
    init_lstm, lstm_from_checkpoint, lstm_tensors, ranking_loss, sigmoid, transition_weights, weighted_bce_logit,
    Adagrad, Checkpoint, ClassWeights, LstmParams, LstmShape, LstmTrace, OptimizerConfig, Tensor, ORTHOGONAL_GAIN,
};
use crate::NO_GUESS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Phase1Scorer {
    /// Recurrent classifier over the prefix sequence.
    #[default]
    Lstm,
    /// Independent per-step logistic regression.
    Logistic,
}

/// Extra sequence loss added to the class-weighted cross-entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Phase1Aux {
    #[default]
    None,
    /// Cross-entropy re-weighted to peak at the transition, added on top.
    TransitionWeighted { alpha: f64 },
    /// Classification plus ranking terms over detection scores, in place of
    /// the plain cross-entropy.
    Ranking { lambda_s: f64, lambda_r: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase1Config {
    pub scorer: Phase1Scorer,
    pub hidden: usize,
    pub optimizer: OptimizerConfig,
    pub max_epochs: usize,
    pub seed: u64,
    pub aux: Phase1Aux,
}

impl Default for Phase1Config {
    fn default() -> Self {
        Phase1Config {
            scorer: Phase1Scorer::Lstm,
            hidden: 32,
            optimizer: OptimizerConfig::phase_one(),
            max_epochs: 200,
            seed: 1,
            aux: Phase1Aux::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TwoPhaseConfig {
    pub phase1: Phase1Config,
    pub phase2: UnifiedConfig,
}

/// Per-step guess/no-guess scorer.
#[derive(Debug, Clone, PartialEq)]
pub enum Phase1Model {
    Lstm(LstmParams),
    /// Weights followed by the bias.
    Logistic(Vec<f64>),
}

impl Phase1Model {
    fn init(cfg: &Phase1Config, dim: usize) -> Result<Self> {
        Ok(match cfg.scorer {
            Phase1Scorer::Lstm => Phase1Model::Lstm(init_lstm(LstmShape::new(dim, cfg.hidden, 1), ORTHOGONAL_GAIN, cfg.seed)?),
            Phase1Scorer::Logistic => Phase1Model::Logistic(vec![0.0; dim + 1]),
        })
    }

    fn params_mut(&mut self) -> &mut [f64] {
        match self {
            Phase1Model::Lstm(p) => p.as_mut_slice(),
            Phase1Model::Logistic(w) => w,
        }
    }

    fn param_count(&self) -> usize {
        match self {
            Phase1Model::Lstm(p) => p.as_slice().len(),
            Phase1Model::Logistic(w) => w.len(),
        }
    }

    /// Logits per step, plus the trace needed for backprop.
    fn logits(&self, xs: &[Vec<f64>]) -> Result<(Vec<f64>, Option<LstmTrace>)> {
        match self {
            Phase1Model::Lstm(p) => {
                let tr = p.forward(xs)?;
                Ok((tr.outputs.iter().map(|y| y[0]).collect(), Some(tr)))
            }
            Phase1Model::Logistic(w) => {
                let (b, w) = w.split_last().expect("bias");
                let z = xs
                    .iter()
                    .map(|x| {
                        if x.len() != w.len() {
                            return Err(Error::Dimension {
                                expected: w.len(),
                                got: x.len(),
                            });
                        }
                        Ok(b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>())
                    })
                    .collect::<Result<_>>()?;
                Ok((z, None))
            }
        }
    }

    fn gradient(&self, xs: &[Vec<f64>], trace: Option<&LstmTrace>, dz: &[f64]) -> Result<Vec<f64>> {
        match (self, trace) {
            (Phase1Model::Lstm(p), Some(tr)) => {
                let d: Vec<Vec<f64>> = dz.iter().map(|&v| vec![v]).collect();
                p.backward(tr, &d)
            }
            (Phase1Model::Logistic(w), _) => {
                let mut g = vec![0.0; w.len()];
                let d = w.len() - 1;
                for (x, &dzt) in xs.iter().zip(dz) {
                    for (gi, xi) in g[..d].iter_mut().zip(x) {
                        *gi += dzt * xi;
                    }
                    g[d] += dzt;
                }
                Ok(g)
            }
            (Phase1Model::Lstm(_), None) => Err(Error::invalid("missing lstm trace")),
        }
    }

    fn tensors(&self) -> Vec<Tensor> {
        match self {
            Phase1Model::Lstm(p) => lstm_tensors(p, "phase1"),
            Phase1Model::Logistic(w) => vec![Tensor {
                name: "phase1.linear".into(),
                shape: vec![w.len()],
                data: w.clone(),
            }],
        }
    }
}

/// Where the first guess is predicted, one-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionPrediction {
    pub index: usize,
    /// False when no step reached probability 0.5 and `index` fell back to
    /// the last step.
    pub found: bool,
    pub probabilities: Vec<f64>,
}

impl TransitionPrediction {
    /// First step with probability at least 0.5, else the last step.
    pub fn from_probabilities(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::invalid("empty sequence"));
        }
        let (index, found) = match probabilities.iter().position(|&p| p >= 0.5) {
            Some(i) => (i + 1, true),
            None => (probabilities.len(), false),
        };
        Ok(TransitionPrediction {
            index,
            found,
            probabilities,
        })
    }
}

/// Transition localizer followed by a guess-word regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhaseModel {
    pub phase1_config: Phase1Config,
    pub phase1: Phase1Model,
    pub class_weights: ClassWeights,
    pub normalizer: FeatureNormalizer,
    pub phase2: GuesserModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase1Epoch {
    pub epoch: usize,
    pub train_loss: f64,
    /// Validation localization at δ = 0, 1, 2.
    pub localization: [f64; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TwoPhaseReport {
    pub phase1_log: Vec<Phase1Epoch>,
    pub phase1_best_epoch: Option<usize>,
    pub phase2: TrainReport,
}

impl TwoPhaseModel {
    pub fn embeddings(&self) -> &EmbeddingTable {
        self.phase2.embeddings()
    }

    pub fn transition_probabilities(&self, raw: &[Vec<f64>]) -> Result<Vec<f64>> {
        let xs = normalize_all(&self.normalizer, raw)?;
        Ok(self.phase1.logits(&xs)?.0.into_iter().map(sigmoid).collect())
    }

    pub fn predict_transition(&self, raw: &[Vec<f64>]) -> Result<TransitionPrediction> {
        TransitionPrediction::from_probabilities(self.transition_probabilities(raw)?)
    }

    /// Ranked words per step when phase 2 starts at the one-based step
    /// `start`; earlier steps answer "#".
    pub fn ranked_from(&self, raw: &[Vec<f64>], start: usize, k: usize) -> Result<Vec<Vec<String>>> {
        if start == 0 || start > raw.len() {
            return Err(Error::invalid(format!("start step {start} outside 1..={}", raw.len())));
        }
        let mut out = vec![vec![NO_GUESS.to_string()]; start - 1];
        for p in self.phase2.predict(&raw[start - 1..])? {
            out.push(ranked_words(self.phase2.embeddings(), &p, k, Candidates::WordsOnly)?);
        }
        Ok(out)
    }

    /// Full pipeline: phase 2 runs from the predicted transition.
    pub fn ranked(&self, raw: &[Vec<f64>], k: usize) -> Result<Vec<Vec<String>>> {
        let p = self.predict_transition(raw)?;
        self.ranked_from(raw, p.index, k)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut tensors = self.phase1.tensors();
        tensors.extend(lstm_tensors(&self.phase2.lstm, "phase2"));
        Checkpoint {
            kind: "two-phase".into(),
            seed: self.phase1_config.seed,
            config: serde_json::json!({
                "phase1": self.phase1_config,
                "class_weights": self.class_weights,
                "normalizer": self.normalizer,
                "phase2": self.phase2.to_parts(),
            }),
            tensors,
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint, embeddings: Arc<EmbeddingTable>) -> Result<Self> {
        if ck.kind != "two-phase" {
            return Err(Error::invalid(format!("expected a two-phase checkpoint, found {:?}", ck.kind)));
        }
        let phase1_config: Phase1Config = serde_json::from_value(ck.config["phase1"].clone())?;
        let class_weights: ClassWeights = serde_json::from_value(ck.config["class_weights"].clone())?;
        let normalizer: FeatureNormalizer = serde_json::from_value(ck.config["normalizer"].clone())?;
        let phase1 = match phase1_config.scorer {
            Phase1Scorer::Lstm => Phase1Model::Lstm(lstm_from_checkpoint(ck, "phase1")?),
            Phase1Scorer::Logistic => {
                let t = ck.tensor("phase1.linear")?;
                if t.data.len() != normalizer.dim() + 1 {
                    return Err(Error::Dimension {
                        expected: normalizer.dim() + 1,
                        got: t.data.len(),
                    });
                }
                Phase1Model::Logistic(t.data.clone())
            }
        };
        let phase2 = GuesserModel::from_parts(&ck.config["phase2"], ck, "phase2", embeddings)?;
        Ok(TwoPhaseModel {
            phase1_config,
            phase1,
            class_weights,
            normalizer,
            phase2,
        })
    }
}

/// Loss and logit gradient of one phase-1 sequence.
fn phase1_loss(z: &[f64], labels: &[bool], w: &ClassWeights, aux: Phase1Aux) -> Result<(f64, Vec<f64>)> {
    match aux {
        Phase1Aux::Ranking { lambda_s, lambda_r } => {
            let probs: Vec<f64> = z.iter().map(|&v| sigmoid(v)).collect();
            let scores: Vec<f64> = probs.iter().zip(labels).map(|(&p, &y)| if y { p } else { 1.0 - p }).collect();
            let r = ranking_loss(&scores, labels, lambda_s, lambda_r, w)?;
            let dz = probs
                .iter()
                .zip(labels)
                .zip(&r.grad)
                .map(|((&p, &y), &g)| {
                    let ds = p * (1.0 - p);
                    g * if y { ds } else { -ds }
                })
                .collect();
            Ok((r.total, dz))
        }
        _ => {
            let k = labels.iter().position(|&y| y).unwrap_or(labels.len());
            let extra = match aux {
                Phase1Aux::TransitionWeighted { alpha } if k < labels.len() => transition_weights(k, labels.len(), alpha)?,
                _ => vec![0.0; labels.len()],
            };
            let mut total = 0.0;
            let mut dz = Vec::with_capacity(z.len());
            for ((&zt, &y), e) in z.iter().zip(labels).zip(&extra) {
                let (l, g) = weighted_bce_logit(zt, y, w)?;
                total += (1.0 + e) * l;
                dz.push((1.0 + e) * g);
            }
            Ok((total, dz))
        }
    }
}

/// Trains phase 1 on guess/no-guess targets and phase 2 on the guess
/// suffixes. Early stopping watches validation localization at δ = 0 for
/// phase 1 and accuracy@1 for phase 2.
pub fn train_two_phase(
    train: &[SequenceExample],
    val: &[SequenceExample],
    config: &TwoPhaseConfig,
    normalizer: FeatureNormalizer,
    features: Option<FeatureConfig>,
    embeddings: Arc<EmbeddingTable>,
) -> Result<(TwoPhaseModel, TwoPhaseReport)> {
    if train.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let cfg1 = &config.phase1;
    cfg1.optimizer.validate()?;
    let labels: Vec<Vec<bool>> = train.iter().map(SequenceExample::transition_labels).collect();
    let class_weights = ClassWeights::from_labels(labels.iter().flatten());
    let inputs: Vec<Vec<Vec<f64>>> = train
        .iter()
        .map(|e| normalize_all(&normalizer, &e.features))
        .collect::<Result<_>>()?;

    let mut phase1 = Phase1Model::init(cfg1, normalizer.dim())?;
    let mut report = TwoPhaseReport::default();
    let val_set = if val.is_empty() { train } else { val };
    let val_inputs: Vec<Vec<Vec<f64>>> = val_set
        .iter()
        .map(|e| normalize_all(&normalizer, &e.features))
        .collect::<Result<_>>()?;
    let val_truth: Vec<usize> = val_set.iter().map(|e| e.no_guess_prefix_len() + 1).collect();

    let mut opt = Adagrad::new(cfg1.optimizer, phase1.param_count())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg1.seed.wrapping_add(0x9a5e));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(f64, Phase1Model)> = None;
    let mut wait = 0;
    for epoch in 1..=cfg1.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let (z, trace) = phase1.logits(&inputs[i])?;
            let (l, dz) = phase1_loss(&z, &labels[i], &class_weights, cfg1.aux)?;
            total += l / z.len() as f64;
            let g = phase1.gradient(&inputs[i], trace.as_ref(), &dz)?;
            opt.step(phase1.params_mut(), &g)?;
        }
        let preds: Vec<usize> = val_inputs
            .iter()
            .map(|x| {
                let z = phase1.logits(x)?.0;
                Ok(TransitionPrediction::from_probabilities(z.into_iter().map(sigmoid).collect())?.index)
            })
            .collect::<Result<_>>()?;
        let mut loc = [0.0; 3];
        for (d, slot) in loc.iter_mut().enumerate() {
            *slot = localization_accuracy(&preds, &val_truth, d)?;
        }
        report.phase1_log.push(Phase1Epoch {
            epoch,
            train_loss: total / train.len() as f64,
            localization: loc,
        });
        if best.as_ref().is_none_or(|(b, _)| loc[0] > *b) {
            best = Some((loc[0], phase1.clone()));
            report.phase1_best_epoch = Some(epoch);
            wait = 0;
        } else {
            wait += 1;
            let patience = cfg1.optimizer.early_stop_patience;
            if patience > 0 && wait >= patience {
                break;
            }
        }
    }
    if let Some((_, m)) = best {
        phase1 = m;
    }

    let suffix = |set: &[SequenceExample]| -> Vec<SequenceExample> {
        set.iter()
            .map(SequenceExample::guess_suffix)
            .filter(|e| !e.is_empty())
            .collect()
    };
    let mut cfg2 = config.phase2.clone();
    cfg2.include_no_guess = false;
    let (phase2, rep2) = train_unified(
        &suffix(train),
        &suffix(val),
        &cfg2,
        normalizer.clone(),
        features,
        embeddings,
    )?;
    report.phase2 = rep2;
    Ok((
        TwoPhaseModel {
            phase1_config: cfg1.clone(),
            phase1,
            class_weights,
            normalizer,
            phase2,
        },
        report,
    ))
}
