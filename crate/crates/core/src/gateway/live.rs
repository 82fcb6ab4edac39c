//! Attaching a trained checkpoint to live sessions.

use std::path::Path;
use std::sync::Arc;

use crate::corpus::{extract_features, FeatureConfig, Stroke};
use crate::error::{Error, Result};
use crate::guesser::{GuesserModel, StreamingGuesser, TwoPhaseModel};
use crate::lexnet::EmbeddingTable;
use crate::neuralcore::Checkpoint;
use crate::NO_GUESS;

/// One immutable model shared by every session.
#[derive(Debug, Clone)]
pub enum LiveModel {
    Unified(Arc<GuesserModel>),
    TwoPhase(Arc<TwoPhaseModel>),
}

impl LiveModel {
    /// Loads either checkpoint kind. Live play rasterizes strokes itself, so
    /// models trained on precomputed features are rejected.
    pub fn load(path: &Path, embeddings: Arc<EmbeddingTable>) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?, embeddings)
    }

    pub fn from_checkpoint(ck: &Checkpoint, embeddings: Arc<EmbeddingTable>) -> Result<Self> {
        let model = match ck.kind.as_str() {
            "unified" => LiveModel::Unified(Arc::new(GuesserModel::from_checkpoint(ck, embeddings)?)),
            "two-phase" => LiveModel::TwoPhase(Arc::new(TwoPhaseModel::from_checkpoint(ck, embeddings)?)),
            other => return Err(Error::invalid(format!("unknown checkpoint kind {other:?}"))),
        };
        if model.features().is_none() {
            return Err(Error::invalid(
                "checkpoint was trained on precomputed features; live sessions need raster features",
            ));
        }
        Ok(model)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LiveModel::Unified(_) => "unified",
            LiveModel::TwoPhase(_) => "two-phase",
        }
    }

    pub fn features(&self) -> Option<FeatureConfig> {
        match self {
            LiveModel::Unified(m) => m.features,
            LiveModel::TwoPhase(m) => m.phase2.features,
        }
    }

    pub fn tracker(&self, k: usize) -> ModelTracker {
        let cfg = self.features().expect("checked at load");
        match self {
            LiveModel::Unified(m) => ModelTracker::Stream {
                cfg,
                guesser: StreamingGuesser::new(Arc::clone(m), k),
            },
            LiveModel::TwoPhase(m) => ModelTracker::Prefix {
                cfg,
                model: Arc::clone(m),
                k,
                history: Vec::new(),
            },
        }
    }
}

/// A session's private view of the model.
///
/// The unified model streams with its own recurrent state. The two-phase
/// model answers "#" until its localizer fires on the prefix seen so far,
/// then guesses with phase 2 from that step on.
#[derive(Debug, Clone)]
pub enum ModelTracker {
    Stream {
        cfg: FeatureConfig,
        guesser: StreamingGuesser,
    },
    Prefix {
        cfg: FeatureConfig,
        model: Arc<TwoPhaseModel>,
        k: usize,
        history: Vec<Vec<f64>>,
    },
}

impl ModelTracker {
    /// Top-k words after seeing `prefix`, which must extend the previous
    /// prefix by exactly one stroke.
    pub fn observe(&mut self, prefix: &[Stroke]) -> Result<Vec<String>> {
        match self {
            ModelTracker::Stream { cfg, guesser } => {
                let step = guesser.push(&extract_features(prefix, cfg))?;
                Ok(step.top_k.into_iter().map(|n| n.word).collect())
            }
            ModelTracker::Prefix { cfg, model, k, history } => {
                history.push(extract_features(prefix, cfg));
                let probs = model.transition_probabilities(history)?;
                match probs.iter().position(|&p| p >= 0.5) {
                    Some(i) => Ok(model
                        .ranked_from(history, i + 1, *k)?
                        .pop()
                        .expect("non-empty prefix")),
                    None => Ok(vec![NO_GUESS.to_string()]),
                }
            }
        }
    }
}
