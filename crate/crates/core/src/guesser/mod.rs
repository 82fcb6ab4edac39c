//! Recurrent guessers: the unified embedding-regression model, the
//! two-phase baseline, streaming inference and manifest-driven runs.

mod manifest;
mod stream;
mod two_phase;
mod unified;

pub use manifest::{run_manifest, GridRun, Manifest, ManifestModel, RunSummary};
pub use stream::{StreamStep, StreamingGuesser};
pub use two_phase::{
    Phase1Aux, Phase1Config, Phase1Model, Phase1Scorer, TransitionPrediction, TwoPhaseConfig, TwoPhaseModel,
};
pub use two_phase::{train_two_phase, Phase1Epoch, TwoPhaseReport};
pub use unified::{train_unified, EpochLog, GuesserModel, TrainReport, UnifiedConfig, LOG_K};

use crate::corpus::{Corpus, FeatureExtractor, FeatureNormalizer};
use crate::error::{Error, Result};

/// A sketch's per-step features paired with its guess words.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceExample {
    pub sketch_id: String,
    pub category: String,
    pub features: Vec<Vec<f64>>,
    pub guesses: Vec<String>,
}

impl SequenceExample {
    pub fn len(&self) -> usize {
        self.guesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.guesses.is_empty()
    }

    /// Number of leading no-guess steps.
    pub fn no_guess_prefix_len(&self) -> usize {
        self.guesses.iter().position(|g| !g.is_empty()).unwrap_or(self.guesses.len())
    }

    /// Binary guess/no-guess target, `0^k 1^(N-k)` for preprocessed data.
    pub fn transition_labels(&self) -> Vec<bool> {
        let k = self.no_guess_prefix_len();
        (0..self.len()).map(|t| t >= k).collect()
    }

    /// The suffix starting at the first guess.
    pub fn guess_suffix(&self) -> SequenceExample {
        let k = self.no_guess_prefix_len();
        SequenceExample {
            sketch_id: self.sketch_id.clone(),
            category: self.category.clone(),
            features: self.features[k..].to_vec(),
            guesses: self.guesses[k..].to_vec(),
        }
    }
}

/// Extracts features for every record of a corpus.
pub fn featurize(c: &Corpus, fx: &dyn FeatureExtractor) -> Result<Vec<SequenceExample>> {
    c.records()
        .iter()
        .map(|r| {
            let features = fx.sequence_features(&r.sketch)?;
            if features.len() != r.guesses.len() {
                return Err(Error::LengthMismatch {
                    what: format!("{} feature steps for {} guesses of {:?}", features.len(), r.guesses.len(), r.id()),
                });
            }
            Ok(SequenceExample {
                sketch_id: r.id().to_string(),
                category: r.category().to_string(),
                features,
                guesses: r.guesses.guesses.clone(),
            })
        })
        .collect()
}

/// Min-max statistics over every step of the training examples.
pub fn fit_normalizer(train: &[SequenceExample]) -> Result<FeatureNormalizer> {
    FeatureNormalizer::fit(train.iter().flat_map(|e| e.features.iter().map(Vec::as_slice)))
}

pub(crate) fn normalize_all(n: &FeatureNormalizer, feats: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    feats.iter().map(|x| n.apply(x)).collect()
}
