use std::sync::Arc;

use serde::Serialize;

use super::GuesserModel;
use crate::error::Result;
use crate::lexnet::Neighbor;
use crate::neuralcore::LstmState;
use crate::NO_GUESS;

/// Output of one streaming step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamStep {
    pub vector: Vec<f64>,
    pub top_k: Vec<Neighbor>,
    /// "#" is the nearest neighbour: the model holds back its guess.
    pub is_no_guess: bool,
}

impl StreamStep {
    /// The best word, or `None` while the model is not guessing.
    pub fn guess(&self) -> Option<&str> {
        if self.is_no_guess {
            None
        } else {
            self.top_k.first().map(|n| n.word.as_str())
        }
    }
}

/// Feeds a model one stroke prefix at a time, keeping private recurrent
/// state; many guessers can share one model.
#[derive(Debug, Clone)]
pub struct StreamingGuesser {
    model: Arc<GuesserModel>,
    state: LstmState,
    k: usize,
    steps: usize,
}

impl StreamingGuesser {
    pub fn new(model: Arc<GuesserModel>, k: usize) -> Self {
        let state = model.lstm.initial_state();
        StreamingGuesser {
            model,
            state,
            k: k.max(1),
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn reset(&mut self) {
        self.state = self.model.lstm.initial_state();
        self.steps = 0;
    }

    /// Consumes the features of the next prefix.
    pub fn push(&mut self, raw: &[f64]) -> Result<StreamStep> {
        let (vector, top_k) = self.model.step(&mut self.state, raw, self.k)?;
        self.steps += 1;
        let is_no_guess = top_k.first().is_some_and(|n| n.word == NO_GUESS);
        Ok(StreamStep {
            vector,
            top_k,
            is_no_guess,
        })
    }
}
