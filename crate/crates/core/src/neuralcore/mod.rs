//! A small f64 numerical core: LSTM with hand-derived backpropagation
//! through time, embedding-regression and classification losses, Adagrad,
//! orthogonal initialization and checkpoints.

mod checkpoint;
mod init;
mod loss;
mod lstm;
mod optim;

pub use checkpoint::{lstm_from_checkpoint, lstm_tensors, Checkpoint, Tensor, MAGIC};
pub use init::{init_lstm, orthogonal_init, ORTHOGONAL_GAIN};
pub use loss::{
    compute_loss, ranking_loss, transition_weights, weighted_bce, weighted_bce_logit, ClassWeights, LossConfig,
    LossKind, NegativeSampling, RankingLoss,
};
pub use lstm::{Layout, LstmParams, LstmShape, LstmState, LstmTrace};
pub use optim::{Adagrad, OptimizerConfig};

/// Logistic function.
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
