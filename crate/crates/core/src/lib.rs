//! Sketch-QA: guessing what is being drawn, one stroke at a time.
//!
//! The crate bundles everything needed to study and reproduce an
//! incremental, open-vocabulary sketch guessing game:
//!
//! - [`corpus`]: the paired stroke/guess line format, guess normalization,
//!   augmentation, deterministic splits and stroke-prefix features.
//! - [`lexnet`]: word embeddings with nearest-neighbour retrieval, a hypernym
//!   taxonomy with Wu-Palmer similarity, and the six matching criteria used
//!   to decide whether an open-ended guess is correct.
//! - [`stats`]: Cohen's d, Wilson intervals, Wilcoxon signed-rank, Likert
//!   modes and guess-sequence analytics.
//! - [`neuralcore`]: a small f64 LSTM with hand-derived BPTT, regression and
//!   classification losses, Adagrad and orthogonal initialization.
//! - [`guesser`]: the unified embedding-regression guesser and the two-phase
//!   baseline, with streaming inference.
//! - [`eval`]: sequence-level accuracy@k, transition localization and
//!   Turing-test reporting.
//! - [`gateway`]: the command line and the HTTP session service.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod gateway;
pub mod guesser;
pub mod lexnet;
pub mod neuralcore;
pub mod report;
pub mod stats;

pub use error::{Error, Result};

/// Reserved vocabulary entry standing for "no guess yet".
pub const NO_GUESS: &str = "#";
