use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    /// Heavy-ball smoothing of the adapted update; 0 disables it.
    #[serde(default)]
    pub momentum: f64,
    /// Global gradient-norm cap; `None` disables clipping.
    pub grad_clip_norm: Option<f64>,
    pub weight_decay: f64,
    pub early_stop_patience: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.01,
            momentum: 0.0,
            grad_clip_norm: Some(5.0),
            weight_decay: 0.0005,
            early_stop_patience: 10,
        }
    }
}

impl OptimizerConfig {
    /// Settings for the transition (phase-I) classifier.
    pub fn phase_one() -> Self {
        OptimizerConfig {
            learning_rate: 5e-5,
            momentum: 0.9,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("momentum must lie in [0, 1)"));
        }
        if self.grad_clip_norm.is_some_and(|c| !(c > 0.0)) {
            return Err(Error::invalid("clip norm must be positive"));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::invalid("weight decay must be non-negative"));
        }
        Ok(())
    }
}

const ADAGRAD_EPS: f64 = 1e-8;

/// Adagrad with global-norm clipping, decoupled L2 decay and optional
/// heavy-ball momentum.
///
/// The decay term `lr * weight_decay * theta` bypasses the accumulator,
/// so a zero gradient moves parameters by the decay alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Adagrad {
    pub config: OptimizerConfig,
    accum: Vec<f64>,
    velocity: Vec<f64>,
}

impl Adagrad {
    pub fn new(config: OptimizerConfig, n: usize) -> Result<Self> {
        config.validate()?;
        Ok(Adagrad {
            config,
            accum: vec![0.0; n],
            velocity: vec![0.0; n],
        })
    }

    pub fn accumulator(&self) -> &[f64] {
        &self.accum
    }

    /// Applies one update in place and returns the pre-clip gradient norm.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<f64> {
        if params.len() != self.accum.len() || grads.len() != self.accum.len() {
            return Err(Error::Dimension {
                expected: self.accum.len(),
                got: if params.len() != self.accum.len() { params.len() } else { grads.len() },
            });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        let gnorm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
        let scale = match self.config.grad_clip_norm {
            Some(c) if gnorm > c => c / gnorm,
            _ => 1.0,
        };
        let OptimizerConfig {
            learning_rate: lr,
            momentum,
            weight_decay: wd,
            ..
        } = self.config;
        for (((p, &g), acc), vel) in params.iter_mut().zip(grads).zip(&mut self.accum).zip(&mut self.velocity) {
            let g = g * scale;
            *acc += g * g;
            let delta = -lr * g / (acc.sqrt() + ADAGRAD_EPS) - lr * wd * *p;
            *vel = momentum * *vel + delta;
            *p += *vel;
        }
        Ok(gnorm)
    }
}
