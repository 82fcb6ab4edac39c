use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexnet::{dot, norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Mse,
    Cosine,
    HingeRank,
    Convex,
}

impl LossKind {
    pub fn needs_negative(self) -> bool {
        matches!(self, LossKind::HingeRank | LossKind::Convex)
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "mse" => Ok(LossKind::Mse),
            "cosine" => Ok(LossKind::Cosine),
            "hinge-rank" | "hinge" => Ok(LossKind::HingeRank),
            "convex" => Ok(LossKind::Convex),
            other => Err(Error::invalid(format!("unknown loss {other:?}"))),
        }
    }
}

/// Where hinge-loss negatives are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeSampling {
    /// Any dictionary word other than the target.
    #[default]
    WholeDictionary,
    /// Only other category names.
    OtherCategory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub kind: LossKind,
    pub margin: f64,
    pub lambda: f64,
    #[serde(default)]
    pub negative_sampling: NegativeSampling,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            kind: LossKind::Convex,
            margin: 0.1,
            lambda: 1.0,
            negative_sampling: NegativeSampling::WholeDictionary,
        }
    }
}

impl LossConfig {
    pub fn of(kind: LossKind) -> Self {
        LossConfig {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.margin > 0.0) || !self.margin.is_finite() {
            return Err(Error::invalid("margin must be positive"));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid("lambda must be non-negative"));
        }
        Ok(())
    }
}

fn unit(v: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((v.iter().map(|x| x / n).collect(), n))
}

/// `1 - cos(p, g)` and its gradient in `p`.
fn cosine(p: &[f64], g: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (ph, pn) = unit(p)?;
    let (gh, _) = unit(g)?;
    let c = dot(&ph, &gh);
    let grad = ph.iter().zip(&gh).map(|(a, b)| -(b - c * a) / pn).collect();
    Ok((1.0 - c, grad))
}

/// `max(0, margin - p̂·ĝ + p̂·ĥ)`; the subgradient is zero at the kink.
fn hinge(p: &[f64], g: &[f64], h: &[f64], margin: f64) -> Result<(f64, Vec<f64>)> {
    let (ph, pn) = unit(p)?;
    let (gh, _) = unit(g)?;
    let (hh, _) = unit(h)?;
    let u: Vec<f64> = hh.iter().zip(&gh).map(|(a, b)| a - b).collect();
    if u.iter().all(|v| *v == 0.0) {
        return Err(Error::invalid("negative sample coincides with the target"));
    }
    let pu = dot(&ph, &u);
    let raw = margin + pu;
    if raw <= 0.0 {
        return Ok((0.0, vec![0.0; p.len()]));
    }
    let grad = u.iter().zip(&ph).map(|(a, b)| (a - pu * b) / pn).collect();
    Ok((raw, grad))
}

/// Regression loss between a predicted and a target embedding, with the
/// exact gradient in `p`. Hinge and convex losses need a negative `h`.
pub fn compute_loss(cfg: &LossConfig, p: &[f64], g: &[f64], h: Option<&[f64]>) -> Result<(f64, Vec<f64>)> {
    if p.len() != g.len() {
        return Err(Error::Dimension {
            expected: g.len(),
            got: p.len(),
        });
    }
    if let Some(h) = h {
        if h.len() != g.len() {
            return Err(Error::Dimension {
                expected: g.len(),
                got: h.len(),
            });
        }
    }
    if p.iter().chain(g).chain(h.unwrap_or(&[])).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("loss input"));
    }
    let negative = || h.ok_or_else(|| Error::invalid(format!("{:?} loss needs a negative sample", cfg.kind)));
    match cfg.kind {
        LossKind::Mse => {
            let d: Vec<f64> = p.iter().zip(g).map(|(a, b)| a - b).collect();
            Ok((dot(&d, &d), d.iter().map(|x| 2.0 * x).collect()))
        }
        LossKind::Cosine => cosine(p, g),
        LossKind::HingeRank => hinge(p, g, negative()?, cfg.margin),
        LossKind::Convex => {
            let (lc, gc) = cosine(p, g)?;
            let (lh, gh) = hinge(p, g, negative()?, cfg.margin)?;
            let grad = gc.iter().zip(&gh).map(|(a, b)| a + cfg.lambda * b).collect();
            Ok((lc + cfg.lambda * lh, grad))
        }
    }
}

/// Per-class loss weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub w0: f64,
    pub w1: f64,
}

impl Default for ClassWeights {
    fn default() -> Self {
        ClassWeights { w0: 1.0, w1: 1.0 }
    }
}

impl ClassWeights {
    /// `w_c = 0.5 / f_c` for class fractions `f0 + f1 = 1`, so that
    /// `w_c * f_c` is the mean class frequency.
    pub fn from_fractions(f0: f64, f1: f64) -> Result<Self> {
        if !(f0 > 0.0 && f1 > 0.0) || ((f0 + f1) - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("class fractions ({f0}, {f1}) must be positive and sum to 1")));
        }
        Ok(ClassWeights { w0: 0.5 / f0, w1: 0.5 / f1 })
    }

    /// Weights from label counts; a missing class falls back to unit weights.
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a bool>) -> Self {
        let (mut n0, mut n1) = (0usize, 0usize);
        for &l in labels {
            if l {
                n1 += 1;
            } else {
                n0 += 1;
            }
        }
        let total = (n0 + n1) as f64;
        Self::from_fractions(n0 as f64 / total, n1 as f64 / total).unwrap_or_default()
    }

    pub fn weight(&self, label: bool) -> f64 {
        if label {
            self.w1
        } else {
            self.w0
        }
    }
}

const PROB_EPS: f64 = 1e-12;

/// Class-weighted binary cross-entropy on a probability, with its gradient
/// in `prob`. Probabilities are clamped to `[1e-12, 1 - 1e-12]`.
pub fn weighted_bce(prob: f64, label: bool, w: &ClassWeights) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::invalid(format!("probability {prob} outside [0, 1]")));
    }
    let p = prob.clamp(PROB_EPS, 1.0 - PROB_EPS);
    let wl = w.weight(label);
    Ok(if label {
        (-wl * p.ln(), -wl / p)
    } else {
        (-wl * (1.0 - p).ln(), wl / (1.0 - p))
    })
}

/// [`weighted_bce`] on a logit, computed stably; gradient in the logit.
pub fn weighted_bce_logit(z: f64, label: bool, w: &ClassWeights) -> Result<(f64, f64)> {
    if !z.is_finite() {
        return Err(Error::NonFinite("logit"));
    }
    let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
    let y = if label { 1.0 } else { 0.0 };
    let wl = w.weight(label);
    let s = 1.0 / (1.0 + (-z).exp());
    Ok((wl * (softplus - y * z), wl * (s - y)))
}

/// Per-step weights peaking at the transition step `k + 1` (one-based) of a
/// length-`n` sequence: `exp(-alpha * (1 - (t / (k+1))^s))` with `s = 1`
/// before the transition and `s = -1` after it.
pub fn transition_weights(k: usize, n: usize, alpha: f64) -> Result<Vec<f64>> {
    if k >= n {
        return Err(Error::invalid(format!("transition step {} beyond length {n}", k + 1)));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha must be positive"));
    }
    let peak = (k + 1) as f64;
    Ok((1..=n)
        .map(|t| {
            let t = t as f64;
            let ratio = if t <= peak { t / peak } else { peak / t };
            (-alpha * (1.0 - ratio)).exp()
        })
        .collect())
}

/// Output of [`ranking_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct RankingLoss {
    pub total: f64,
    /// `sum_t lambda_r * L_r^t`, the ranking part alone.
    pub rank_total: f64,
    /// `lambda_s * L_c^t + lambda_r * L_r^t` per step.
    pub per_step: Vec<f64>,
    /// Gradient of `total` in each score.
    pub grad: Vec<f64>,
}

/// Sequence loss with a ranking term over detection scores.
///
/// `scores[t]` is the model's probability for the true label at step `t`.
/// The classification term is the class-weighted `-log score`. Within each
/// phase the ranking term penalizes a score falling below the phase's
/// running maximum; at the transition step it is the previous label's
/// probability, `1 - score`.
pub fn ranking_loss(
    scores: &[f64],
    labels: &[bool],
    lambda_s: f64,
    lambda_r: f64,
    w: &ClassWeights,
) -> Result<RankingLoss> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: format!("{} scores for {} labels", scores.len(), labels.len()),
        });
    }
    if labels.windows(2).any(|p| p[0] && !p[1]) {
        return Err(Error::invalid("labels must have the form 0...0 1...1"));
    }
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::invalid(format!("score {s} outside [0, 1]")));
    }
    let n = scores.len();
    let mut per_step = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut rank_total = 0.0;
    // index of the running maximum within the current phase
    let mut best: Option<usize> = None;
    for t in 0..n {
        let s = scores[t].max(PROB_EPS);
        let wl = w.weight(labels[t]);
        per_step[t] += lambda_s * -wl * s.ln();
        grad[t] += lambda_s * -wl / s;

        let transition = t > 0 && labels[t] != labels[t - 1];
        let lr = if transition {
            best = None;
            grad[t] -= lambda_r;
            1.0 - scores[t]
        } else {
            match best {
                Some(b) if scores[b] > scores[t] => {
                    grad[t] -= lambda_r;
                    grad[b] += lambda_r;
                    scores[b] - scores[t]
                }
                _ => 0.0,
            }
        };
        per_step[t] += lambda_r * lr;
        rank_total += lambda_r * lr;
        if best.is_none_or(|b| scores[t] > scores[b]) {
            best = Some(t);
        }
    }
    Ok(RankingLoss {
        total: per_step.iter().sum(),
        rank_total,
        per_step,
        grad,
    })
}
