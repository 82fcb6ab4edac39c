use serde::Serialize;

use crate::error::{Error, Result};

/// Per-category 0/1 correctness outcomes with their mean and population
/// variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryAccuracy {
    pub category: String,
    pub samples: Vec<bool>,
    pub mean: f64,
    pub variance: f64,
}

impl CategoryAccuracy {
    pub fn from_samples(category: impl Into<String>, samples: Vec<bool>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("no samples"));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().filter(|&&s| s).count() as f64 / n;
        let variance = samples
            .iter()
            .map(|&s| (f64::from(u8::from(s)) - mean).powi(2))
            .sum::<f64>()
            / n;
        Ok(CategoryAccuracy {
            category: category.into(),
            samples,
            mean,
            variance,
        })
    }

    /// Builds directly from summary moments (no samples kept).
    pub fn from_moments(category: impl Into<String>, mean: f64, variance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mean) || variance < 0.0 || !variance.is_finite() {
            return Err(Error::invalid("mean must lie in [0,1] and variance be non-negative"));
        }
        Ok(CategoryAccuracy {
            category: category.into(),
            samples: Vec::new(),
            mean,
            variance,
        })
    }
}

/// Cohen's d of machine over human accuracy with the pooled standard
/// deviation `sqrt((V_m + V_h) / 2)`.
pub fn cohens_d(machine: &CategoryAccuracy, human: &CategoryAccuracy) -> Result<f64> {
    let s = ((machine.variance + human.variance) / 2.0).sqrt();
    if s == 0.0 {
        return Err(Error::Undefined(format!(
            "pooled standard deviation is zero for {:?}",
            machine.category
        )));
    }
    Ok((machine.mean - human.mean) / s)
}

/// Average d over categories, skipping those where d is undefined.
/// Returns the mean and the number of categories it covers.
pub fn mean_cohens_d(pairs: &[(CategoryAccuracy, CategoryAccuracy)]) -> Result<(f64, usize)> {
    let ds: Vec<f64> = pairs.iter().filter_map(|(m, h)| cohens_d(m, h).ok()).collect();
    if ds.is_empty() {
        return Err(Error::Undefined("no category has a defined effect size".into()));
    }
    Ok((ds.iter().sum::<f64>() / ds.len() as f64, ds.len()))
}

/// Conventional banding of |d|.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EffectSize {
    Negligible,
    Small,
    Medium,
    Large,
}

impl EffectSize {
    pub fn classify(d: f64) -> Self {
        match d.abs() {
            x if x < 0.2 => EffectSize::Negligible,
            x if x < 0.5 => EffectSize::Small,
            x if x < 0.8 => EffectSize::Medium,
            _ => EffectSize::Large,
        }
    }
}

/// Wilson score interval for a binomial proportion, clamped to `[0, 1]`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("wilson interval needs n >= 1"));
    }
    if successes > n {
        return Err(Error::invalid("successes exceed trials"));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::invalid("z must be positive"));
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    // the bounds touch 0 and 1 exactly at the extremes; rounding would not
    let lo = if successes == 0 { 0.0 } else { (centre - half).clamp(0.0, 1.0) };
    let hi = if successes == n { 1.0 } else { (centre + half).clamp(0.0, 1.0) };
    Ok((lo, hi))
}
