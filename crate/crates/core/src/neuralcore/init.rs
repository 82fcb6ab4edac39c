use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::lstm::{LstmParams, LstmShape};
use crate::error::Result;

/// Default gain for orthogonal initialization.
pub const ORTHOGONAL_GAIN: f64 = 1.1;

/// Row-major `rows x cols` matrix with orthonormal columns (tall or square)
/// or orthonormal rows (wide), scaled by `gain`.
///
/// A Gaussian matrix is orthonormalized with modified Gram-Schmidt along the
/// shorter side.
pub fn orthogonal_init(rows: usize, cols: usize, gain: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (count, len) = if rows >= cols { (cols, rows) } else { (rows, cols) };
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(count);
    while vecs.len() < count {
        let mut v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        for q in &vecs {
            let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (a, b) in v.iter_mut().zip(q) {
                *a -= d * b;
            }
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        // a numerically dependent draw is discarded and redrawn
        if n > 1e-8 {
            vecs.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    let mut m = vec![0.0; rows * cols];
    for (k, v) in vecs.iter().enumerate() {
        for (j, &a) in v.iter().enumerate() {
            let (r, c) = if rows >= cols { (j, k) } else { (k, j) };
            m[r * cols + c] = gain * a;
        }
    }
    m
}

/// Orthogonal gate and read-out weights, zero biases except a forget-gate
/// bias of 1.
pub fn init_lstm(shape: LstmShape, gain: f64, seed: u64) -> Result<LstmParams> {
    let mut p = LstmParams::zeros(shape)?;
    let l = p.layout();
    let h = shape.hidden;
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let data = p.as_mut_slice();
    for gate in 0..4 {
        let w = orthogonal_init(h, shape.input, gain, seeds.random());
        let start = l.w.start + gate * h * shape.input;
        data[start..start + w.len()].copy_from_slice(&w);
        let u = orthogonal_init(h, h, gain, seeds.random());
        let start = l.u.start + gate * h * h;
        data[start..start + u.len()].copy_from_slice(&u);
    }
    let v = orthogonal_init(shape.output, h, gain, seeds.random());
    data[l.v.clone()].copy_from_slice(&v);
    p.set_forget_bias(1.0);
    Ok(p)
}
