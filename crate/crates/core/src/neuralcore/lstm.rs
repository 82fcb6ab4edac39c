use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::sigmoid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LstmShape {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

impl LstmShape {
    pub fn new(input: usize, hidden: usize, output: usize) -> Self {
        LstmShape { input, hidden, output }
    }

    pub fn param_count(&self) -> usize {
        let (d, h, o) = (self.input, self.hidden, self.output);
        4 * h * d + 4 * h * h + 4 * h + o * h + o
    }

    fn validate(&self) -> Result<()> {
        if self.input == 0 || self.hidden == 0 || self.output == 0 {
            return Err(Error::invalid(format!("degenerate lstm shape {self:?}")));
        }
        Ok(())
    }
}

/// Named slices of the flat parameter vector, in storage order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    /// Input weights, `4H x D`, gate blocks in order input, forget, cell, output.
    pub w: Range<usize>,
    /// Recurrent weights, `4H x H`.
    pub u: Range<usize>,
    /// Gate biases, `4H`.
    pub b: Range<usize>,
    /// Output projection, `O x H`.
    pub v: Range<usize>,
    /// Output bias, `O`.
    pub c: Range<usize>,
}

impl Layout {
    pub fn of(s: LstmShape) -> Self {
        let (d, h, o) = (s.input, s.hidden, s.output);
        let w = 0..4 * h * d;
        let u = w.end..w.end + 4 * h * h;
        let b = u.end..u.end + 4 * h;
        let v = b.end..b.end + o * h;
        let c = v.end..v.end + o;
        Layout { w, u, b, v, c }
    }

    /// `(name, shape, range)` for each tensor, in storage order.
    pub fn tensors(&self, s: LstmShape) -> [(&'static str, Vec<usize>, Range<usize>); 5] {
        let (d, h, o) = (s.input, s.hidden, s.output);
        [
            ("w", vec![4 * h, d], self.w.clone()),
            ("u", vec![4 * h, h], self.u.clone()),
            ("b", vec![4 * h], self.b.clone()),
            ("v", vec![o, h], self.v.clone()),
            ("c", vec![o], self.c.clone()),
        ]
    }
}

/// A single-layer LSTM with a linear read-out, all weights in one flat
/// vector so optimizers and gradient checks can treat it uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    shape: LstmShape,
    data: Vec<f64>,
}

/// Recurrent state carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// Activated gates `[i, f, g, o]`, each of length H.
    gates: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
}

/// Result of running a whole sequence.
#[derive(Debug, Clone)]
pub struct LstmTrace {
    steps: Vec<StepCache>,
    pub outputs: Vec<Vec<f64>>,
}

impl LstmTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn hidden(&self, t: usize) -> &[f64] {
        &self.steps[t].h
    }

    pub fn cell(&self, t: usize) -> &[f64] {
        &self.steps[t].c
    }
}

/// `out += M x` for a row-major `rows x x.len()` matrix.
fn gemv_acc(m: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &m[r * cols..(r + 1) * cols];
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += M^T y` for a row-major `y.len() x out.len()` matrix.
fn gemv_t_acc(m: &[f64], y: &[f64], out: &mut [f64]) {
    let cols = out.len();
    for (r, &yr) in y.iter().enumerate() {
        if yr == 0.0 {
            continue;
        }
        let row = &m[r * cols..(r + 1) * cols];
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * yr;
        }
    }
}

/// `G += y x^T`.
fn outer_acc(g: &mut [f64], y: &[f64], x: &[f64]) {
    let cols = x.len();
    for (r, &yr) in y.iter().enumerate() {
        if yr == 0.0 {
            continue;
        }
        for (gv, xv) in g[r * cols..(r + 1) * cols].iter_mut().zip(x) {
            *gv += yr * xv;
        }
    }
}

impl LstmParams {
    pub fn zeros(shape: LstmShape) -> Result<Self> {
        shape.validate()?;
        Ok(LstmParams {
            shape,
            data: vec![0.0; shape.param_count()],
        })
    }

    pub fn from_vec(shape: LstmShape, data: Vec<f64>) -> Result<Self> {
        shape.validate()?;
        if data.len() != shape.param_count() {
            return Err(Error::Dimension {
                expected: shape.param_count(),
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("lstm parameters"));
        }
        Ok(LstmParams { shape, data })
    }

    pub fn shape(&self) -> LstmShape {
        self.shape
    }

    pub fn layout(&self) -> Layout {
        Layout::of(self.shape)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Sets the forget-gate biases.
    pub fn set_forget_bias(&mut self, value: f64) {
        let h = self.shape.hidden;
        let b = self.layout().b;
        self.data[b.start + h..b.start + 2 * h].fill(value);
    }

    pub fn initial_state(&self) -> LstmState {
        LstmState::zeros(self.shape.hidden)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.shape.input {
            return Err(Error::Dimension {
                expected: self.shape.input,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("lstm input"));
        }
        Ok(())
    }

    fn cell(&self, state: &LstmState, x: &[f64]) -> StepCache {
        let h = self.shape.hidden;
        let l = self.layout();
        let mut a = self.data[l.b.clone()].to_vec();
        gemv_acc(&self.data[l.w.clone()], x, &mut a);
        gemv_acc(&self.data[l.u.clone()], &state.h, &mut a);
        for (k, v) in a.iter_mut().enumerate() {
            *v = if (2 * h..3 * h).contains(&k) { v.tanh() } else { sigmoid(*v) };
        }
        let (i, rest) = a.split_at(h);
        let (f, rest) = rest.split_at(h);
        let (g, o) = rest.split_at(h);
        let c: Vec<f64> = (0..h).map(|j| f[j] * state.c[j] + i[j] * g[j]).collect();
        let hn: Vec<f64> = (0..h).map(|j| o[j] * c[j].tanh()).collect();
        StepCache {
            x: x.to_vec(),
            h_prev: state.h.clone(),
            c_prev: state.c.clone(),
            gates: a,
            c,
            h: hn,
        }
    }

    /// Linear read-out of a hidden vector.
    pub fn project(&self, h: &[f64]) -> Vec<f64> {
        let l = self.layout();
        let mut y = self.data[l.c.clone()].to_vec();
        gemv_acc(&self.data[l.v.clone()], h, &mut y);
        y
    }

    /// Advances `state` by one input and returns the read-out.
    pub fn step(&self, state: &mut LstmState, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let cache = self.cell(state, x);
        let y = self.project(&cache.h);
        state.h = cache.h;
        state.c = cache.c;
        Ok(y)
    }

    /// Runs a sequence from the zero state, keeping what backprop needs.
    pub fn forward(&self, inputs: &[Vec<f64>]) -> Result<LstmTrace> {
        let mut state = self.initial_state();
        let mut steps = Vec::with_capacity(inputs.len());
        let mut outputs = Vec::with_capacity(inputs.len());
        for x in inputs {
            self.check_input(x)?;
            let cache = self.cell(&state, x);
            outputs.push(self.project(&cache.h));
            state.h.clone_from(&cache.h);
            state.c.clone_from(&cache.c);
            steps.push(cache);
        }
        Ok(LstmTrace { steps, outputs })
    }

    /// Backpropagation through time. `d_outputs[t]` is the loss gradient
    /// with respect to `trace.outputs[t]`; returns the gradient for every
    /// parameter in storage order.
    pub fn backward(&self, trace: &LstmTrace, d_outputs: &[Vec<f64>]) -> Result<Vec<f64>> {
        if d_outputs.len() != trace.len() {
            return Err(Error::LengthMismatch {
                what: format!("{} output gradients for {} steps", d_outputs.len(), trace.len()),
            });
        }
        let h = self.shape.hidden;
        let l = self.layout();
        let mut grad = vec![0.0; self.data.len()];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut da = vec![0.0; 4 * h];
        for (s, dy) in trace.steps.iter().zip(d_outputs).rev() {
            if dy.len() != self.shape.output {
                return Err(Error::Dimension {
                    expected: self.shape.output,
                    got: dy.len(),
                });
            }
            outer_acc(&mut grad[l.v.clone()], dy, &s.h);
            for (g, d) in grad[l.c.clone()].iter_mut().zip(dy) {
                *g += d;
            }
            let mut dh = dh_next.clone();
            gemv_t_acc(&self.data[l.v.clone()], dy, &mut dh);

            let (i, rest) = s.gates.split_at(h);
            let (f, rest) = rest.split_at(h);
            let (g, o) = rest.split_at(h);
            for j in 0..h {
                let tc = s.c[j].tanh();
                let d_o = dh[j] * tc;
                let dc = dh[j] * o[j] * (1.0 - tc * tc) + dc_next[j];
                let d_i = dc * g[j];
                let d_g = dc * i[j];
                let d_f = dc * s.c_prev[j];
                dc_next[j] = dc * f[j];
                da[j] = d_i * i[j] * (1.0 - i[j]);
                da[h + j] = d_f * f[j] * (1.0 - f[j]);
                da[2 * h + j] = d_g * (1.0 - g[j] * g[j]);
                da[3 * h + j] = d_o * o[j] * (1.0 - o[j]);
            }
            outer_acc(&mut grad[l.w.clone()], &da, &s.x);
            outer_acc(&mut grad[l.u.clone()], &da, &s.h_prev);
            for (gb, d) in grad[l.b.clone()].iter_mut().zip(&da) {
                *gb += d;
            }
            dh_next.fill(0.0);
            gemv_t_acc(&self.data[l.u.clone()], &da, &mut dh_next);
        }
        Ok(grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_keep_zero_state() {
        let mut p = LstmParams::zeros(LstmShape::new(3, 4, 2)).unwrap();
        p.set_forget_bias(1.0);
        let tr = p.forward(&vec![vec![0.0; 3]; 5]).unwrap();
        assert_eq!(tr.len(), 5);
        for t in 0..5 {
            assert!(tr.hidden(t).iter().all(|v| *v == 0.0));
            assert!(tr.cell(t).iter().all(|v| *v == 0.0));
            assert_eq!(tr.outputs[t].len(), 2);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let p = LstmParams::zeros(LstmShape::new(3, 4, 2)).unwrap();
        assert!(p.forward(&[vec![0.0; 2]]).is_err());
        assert!(p.forward(&[vec![f64::NAN; 3]]).is_err());
    }

    #[test]
    fn layout_is_contiguous() {
        let s = LstmShape::new(5, 3, 2);
        let l = Layout::of(s);
        assert_eq!(l.c.end, s.param_count());
        assert_eq!(l.w.len(), 60);
    }
}
