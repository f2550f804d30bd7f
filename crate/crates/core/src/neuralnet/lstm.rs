// SPDX-License-Identifier: Apache-2.0

//! LSTM cell with hand-derived reverse mode.
//!
//! The four gate maps are stacked into one weight matrix of shape
//! `4H x (H + D)` acting on the concatenation `[f_prev, o]`. Row blocks are,
//! in order: forget gate `G`, input gate `I`, candidate `E`, output gate `D`.
//!
//! ```text
//! G = sigmoid(W_g [f_prev, o] + b_g)
//! I = sigmoid(W_i [f_prev, o] + b_i)
//! E = tanh(W_e [f_prev, o] + b_e)
//! c = G * c_prev + I * E
//! D = sigmoid(W_d [f_prev, o] + b_d)
//! f = D * tanh(c)
//! ```
//!
//! All step functions work on a batch: row `b` of every matrix belongs to
//! sample `b`.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Forget,
    Input,
    Candidate,
    Output,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Forget, Gate::Input, Gate::Candidate, Gate::Output];

    fn block(self) -> usize {
        match self {
            Gate::Forget => 0,
            Gate::Input => 1,
            Gate::Candidate => 2,
            Gate::Output => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub hidden: usize,
    pub input_dim: usize,
    /// `4H x (H + D)`, gate blocks stacked by row.
    pub weights: Array2<f64>,
    /// `4H`.
    pub bias: Array1<f64>,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmParams {
    pub fn zeros(hidden: usize, input_dim: usize) -> Self {
        Self {
            hidden,
            input_dim,
            weights: Array2::zeros((4 * hidden, hidden + input_dim)),
            bias: Array1::zeros(4 * hidden),
        }
    }

    pub fn gate_weights(&self, gate: Gate) -> ArrayView2<'_, f64> {
        let h = self.hidden;
        let k = gate.block();
        self.weights.slice(s![k * h..(k + 1) * h, ..])
    }

    pub fn gate_bias(&self, gate: Gate) -> ArrayView1<'_, f64> {
        let h = self.hidden;
        let k = gate.block();
        self.bias.slice(s![k * h..(k + 1) * h])
    }

    pub fn set_gate(&mut self, gate: Gate, weights: ArrayView2<f64>, bias: ArrayView1<f64>) {
        let h = self.hidden;
        let k = gate.block();
        self.weights.slice_mut(s![k * h..(k + 1) * h, ..]).assign(&weights);
        self.bias.slice_mut(s![k * h..(k + 1) * h]).assign(&bias);
    }

    fn check(&self, batch: usize, x: &ArrayView2<f64>, f_prev: &ArrayView2<f64>, c_prev: &ArrayView2<f64>) -> Result<()> {
        let h = self.hidden;
        if self.weights.dim() != (4 * h, h + self.input_dim) || self.bias.len() != 4 * h {
            return Err(Error::Shape(format!(
                "LSTM weights {:?} / bias {} inconsistent with hidden {h}, input {}",
                self.weights.dim(),
                self.bias.len(),
                self.input_dim
            )));
        }
        let ok = x.dim() == (batch, self.input_dim) && f_prev.dim() == (batch, h) && c_prev.dim() == (batch, h);
        if !ok {
            return Err(Error::Shape(format!(
                "LSTM step got input {:?}, hidden {:?}, cell {:?}; expected ({batch}, {}), ({batch}, {h})",
                x.dim(),
                f_prev.dim(),
                c_prev.dim(),
                self.input_dim
            )));
        }
        Ok(())
    }

    /// One batched cell step.
    pub fn step(&self, x: ArrayView2<f64>, f_prev: ArrayView2<f64>, c_prev: ArrayView2<f64>) -> Result<StepCache> {
        let batch = f_prev.nrows();
        self.check(batch, &x, &f_prev, &c_prev)?;
        let h = self.hidden;
        let mut z = Array2::zeros((batch, h + self.input_dim));
        z.slice_mut(s![.., ..h]).assign(&f_prev);
        z.slice_mut(s![.., h..]).assign(&x);

        let mut gates = Array2::zeros((batch, 4 * h));
        gates.assign(&self.bias.broadcast((batch, 4 * h)).expect("bias broadcast"));
        general_mat_mul(1.0, &z, &self.weights.t(), 1.0, &mut gates);

        let mut c = Array2::zeros((batch, h));
        let mut tanh_c = Array2::zeros((batch, h));
        let mut f = Array2::zeros((batch, h));
        for b in 0..batch {
            let mut g = gates.row_mut(b);
            for j in 0..h {
                let fg = sigmoid(g[j]);
                let ig = sigmoid(g[h + j]);
                let e = g[2 * h + j].tanh();
                let d = sigmoid(g[3 * h + j]);
                g[j] = fg;
                g[h + j] = ig;
                g[2 * h + j] = e;
                g[3 * h + j] = d;
                let cell = fg * c_prev[(b, j)] + ig * e;
                let tc = cell.tanh();
                c[(b, j)] = cell;
                tanh_c[(b, j)] = tc;
                f[(b, j)] = d * tc;
            }
        }
        Ok(StepCache {
            z,
            gates,
            c_prev: c_prev.to_owned(),
            c,
            tanh_c,
            f,
        })
    }

    /// Reverse of [`step`](Self::step).
    ///
    /// `df`, `dc` are the loss gradients w.r.t. this step's outputs `f` and `c`.
    /// Accumulates into `grad` and returns the gradients w.r.t. `(f_prev, c_prev)`.
    pub fn step_backward(
        &self,
        cache: &StepCache,
        df: ArrayView2<f64>,
        dc: ArrayView2<f64>,
        grad: &mut LstmParams,
    ) -> (Array2<f64>, Array2<f64>) {
        let h = self.hidden;
        let batch = cache.f.nrows();
        let mut dpre = Array2::zeros((batch, 4 * h));
        let mut dc_prev = Array2::zeros((batch, h));
        for b in 0..batch {
            let g = cache.gates.row(b);
            for j in 0..h {
                let (fg, ig, e, d) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                let tc = cache.tanh_c[(b, j)];
                let dfj = df[(b, j)];
                let dcell = dc[(b, j)] + dfj * d * (1.0 - tc * tc);
                dpre[(b, j)] = dcell * cache.c_prev[(b, j)] * fg * (1.0 - fg);
                dpre[(b, h + j)] = dcell * e * ig * (1.0 - ig);
                dpre[(b, 2 * h + j)] = dcell * ig * (1.0 - e * e);
                dpre[(b, 3 * h + j)] = dfj * tc * d * (1.0 - d);
                dc_prev[(b, j)] = dcell * fg;
            }
        }
        general_mat_mul(1.0, &dpre.t(), &cache.z, 1.0, &mut grad.weights);
        grad.bias += &dpre.sum_axis(Axis(0));
        let dz = dpre.dot(&self.weights);
        let df_prev = dz.slice(s![.., ..h]).to_owned();
        (df_prev, dc_prev)
    }
}

/// Activations retained by one batched step for the backward pass.
#[derive(Debug, Clone)]
pub struct StepCache {
    /// `[f_prev, o]`.
    pub z: Array2<f64>,
    /// Post-activation gates `[G, I, E, D]`.
    pub gates: Array2<f64>,
    pub c_prev: Array2<f64>,
    pub c: Array2<f64>,
    pub tanh_c: Array2<f64>,
    pub f: Array2<f64>,
}

impl StepCache {
    pub fn gate(&self, gate: Gate) -> ArrayView2<'_, f64> {
        let h = self.f.ncols();
        let k = gate.block();
        self.gates.slice(s![.., k * h..(k + 1) * h])
    }
}

/// Single-sample cell step: returns `(f_s, c_s, cache)`.
pub fn lstm_cell_forward(
    o: &[f64],
    f_prev: &[f64],
    c_prev: &[f64],
    p: &LstmParams,
) -> Result<(Vec<f64>, Vec<f64>, StepCache)> {
    let row = |v: &[f64]| Array2::from_shape_vec((1, v.len()), v.to_vec()).expect("row vector");
    let (x, f0, c0) = (row(o), row(f_prev), row(c_prev));
    let cache = p.step(x.view(), f0.view(), c0.view())?;
    Ok((cache.f.row(0).to_vec(), cache.c.row(0).to_vec(), cache))
}
