// SPDX-License-Identifier: Apache-2.0

//! Encoder LSTM plus one of two output heads.
//!
//! - Static head: `H_pred = W f_S + b`, no hidden layers, no output activation.
//! - Sequence head: a decoder LSTM whose hidden and cell states both start at
//!   `f_S` and which runs `steps` times on empty inputs; each decoder output is
//!   projected to `per_step` values. A separate affine map of `f_S` yields the
//!   static couplings, appended after the sequence.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lstm::{Gate, LstmParams, StepCache};
use crate::dataset::DatasetMeta;
use crate::error::{Error, Result};

pub const DEFAULT_HIDDEN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeadArch {
    /// Affine map of `f_S` to `outputs` values.
    Static { outputs: usize },
    /// Decoder LSTM emitting `per_step` values for each of `steps` steps, then `statics` values.
    Sequence { per_step: usize, steps: usize, statics: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkArch {
    pub input_dim: usize,
    pub seq_len: usize,
    pub hidden: usize,
    pub head: HeadArch,
}

impl NetworkArch {
    /// Architecture matching a dataset: static head for static families, sequence head otherwise.
    pub fn for_dataset(meta: &DatasetMeta, hidden: usize) -> Self {
        let head = if meta.family.is_time_dependent() {
            HeadArch::Sequence {
                per_step: meta.per_step_targets(),
                steps: meta.n_points,
                statics: meta.n_static_targets(),
            }
        } else {
            HeadArch::Static {
                outputs: meta.n_static_targets(),
            }
        };
        Self {
            input_dim: 3 * meta.n_qubits,
            seq_len: meta.n_points,
            hidden,
            head,
        }
    }

    pub fn input_len(&self) -> usize {
        self.input_dim * self.seq_len
    }

    pub fn output_len(&self) -> usize {
        match self.head {
            HeadArch::Static { outputs } => outputs,
            HeadArch::Sequence { per_step, steps, statics } => per_step * steps + statics,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.seq_len == 0 || self.hidden == 0 || self.output_len() == 0 {
            return Err(Error::Shape(format!("degenerate architecture {self:?}")));
        }
        if let HeadArch::Sequence { per_step: 0, .. } | HeadArch::Sequence { steps: 0, .. } = self.head {
            return Err(Error::Shape("sequence head needs per_step >= 1 and steps >= 1".into()));
        }
        Ok(())
    }

    /// Fails with a message naming both values when `meta` does not fit this architecture.
    pub fn check_dataset(&self, meta: &DatasetMeta) -> Result<()> {
        let want = Self::for_dataset(meta, self.hidden);
        if self.seq_len != want.seq_len {
            return Err(Error::Shape(format!(
                "dataset has S = {} sampling points but the network expects S = {}",
                want.seq_len, self.seq_len
            )));
        }
        if self.input_dim != want.input_dim {
            return Err(Error::Shape(format!(
                "dataset has input width {} (N = {}) but the network expects {}",
                want.input_dim, meta.n_qubits, self.input_dim
            )));
        }
        if self.head != want.head {
            return Err(Error::Shape(format!(
                "dataset targets need head {:?} but the network has {:?}",
                want.head, self.head
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `out x in`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(outputs: usize, inputs: usize) -> Self {
        Self {
            weights: Array2::zeros((outputs, inputs)),
            bias: Array1::zeros(outputs),
        }
    }

    fn forward(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        let mut y = self.bias.broadcast((x.nrows(), self.bias.len())).expect("bias").to_owned();
        general_mat_mul(1.0, x, &self.weights.t(), 1.0, &mut y);
        y
    }

    /// Accumulates parameter gradients and returns `dL/dx`.
    fn backward(&self, x: &ArrayView2<f64>, dy: &ArrayView2<f64>, grad: &mut Dense) -> Array2<f64> {
        general_mat_mul(1.0, &dy.t(), x, 1.0, &mut grad.weights);
        grad.bias += &dy.sum_axis(Axis(0));
        dy.dot(&self.weights)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeadParams {
    Static(Dense),
    Sequence {
        decoder: LstmParams,
        projection: Dense,
        statics: Dense,
    },
}

/// Every trainable tensor of the network. Also used for gradients and optimizer moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub encoder: LstmParams,
    pub head: HeadParams,
}

impl Params {
    pub fn zeros(arch: &NetworkArch) -> Self {
        let h = arch.hidden;
        let head = match arch.head {
            HeadArch::Static { outputs } => HeadParams::Static(Dense::zeros(outputs, h)),
            HeadArch::Sequence { per_step, statics, .. } => HeadParams::Sequence {
                decoder: LstmParams::zeros(h, 0),
                projection: Dense::zeros(per_step, h),
                statics: Dense::zeros(statics, h),
            },
        };
        Self {
            encoder: LstmParams::zeros(h, arch.input_dim),
            head,
        }
    }

    /// Tensors in the fixed serialization order.
    pub fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        fn sl(a: &Array2<f64>) -> &[f64] {
            a.as_slice().expect("standard layout")
        }
        fn sv(a: &Array1<f64>) -> &[f64] {
            a.as_slice().expect("standard layout")
        }
        let mut out: Vec<(&'static str, &[f64])> = vec![
            ("encoder.weights", sl(&self.encoder.weights)),
            ("encoder.bias", sv(&self.encoder.bias)),
        ];
        match &self.head {
            HeadParams::Static(d) => {
                out.push(("head.weights", sl(&d.weights)));
                out.push(("head.bias", sv(&d.bias)));
            }
            HeadParams::Sequence { decoder, projection, statics } => {
                out.push(("decoder.weights", sl(&decoder.weights)));
                out.push(("decoder.bias", sv(&decoder.bias)));
                out.push(("projection.weights", sl(&projection.weights)));
                out.push(("projection.bias", sv(&projection.bias)));
                out.push(("statics.weights", sl(&statics.weights)));
                out.push(("statics.bias", sv(&statics.bias)));
            }
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        fn m2(a: &mut Array2<f64>) -> &mut [f64] {
            a.as_slice_mut().expect("standard layout")
        }
        fn m1(a: &mut Array1<f64>) -> &mut [f64] {
            a.as_slice_mut().expect("standard layout")
        }
        let mut out: Vec<(&'static str, &mut [f64])> = vec![
            ("encoder.weights", m2(&mut self.encoder.weights)),
            ("encoder.bias", m1(&mut self.encoder.bias)),
        ];
        match &mut self.head {
            HeadParams::Static(d) => {
                out.push(("head.weights", m2(&mut d.weights)));
                out.push(("head.bias", m1(&mut d.bias)));
            }
            HeadParams::Sequence { decoder, projection, statics } => {
                out.push(("decoder.weights", m2(&mut decoder.weights)));
                out.push(("decoder.bias", m1(&mut decoder.bias)));
                out.push(("projection.weights", m2(&mut projection.weights)));
                out.push(("projection.bias", m1(&mut projection.bias)));
                out.push(("statics.weights", m2(&mut statics.weights)));
                out.push(("statics.bias", m1(&mut statics.bias)));
            }
        }
        out
    }

    pub fn n_values(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// `self += other`, tensor by tensor.
    pub fn accumulate(&mut self, other: &Params) {
        for ((_, dst), (_, src)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, t) in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|(_, t)| t.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Glorot-uniform weights (per gate block for LSTMs), zero biases, forget-gate bias 1.
pub fn init_params(arch: &NetworkArch, seed: u64) -> Result<Params> {
    arch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Params::zeros(arch);
    init_lstm(&mut p.encoder, &mut rng);
    match &mut p.head {
        HeadParams::Static(d) => init_dense(d, &mut rng),
        HeadParams::Sequence { decoder, projection, statics } => {
            init_lstm(decoder, &mut rng);
            init_dense(projection, &mut rng);
            init_dense(statics, &mut rng);
        }
    }
    Ok(p)
}

pub(crate) fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn fill_uniform<R: Rng>(values: &mut [f64], bound: f64, rng: &mut R) {
    for v in values {
        *v = rng.random_range(-bound..=bound);
    }
}

fn init_lstm<R: Rng>(p: &mut LstmParams, rng: &mut R) {
    let h = p.hidden;
    let bound = glorot_bound(h + p.input_dim, h);
    fill_uniform(p.weights.as_slice_mut().expect("layout"), bound, rng);
    p.bias.fill(0.0);
    p.bias.slice_mut(s![..h]).fill(1.0);
    debug_assert_eq!(p.gate_bias(Gate::Forget).len(), h);
}

fn init_dense<R: Rng>(d: &mut Dense, rng: &mut R) {
    let (out, inp) = d.weights.dim();
    if out == 0 {
        return;
    }
    fill_uniform(d.weights.as_slice_mut().expect("layout"), glorot_bound(inp, out), rng);
    d.bias.fill(0.0);
}

/// Everything the backward pass needs from one batched forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub encoder: Vec<StepCache>,
    pub decoder: Option<Vec<StepCache>>,
    /// `f_S`, one row per sample.
    pub final_hidden: Array2<f64>,
    /// One row per sample, `output_len` columns.
    pub predictions: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub arch: NetworkArch,
    pub params: Params,
}

impl Network {
    pub fn new(arch: NetworkArch, seed: u64) -> Result<Self> {
        Ok(Self {
            params: init_params(&arch, seed)?,
            arch,
        })
    }

    /// Runs the encoder over `S` steps from `f_0 = c_0 = 0`, returning all step caches.
    pub fn encoder_forward(&self, inputs: &[&[f64]]) -> Result<Vec<StepCache>> {
        let (d, steps, h) = (self.arch.input_dim, self.arch.seq_len, self.arch.hidden);
        let batch = inputs.len();
        if let Some((i, bad)) = inputs.iter().enumerate().find(|(_, x)| x.len() != d * steps) {
            return Err(Error::Shape(format!(
                "sample {i} has {} inputs, expected S x 3N = {steps} x {d}",
                bad.len()
            )));
        }
        let mut caches: Vec<StepCache> = Vec::with_capacity(steps);
        let zeros = Array2::zeros((batch, h));
        let mut x = Array2::zeros((batch, d));
        for step in 0..steps {
            for (b, sample) in inputs.iter().enumerate() {
                x.row_mut(b)
                    .as_slice_mut()
                    .expect("row")
                    .copy_from_slice(&sample[step * d..(step + 1) * d]);
            }
            let cache = match caches.last() {
                Some(prev) => self.params.encoder.step(x.view(), prev.f.view(), prev.c.view())?,
                None => self.params.encoder.step(x.view(), zeros.view(), zeros.view())?,
            };
            caches.push(cache);
        }
        Ok(caches)
    }

    pub fn forward(&self, inputs: &[&[f64]]) -> Result<ForwardCache> {
        let encoder = self.encoder_forward(inputs)?;
        let final_hidden = encoder.last().expect("seq_len >= 1").f.clone();
        let (predictions, decoder) = self.head_forward(final_hidden.view())?;
        Ok(ForwardCache {
            encoder,
            decoder,
            final_hidden,
            predictions,
        })
    }

    /// Output head applied to `f_S` (one row per sample).
    pub fn head_forward(&self, f_last: ArrayView2<f64>) -> Result<(Array2<f64>, Option<Vec<StepCache>>)> {
        if f_last.ncols() != self.arch.hidden {
            return Err(Error::Shape(format!(
                "head expects hidden width {}, got {}",
                self.arch.hidden,
                f_last.ncols()
            )));
        }
        let batch = f_last.nrows();
        match (&self.params.head, self.arch.head) {
            (HeadParams::Static(dense), HeadArch::Static { .. }) => Ok((dense.forward(&f_last), None)),
            (
                HeadParams::Sequence { decoder, projection, statics },
                HeadArch::Sequence { per_step, steps, statics: n_static },
            ) => {
                let mut pred = Array2::zeros((batch, per_step * steps + n_static));
                let empty = Array2::zeros((batch, 0));
                let mut caches: Vec<StepCache> = Vec::with_capacity(steps);
                for k in 0..steps {
                    let cache = match caches.last() {
                        Some(prev) => decoder.step(empty.view(), prev.f.view(), prev.c.view())?,
                        None => decoder.step(empty.view(), f_last, f_last)?,
                    };
                    let y = projection.forward(&cache.f.view());
                    pred.slice_mut(s![.., k * per_step..(k + 1) * per_step]).assign(&y);
                    caches.push(cache);
                }
                let tail = statics.forward(&f_last);
                pred.slice_mut(s![.., per_step * steps..]).assign(&tail);
                Ok((pred, Some(caches)))
            }
            _ => Err(Error::Shape("head parameters do not match architecture".into())),
        }
    }

    pub fn predict(&self, inputs: &[&[f64]]) -> Result<Array2<f64>> {
        Ok(self.forward(inputs)?.predictions)
    }

    /// Gradient of `sum_b MSE_b` over the batch (not yet divided by the batch size).
    ///
    /// Returns the gradients and the summed per-sample loss.
    pub fn backward(&self, cache: &ForwardCache, targets: &[&[f64]]) -> Result<(Params, f64)> {
        let m = self.arch.output_len();
        let batch = cache.predictions.nrows();
        if targets.len() != batch || targets.iter().any(|t| t.len() != m) {
            return Err(Error::Shape(format!("targets do not match {batch} predictions of length {m}")));
        }
        if cache.encoder.len() != self.arch.seq_len {
            return Err(Error::MissingCache("encoder steps"));
        }
        let mut grad = Params::zeros(&self.arch);
        let mut dpred = Array2::zeros((batch, m));
        let mut loss = 0.0;
        for (b, t) in targets.iter().enumerate() {
            for j in 0..m {
                let r = cache.predictions[(b, j)] - t[j];
                loss += r * r / m as f64;
                dpred[(b, j)] = 2.0 * r / m as f64;
            }
        }

        let f_last = cache.final_hidden.view();
        let mut df_last = match (&self.params.head, &mut grad.head, self.arch.head) {
            (HeadParams::Static(dense), HeadParams::Static(gd), _) => dense.backward(&f_last, &dpred.view(), gd),
            (
                HeadParams::Sequence { decoder, projection, statics },
                HeadParams::Sequence { decoder: gdec, projection: gproj, statics: gstat },
                HeadArch::Sequence { per_step, steps, .. },
            ) => {
                let dec = cache.decoder.as_ref().ok_or(Error::MissingCache("decoder steps"))?;
                if dec.len() != steps {
                    return Err(Error::MissingCache("decoder steps"));
                }
                let dstat = dpred.slice(s![.., per_step * steps..]);
                let mut df_last = statics.backward(&f_last, &dstat, gstat);
                let h = self.arch.hidden;
                let mut df_next = Array2::zeros((batch, h));
                let mut dc_next = Array2::zeros((batch, h));
                for k in (0..steps).rev() {
                    let dy = dpred.slice(s![.., k * per_step..(k + 1) * per_step]);
                    let mut df = projection.backward(&dec[k].f.view(), &dy, gproj);
                    df += &df_next;
                    let (dfp, dcp) = decoder.step_backward(&dec[k], df.view(), dc_next.view(), gdec);
                    df_next = dfp;
                    dc_next = dcp;
                }
                // The decoder's initial hidden and cell state are both f_S.
                df_last += &df_next;
                df_last += &dc_next;
                df_last
            }
            _ => return Err(Error::Shape("head parameters do not match architecture".into())),
        };

        let mut dc = Array2::zeros(df_last.raw_dim());
        for step_cache in cache.encoder.iter().rev() {
            let (dfp, dcp) = self.params.encoder.step_backward(step_cache, df_last.view(), dc.view(), &mut grad.encoder);
            df_last = dfp;
            dc = dcp;
        }
        Ok((grad, loss))
    }

    /// Mean batch MSE and its gradient.
    pub fn loss_and_gradient(&self, inputs: &[&[f64]], targets: &[&[f64]]) -> Result<(f64, Params)> {
        let cache = self.forward(inputs)?;
        let (mut grad, loss) = self.backward(&cache, targets)?;
        let n = inputs.len() as f64;
        grad.scale(1.0 / n);
        Ok((loss / n, grad))
    }

    /// Mean batch MSE without gradients.
    pub fn loss(&self, inputs: &[&[f64]], targets: &[&[f64]]) -> Result<f64> {
        let pred = self.predict(inputs)?;
        let mut total = 0.0;
        for (b, t) in targets.iter().enumerate() {
            total += super::loss::mse_loss(pred.row(b).as_slice().expect("row"), t)?;
        }
        Ok(total / targets.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralnet::lstm::sigmoid;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn static_arch(hidden: usize, d: usize, s: usize, m: usize) -> NetworkArch {
        NetworkArch {
            input_dim: d,
            seq_len: s,
            hidden,
            head: HeadArch::Static { outputs: m },
        }
    }

    #[test]
    fn zero_parameters_give_zero_final_state() {
        let arch = static_arch(4, 3, 5, 2);
        let net = Network { arch, params: Params::zeros(&arch) };
        let x: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).sin()).collect();
        let cache = net.forward(&[&x]).unwrap();
        assert!(cache.final_hidden.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_step_encoder_is_one_cell() {
        let arch = static_arch(3, 2, 1, 1);
        let net = Network::new(arch, 5).unwrap();
        let x = [0.4, -0.9];
        let enc = net.encoder_forward(&[&x]).unwrap();
        let (f, _, _) = crate::neuralnet::lstm::lstm_cell_forward(&x, &[0.0; 3], &[0.0; 3], &net.params.encoder).unwrap();
        assert_eq!(enc[0].f.row(0).to_vec(), f);
    }

    #[test]
    fn encoder_is_order_sensitive() {
        let arch = static_arch(6, 3, 8, 2);
        let net = Network::new(arch, 9).unwrap();
        let x: Vec<f64> = (0..24).map(|i| ((i * i) as f64 * 0.13).cos()).collect();
        let reversed: Vec<f64> = x.chunks(3).rev().flatten().copied().collect();
        let a = net.forward(&[&x]).unwrap().final_hidden;
        let b = net.forward(&[&reversed]).unwrap().final_hidden;
        let diff = (&a - &b).iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(diff > 1e-6);
    }

    #[test]
    fn static_head_with_zero_weights_returns_bias() {
        let arch = static_arch(4, 3, 2, 3);
        let mut net = Network::new(arch, 1).unwrap();
        if let HeadParams::Static(d) = &mut net.params.head {
            d.weights.fill(0.0);
            d.bias = array![0.25, -0.5, 0.75];
        }
        let pred = net.predict(&[&[0.1; 6]]).unwrap();
        assert_eq!(pred.row(0).to_vec(), vec![0.25, -0.5, 0.75]);
        assert_eq!(pred.ncols(), 3);
    }

    #[test]
    fn sequence_head_hand_computation() {
        // hidden = 2, two decoder steps, one value per step, one static output.
        let arch = NetworkArch {
            input_dim: 3,
            seq_len: 1,
            hidden: 2,
            head: HeadArch::Sequence { per_step: 1, steps: 2, statics: 1 },
        };
        let mut net = Network::new(arch, 3).unwrap();
        let f_s = [0.3, -0.5];
        let HeadParams::Sequence { decoder, projection, statics } = &mut net.params.head else {
            unreachable!()
        };
        decoder.weights = array![
            [0.1, 0.2],
            [-0.3, 0.4],
            [0.5, -0.1],
            [0.2, 0.2],
            [0.3, -0.6],
            [0.1, 0.1],
            [-0.2, 0.5],
            [0.4, 0.0]
        ];
        decoder.bias = array![1.0, 1.0, 0.1, -0.1, 0.0, 0.2, 0.3, -0.3];
        projection.weights = array![[0.7, -0.2]];
        projection.bias = array![0.05];
        statics.weights = array![[-0.4, 0.9]];
        statics.bias = array![0.1];
        let (w, bias) = (decoder.weights.clone(), decoder.bias.clone());

        // Scalar recurrence: both initial states equal f_S, inputs are empty.
        let (mut f, mut c) = (f_s, f_s);
        let mut want = Vec::new();
        for _ in 0..2 {
            let pre = |row: usize| w[(row, 0)] * f[0] + w[(row, 1)] * f[1] + bias[row];
            let mut nf = [0.0; 2];
            let mut nc = [0.0; 2];
            for j in 0..2 {
                let g = sigmoid(pre(j));
                let i = sigmoid(pre(2 + j));
                let e = pre(4 + j).tanh();
                let d = sigmoid(pre(6 + j));
                nc[j] = g * c[j] + i * e;
                nf[j] = d * nc[j].tanh();
            }
            f = nf;
            c = nc;
            want.push(0.7 * f[0] - 0.2 * f[1] + 0.05);
        }
        want.push(-0.4 * f_s[0] + 0.9 * f_s[1] + 0.1);

        let f_last = Array2::from_shape_vec((1, 2), f_s.to_vec()).unwrap();
        let (pred, _) = net.head_forward(f_last.view()).unwrap();
        for (got, exp) in pred.row(0).iter().zip(&want) {
            assert_abs_diff_eq!(*got, *exp, epsilon = 1e-15);
        }
    }

    #[test]
    fn init_rules() {
        let arch = NetworkArch {
            input_dim: 3,
            seq_len: 4,
            hidden: 8,
            head: HeadArch::Sequence { per_step: 1, steps: 4, statics: 2 },
        };
        let a = init_params(&arch, 77).unwrap();
        assert_eq!(a, init_params(&arch, 77).unwrap());
        assert_ne!(a, init_params(&arch, 78).unwrap());
        let enc_bound = glorot_bound(11, 8);
        assert!(a.encoder.weights.iter().all(|w| w.abs() <= enc_bound));
        assert!(a.encoder.gate_bias(Gate::Forget).iter().all(|&b| b == 1.0));
        for g in [Gate::Input, Gate::Candidate, Gate::Output] {
            assert!(a.encoder.gate_bias(g).iter().all(|&b| b == 0.0));
        }
        let HeadParams::Sequence { decoder, projection, statics } = &a.head else { unreachable!() };
        assert!(decoder.gate_bias(Gate::Forget).iter().all(|&b| b == 1.0));
        assert!(projection.bias.iter().chain(statics.bias.iter()).all(|&b| b == 0.0));
        assert!(projection.weights.iter().all(|w| w.abs() <= glorot_bound(8, 1)));
    }

    #[test]
    fn shape_errors() {
        let arch = static_arch(4, 3, 2, 3);
        let net = Network::new(arch, 1).unwrap();
        assert!(matches!(net.forward(&[&[0.0; 5]]), Err(Error::Shape(_))));
        let cache = net.forward(&[&[0.0; 6]]).unwrap();
        assert!(net.backward(&cache, &[&[0.0; 2]]).is_err());
        let mut broken = cache.clone();
        broken.encoder.pop();
        assert!(matches!(net.backward(&broken, &[&[0.0; 3]]), Err(Error::MissingCache(_))));
    }
}
