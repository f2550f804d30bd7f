// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::network::{NetworkArch, Params};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment accumulators mirroring the parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Params,
    pub v: Params,
}

impl AdamState {
    pub fn new(arch: &NetworkArch, config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            m: Params::zeros(arch),
            v: Params::zeros(arch),
        }
    }
}

fn same_shape(a: &Params, b: &Params) -> bool {
    let (ta, tb) = (a.tensors(), b.tensors());
    ta.len() == tb.len() && ta.iter().zip(&tb).all(|((na, xa), (nb, xb))| na == nb && xa.len() == xb.len())
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(params: &mut Params, grads: &Params, state: &mut AdamState) -> Result<()> {
    if !same_shape(params, grads) || !same_shape(params, &state.m) || !same_shape(params, &state.v) {
        return Err(Error::Shape("Adam: parameter, gradient and moment shapes differ".into()));
    }
    state.step += 1;
    let AdamConfig { learning_rate, beta1, beta2, epsilon } = state.config;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    let tensors = params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.tensors_mut())
        .zip(state.v.tensors_mut());
    for ((((_, theta), (_, g)), (_, m)), (_, v)) in tensors {
        for k in 0..theta.len() {
            m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
            v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
            let m_hat = m[k] / c1;
            let v_hat = v[k] / c2;
            theta[k] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
    Ok(())
}
