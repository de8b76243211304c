//! First-order optimizers over flat parameter vectors.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    RmsProp { decay: f64, eps: f64 },
    RAdam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerConfig {
    pub fn rmsprop() -> Self {
        Self::RmsProp { decay: 0.99, eps: 1e-8 }
    }

    pub fn radam() -> Self {
        Self::RAdam { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::radam()
    }
}

/// `v ← ρv + (1 − ρ)g²`, `p ← p − lr · g / (√v + ε)`.
pub fn rmsprop_step(params: &mut [f64], grads: &[f64], square_avg: &mut [f64], lr: f64, decay: f64, eps: f64) {
    for ((p, &g), v) in params.iter_mut().zip(grads).zip(square_avg.iter_mut()) {
        *v = decay * *v + (1.0 - decay) * g * g;
        *p -= lr * g / (v.sqrt() + eps);
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RAdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl RAdamState {
    pub fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], step: 0 }
    }
}

/// Length of the approximated simple moving average at step `t`.
pub fn radam_rho(beta2: f64, t: u64) -> f64 {
    let rho_inf = 2.0 / (1.0 - beta2) - 1.0;
    let b2t = beta2.powi(t as i32);
    rho_inf - 2.0 * t as f64 * b2t / (1.0 - b2t)
}

/// Rectified Adam. While `ρ_t ≤ 4` the adaptive term is skipped and the
/// bias-corrected momentum is applied directly.
pub fn radam_step(params: &mut [f64], grads: &[f64], state: &mut RAdamState, lr: f64, beta1: f64, beta2: f64, eps: f64) {
    state.step += 1;
    let t = state.step;
    let bc1 = 1.0 - beta1.powi(t as i32);
    let bc2 = 1.0 - beta2.powi(t as i32);
    let rho_inf = 2.0 / (1.0 - beta2) - 1.0;
    let rho = radam_rho(beta2, t);
    let rect = (rho > 4.0).then(|| (((rho - 4.0) * (rho - 2.0) * rho_inf) / ((rho_inf - 4.0) * (rho_inf - 2.0) * rho)).sqrt());
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(state.m.iter_mut()).zip(state.v.iter_mut()) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / bc1;
        match rect {
            Some(r) => *p -= lr * r * m_hat / ((*v / bc2).sqrt() + eps),
            None => *p -= lr * m_hat,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Optimizer {
    RmsProp { decay: f64, eps: f64, square_avg: Vec<f64> },
    RAdam { beta1: f64, beta2: f64, eps: f64, state: RAdamState },
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, n: usize) -> Result<Self> {
        Ok(match config {
            OptimizerConfig::RmsProp { decay, eps } => {
                if !(0.0..1.0).contains(&decay) || !(eps > 0.0) {
                    return Err(invalid("rmsprop needs decay in [0, 1) and eps > 0"));
                }
                Self::RmsProp { decay, eps, square_avg: vec![0.0; n] }
            }
            OptimizerConfig::RAdam { beta1, beta2, eps } => {
                if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || !(eps > 0.0) {
                    return Err(invalid("radam needs betas in [0, 1) and eps > 0"));
                }
                Self::RAdam { beta1, beta2, eps, state: RAdamState::new(n) }
            }
        })
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        match self {
            Self::RmsProp { decay, eps, square_avg } => rmsprop_step(params, grads, square_avg, lr, *decay, *eps),
            Self::RAdam { beta1, beta2, eps, state } => radam_step(params, grads, state, lr, *beta1, *beta2, *eps),
        }
    }
}
