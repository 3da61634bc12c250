//! Decoupled-weight-decay Adam over the flat parameter vector.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConstants {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConstants {
    fn default() -> Self {
        AdamWConstants {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.01,
        }
    }
}

/// First/second moment accumulators and the step counter.
#[derive(Debug, Clone)]
pub struct AdamWState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamWState {
    pub fn new(num_params: usize) -> Self {
        AdamWState {
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        }
    }
}

/// One update: bias-corrected moment update, then
/// `theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)`.
pub fn adamw_step(
    state: &mut AdamWState,
    params: &mut [f64],
    grads: &[f64],
    lr: f64,
    constants: &AdamWConstants,
) -> Result<()> {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), state.m.len());
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - constants.beta1.powi(t);
    let bc2 = 1.0 - constants.beta2.powi(t);
    let b1 = constants.beta1;
    let b2 = constants.beta2;
    for i in 0..params.len() {
        let g = grads[i];
        let m = b1 * state.m[i] + (1.0 - b1) * g;
        let v = b2 * state.v[i] + (1.0 - b2) * g * g;
        state.m[i] = m;
        state.v[i] = v;
        let m_hat = m / bc1;
        let v_hat = v / bc2;
        params[i] -= lr * (m_hat / (v_hat.sqrt() + constants.epsilon)
            + constants.weight_decay * params[i]);
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite {
            context: "adamw parameter update",
        });
    }
    Ok(())
}
