//! Bias-corrected Adam.

use super::{NetworkError, NetworkParams, ParamGradient};

/// Optimizer moments plus step counter. Moment arrays are zero at `t = 0`
/// and `t` advances by exactly one per step.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        Self {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// Rebuild a state from serialized parts (checkpoint loading).
    pub fn from_parts(
        m: Vec<f64>,
        v: Vec<f64>,
        t: u64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    ) -> Result<Self, NetworkError> {
        if m.len() != v.len() {
            return Err(NetworkError::ShapeMismatch(
                "moment arrays differ in length".into(),
            ));
        }
        Ok(Self {
            m,
            v,
            t,
            beta1,
            beta2,
            epsilon,
        })
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn first_moments(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moments(&self) -> &[f64] {
        &self.v
    }

    pub fn param_count(&self) -> usize {
        self.m.len()
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut NetworkParams,
    grad: &ParamGradient,
    lr: f64,
) -> Result<(), NetworkError> {
    let count = params.param_count();
    if grad.len() != count || state.m.len() != count {
        return Err(NetworkError::ShapeMismatch(format!(
            "params {count}, grad {}, moments {}",
            grad.len(),
            state.m.len()
        )));
    }
    if !(lr > 0.0) {
        return Err(NetworkError::InvalidConfig(
            "learning rate must be positive".into(),
        ));
    }
    state.t += 1;
    let c1 = 1.0 - state.beta1.powi(state.t.min(i32::MAX as u64) as i32);
    let c2 = 1.0 - state.beta2.powi(state.t.min(i32::MAX as u64) as i32);
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let g = grad.as_slice();
    let (m, v) = (&mut state.m, &mut state.v);
    params.for_each_param_mut(|i, p| {
        let gi = g[i];
        m[i] = b1 * m[i] + (1.0 - b1) * gi;
        v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
        let mhat = m[i] / c1;
        let vhat = v[i] / c2;
        *p -= lr * mhat / (vhat.sqrt() + eps);
    });
    Ok(())
}
