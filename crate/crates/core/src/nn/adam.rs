//! Bias-corrected Adam.

use super::net::Param;
use crate::error::{Result, SgError};

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(params: &[Param]) -> Self {
        AdamState {
            step: 0,
            m: params.iter().map(|p| vec![0.0; p.data.len()]).collect(),
            v: params.iter().map(|p| vec![0.0; p.data.len()]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam step over all parameter tensors.
pub fn adam_update(
    params: &mut [Param],
    grads: &[Vec<f64>],
    state: &mut AdamState,
    config: &AdamConfig,
) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() {
        return Err(SgError::Config(format!(
            "adam: {} parameter tensors, {} gradients, {} moment slots",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    for (i, p) in params.iter().enumerate() {
        if grads[i].len() != p.data.len() {
            return Err(SgError::DimensionMismatch {
                expected: p.data.len(),
                got: grads[i].len(),
            });
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - config.beta1.powi(t);
    let bc2 = 1.0 - config.beta2.powi(t);
    for (i, p) in params.iter_mut().enumerate() {
        let m = &mut state.m[i];
        let v = &mut state.v[i];
        for ((w, g), (mi, vi)) in p
            .data
            .iter_mut()
            .zip(&grads[i])
            .zip(m.iter_mut().zip(v.iter_mut()))
        {
            *mi = config.beta1 * *mi + (1.0 - config.beta1) * g;
            *vi = config.beta2 * *vi + (1.0 - config.beta2) * g * g;
            let m_hat = *mi / bc1;
            let v_hat = *vi / bc2;
            *w -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
        }
    }
    Ok(())
}
