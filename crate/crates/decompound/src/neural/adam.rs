//! Adam optimizer with bias correction.

use super::params::ModelParameters;
use super::NeuralError;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First- and second-moment accumulators, laid out to mirror
/// [`ModelParameters::named_slices`] order.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &ModelParameters) -> Self {
        let shapes: Vec<usize> = params.named_slices().iter().map(|(_, s)| s.len()).collect();
        Self {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
            beta1: ADAM_BETA1,
            beta2: ADAM_BETA2,
            epsilon: ADAM_EPSILON,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam update. Fails fast on a non-finite gradient rather than letting
/// NaN spread through the parameters.
pub fn adam_step(
    params: &mut ModelParameters,
    grads: &ModelParameters,
    state: &mut AdamState,
    learning_rate: f64,
) -> Result<(), NeuralError> {
    for (name, slice) in grads.named_slices() {
        if slice.iter().any(|g| !g.is_finite()) {
            return Err(NeuralError::NonFiniteGradient(name));
        }
    }
    state.t += 1;
    let t = state.t as i32;
    let bias1 = 1.0 - state.beta1.powi(t);
    let bias2 = 1.0 - state.beta2.powi(t);
    let grad_slices = grads.named_slices();
    let mut param_slices = params.slices_mut();
    for (si, dst) in param_slices.iter_mut().enumerate() {
        let (_, g) = &grad_slices[si];
        let m = &mut state.m[si];
        let v = &mut state.v[si];
        for ei in 0..dst.len() {
            let grad = g[ei];
            m[ei] = state.beta1 * m[ei] + (1.0 - state.beta1) * grad;
            v[ei] = state.beta2 * v[ei] + (1.0 - state.beta2) * grad * grad;
            let m_hat = m[ei] / bias1;
            let v_hat = v[ei] / bias2;
            dst[ei] -= learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}
