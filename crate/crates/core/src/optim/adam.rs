use super::OptimError;
use crate::scalar::Scalar;

/// Adam hyperparameters plus loop bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub eps_hat: T,
    pub max_iterations: usize,
    /// Log a progress line every this many iterations; 0 disables.
    pub log_every: usize,
    /// Keep a parameter snapshot every this many iterations; 0 disables.
    pub snapshot_every: usize,
}

impl<T: Scalar> Default for AdamConfig<T> {
    fn default() -> Self {
        Self {
            learning_rate: T::lit(1e-3),
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps_hat: T::lit(1e-8),
            max_iterations: 1000,
            log_every: 50,
            snapshot_every: 0,
        }
    }
}

impl<T: Scalar> AdamConfig<T> {
    pub fn validate(&self) -> Result<(), OptimError> {
        let unit = |b: T| b >= T::zero() && b < T::one();
        if !(self.learning_rate > T::zero() && self.learning_rate.is_finite()) {
            return Err(OptimError::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate.to_f64_lossy()
            )));
        }
        if !unit(self.beta1) || !unit(self.beta2) {
            return Err(OptimError::Config("betas must lie in [0, 1)".into()));
        }
        if !(self.eps_hat >= T::zero()) {
            return Err(OptimError::Config("eps_hat must be non-negative".into()));
        }
        Ok(())
    }
}

/// First and second moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub step: u64,
}

impl<T: Scalar> OptState<T> {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step<T: Scalar>(
    params: &mut [T],
    grads: &[T],
    state: &mut OptState<T>,
    cfg: &AdamConfig<T>,
) -> Result<(), OptimError> {
    if grads.len() != params.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(OptimError::LengthMismatch {
            params: params.len(),
            grads: grads.len(),
            state: state.m.len().min(state.v.len()),
        });
    }
    if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
        return Err(OptimError::NonFiniteGradient { index });
    }
    state.step += 1;
    let t = state.step as i32;
    let one = T::one();
    let c1 = one - cfg.beta1.powi(t);
    let c2 = one - cfg.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (one - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (one - cfg.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        let denom = v_hat.sqrt() + cfg.eps_hat;
        if denom > T::zero() {
            params[i] = params[i] - cfg.learning_rate * m_hat / denom;
        }
    }
    Ok(())
}
