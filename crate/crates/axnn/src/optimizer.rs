//! Bias-corrected adaptive-moment (Adam) optimizer over a flat parameter view.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Per-parameter first/second moment accumulators plus the step counter.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl OptimizerState {
    pub fn new(num_params: usize, config: AdamConfig) -> Self {
        OptimizerState {
            config,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One Adam update. `params` and `grads` must match the state's length;
    /// a non-finite gradient is reported as divergence with the given context.
    pub fn adam_step(&mut self, params: &mut [f64], grads: &[f64], context: &str) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "adam_step: state holds {} parameters, got params={} grads={}",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence(format!(
                "non-finite gradient at optimizer step {} ({context})",
                self.step + 1
            )));
        }
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let bc1 = 1.0 - beta1.powi(self.step as i32);
        let bc2 = 1.0 - beta2.powi(self.step as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut state = OptimizerState::new(3, AdamConfig::default());
        let mut params = vec![1.0, -2.0, 0.5];
        let before = params.clone();
        state.adam_step(&mut params, &[0.0, 0.0, 0.0], "test").unwrap();
        assert_eq!(params, before);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn first_step_magnitude_equals_learning_rate() {
        // With constant gradient g the bias corrections cancel exactly at t=1,
        // so |update| = lr up to the epsilon in the denominator.
        let cfg = AdamConfig {
            learning_rate: 0.05,
            ..AdamConfig::default()
        };
        let mut state = OptimizerState::new(2, cfg);
        let mut params = vec![0.3, -0.7];
        state.adam_step(&mut params, &[2.5, -0.01], "test").unwrap();
        assert!((params[0] - (0.3 - 0.05)).abs() < 1e-9);
        assert!((params[1] - (-0.7 + 0.05)).abs() < 1e-6);
    }

    #[test]
    fn fifty_steps_shrink_quadratic() {
        // f(w) = w^2, grad = 2w, from w = 1 with lr = 0.1.
        let cfg = AdamConfig {
            learning_rate: 0.1,
            ..AdamConfig::default()
        };
        let mut state = OptimizerState::new(1, cfg);
        let mut w = vec![1.0];
        for _ in 0..50 {
            let g = vec![2.0 * w[0]];
            state.adam_step(&mut w, &g, "test").unwrap();
        }
        assert!(w[0].abs() < 0.5, "w after 50 steps: {}", w[0]);
    }

    #[test]
    fn non_finite_gradient_is_divergence() {
        let mut state = OptimizerState::new(1, AdamConfig::default());
        let mut params = vec![1.0];
        let err = state
            .adam_step(&mut params, &[f64::NAN], "learner 3, iteration 7")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("diverged") && msg.contains("learner 3, iteration 7"));
    }

    #[test]
    fn step_counter_increments_by_one() {
        let mut state = OptimizerState::new(1, AdamConfig::default());
        let mut params = vec![1.0];
        for expected in 1..=5 {
            state.adam_step(&mut params, &[0.1], "test").unwrap();
            assert_eq!(state.step_count(), expected);
        }
    }
}
