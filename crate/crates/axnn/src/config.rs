//! Training configuration: ensemble mode, loss, architecture seeds, candidate
//! rule, optimizer settings, penalties, and stage-transition rules.

use crate::error::{Error, Result};
use crate::optimizer::AdamConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Each learner fits the residual structure left by the frozen ensemble.
    Boosting,
    /// Each learner fits the raw response; mixture weights do the averaging.
    Stacking,
    /// Boosting with the GAMnet stage removed: xNN learners only.
    OneStage,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Boosting => write!(f, "boosting"),
            Mode::Stacking => write!(f, "stacking"),
            Mode::OneStage => write!(f, "one-stage"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// Squared error on the identity link.
    Squared,
    /// Log-loss on the logit link; training happens on the link scale.
    Logistic,
}

impl Loss {
    /// Per-sample loss at a link-scale prediction.
    pub fn value(&self, pred_link: f64, y: f64) -> f64 {
        match self {
            Loss::Squared => {
                let r = pred_link - y;
                r * r
            }
            // softplus(z) - y z, computed stably
            Loss::Logistic => pred_link.max(0.0) + (-pred_link.abs()).exp().ln_1p() - y * pred_link,
        }
    }

    /// Derivative with respect to the link-scale prediction.
    pub fn derivative(&self, pred_link: f64, y: f64) -> f64 {
        match self {
            Loss::Squared => 2.0 * (pred_link - y),
            Loss::Logistic => sigmoid(pred_link) - y,
        }
    }

    /// Mean loss over a batch of link-scale predictions.
    pub fn mean_risk(&self, preds: &[f64], ys: &[f64]) -> f64 {
        debug_assert_eq!(preds.len(), ys.len());
        preds
            .iter()
            .zip(ys)
            .map(|(&p, &y)| self.value(p, y))
            .sum::<f64>()
            / preds.len() as f64
    }

    /// Upper bound on the loss curvature, used to size proximal steps.
    pub fn curvature_bound(&self) -> f64 {
        match self {
            Loss::Squared => 2.0,
            Loss::Logistic => 0.25,
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Everything that determines a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub loss: Loss,
    /// Cap on stage-1 (GAMnet) iterations.
    pub j1_max: usize,
    /// Cap on the total number of base learners across both stages.
    pub j2_max: usize,
    /// Seed subnet widths for the first stage-1 candidate.
    pub stage1_hidden: Vec<usize>,
    /// Seed subnet widths for the first stage-2 candidate.
    pub stage2_hidden: Vec<usize>,
    /// Number of ridge functions K in each stage-2 xNN.
    pub stage2_ridges: usize,
    pub epochs_per_iteration: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Complexity penalty multiplier (lambda in the regularized objective).
    pub lambda: f64,
    /// Flat per-learner penalty added to lambda * r(h).
    pub beta_penalty: f64,
    /// Consecutive non-improving iterations before a stage ends.
    pub patience: usize,
    /// Relative improvement below which an iteration counts as non-improving.
    pub rel_tol: f64,
    pub seed: u64,
    /// Worker threads for candidate fitting; results are identical for any
    /// worker count.
    pub workers: usize,
}

impl RunConfig {
    /// Defaults for the given mode. Boosting seeds weak learners (GAMnet
    /// widths [5], xNN with 2 ridges of width 4); stacking seeds strong ones
    /// (GAMnet widths [10], xNN with 15 ridges of width 10).
    pub fn defaults(mode: Mode) -> Self {
        let (stage1_hidden, stage2_hidden, stage2_ridges) = match mode {
            Mode::Boosting | Mode::OneStage => (vec![5], vec![4], 2),
            Mode::Stacking => (vec![10], vec![10], 15),
        };
        RunConfig {
            mode,
            loss: Loss::Squared,
            j1_max: 10,
            j2_max: 40,
            stage1_hidden,
            stage2_hidden,
            stage2_ridges,
            epochs_per_iteration: 30,
            batch_size: 256,
            adam: AdamConfig::default(),
            lambda: 0.0,
            beta_penalty: 1e-5,
            patience: 2,
            rel_tol: 1e-3,
            seed: 0,
            workers: 1,
        }
    }

    /// Validate every field, collecting all offending fields at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.mode != Mode::OneStage && self.j1_max == 0 {
            bad.push("j1_max must be >= 1".to_string());
        }
        if self.j2_max == 0 {
            bad.push("j2_max must be >= 1".to_string());
        }
        if self.stage1_hidden.is_empty() || self.stage1_hidden.iter().any(|&w| w == 0) {
            bad.push(format!(
                "stage1_hidden must be non-empty with widths >= 1, got {:?}",
                self.stage1_hidden
            ));
        }
        if self.stage2_hidden.is_empty() || self.stage2_hidden.iter().any(|&w| w == 0) {
            bad.push(format!(
                "stage2_hidden must be non-empty with widths >= 1, got {:?}",
                self.stage2_hidden
            ));
        }
        if self.stage2_ridges == 0 {
            bad.push("stage2_ridges must be >= 1".to_string());
        }
        if self.epochs_per_iteration == 0 {
            bad.push("epochs_per_iteration must be >= 1".to_string());
        }
        if self.batch_size == 0 {
            bad.push("batch_size must be >= 1".to_string());
        }
        if !(self.adam.learning_rate > 0.0) {
            bad.push(format!(
                "adam.learning_rate must be > 0, got {}",
                self.adam.learning_rate
            ));
        }
        if !(0.0..1.0).contains(&self.adam.beta1) || !(0.0..1.0).contains(&self.adam.beta2) {
            bad.push(format!(
                "adam decay rates must lie in [0, 1), got ({}, {})",
                self.adam.beta1, self.adam.beta2
            ));
        }
        if !(self.adam.epsilon > 0.0) {
            bad.push(format!("adam.epsilon must be > 0, got {}", self.adam.epsilon));
        }
        if self.lambda < 0.0 {
            bad.push(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if self.beta_penalty < 0.0 {
            bad.push(format!("beta_penalty must be >= 0, got {}", self.beta_penalty));
        }
        if self.patience == 0 {
            bad.push("patience must be >= 1".to_string());
        }
        if !(self.rel_tol > 0.0) {
            bad.push(format!("rel_tol must be > 0, got {}", self.rel_tol));
        }
        if self.workers == 0 {
            bad.push("workers must be >= 1".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(bad))
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::defaults(Mode::Boosting)
    }
}

/// Partial configuration, e.g. parsed from a JSON config file. Unset fields
/// fall back to the mode's defaults; unknown fields are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigPatch {
    pub mode: Option<Mode>,
    pub loss: Option<Loss>,
    pub j1_max: Option<usize>,
    pub j2_max: Option<usize>,
    pub stage1_hidden: Option<Vec<usize>>,
    pub stage2_hidden: Option<Vec<usize>>,
    pub stage2_ridges: Option<usize>,
    pub epochs_per_iteration: Option<usize>,
    pub batch_size: Option<usize>,
    pub adam: Option<AdamConfig>,
    pub lambda: Option<f64>,
    pub beta_penalty: Option<f64>,
    pub patience: Option<usize>,
    pub rel_tol: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

impl RunConfigPatch {
    /// Resolve against the defaults of `self.mode` (or the given fallback
    /// mode when the patch does not set one).
    pub fn resolve(&self, fallback_mode: Mode) -> RunConfig {
        let mode = self.mode.unwrap_or(fallback_mode);
        let mut cfg = RunConfig::defaults(mode);
        macro_rules! merge {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        merge!(
            loss,
            j1_max,
            j2_max,
            stage1_hidden,
            stage2_hidden,
            stage2_ridges,
            epochs_per_iteration,
            batch_size,
            adam,
            lambda,
            beta_penalty,
            patience,
            rel_tol,
            seed,
            workers
        );
        cfg
    }
}
