//! Adaptive explainable neural networks: two-stage ensembles of structured
//! additive-model networks with an exact ridge-function decomposition.
//!
//! The pipeline has three parts:
//!
//! 1. **Structured base learners** ([`learner`]): GAMnet (one small ReLU
//!    subnetwork per covariate) and xNN (ReLU subnetworks over learned linear
//!    projections), both with exact hand-derived backprop.
//! 2. **Ensemble training** ([`train`]): boosting or stacking over a
//!    penalized objective, with per-iteration candidate architecture search,
//!    a stage transition from GAMnet to xNN learners, and L1-penalized
//!    mixture-weight optimization ([`mixture`]).
//! 3. **Interpretation** ([`decompose`]): regrouping every ridge function by
//!    its active projection pattern into main effects and interaction
//!    effects that sum back to the prediction exactly, with variance-ratio
//!    importance ranking.
//!
//! [`data`] provides the synthetic benchmark generators, splitting, scaling,
//! and CSV interchange; [`metrics`] the evaluation measures.

pub mod config;
pub mod data;
pub mod decompose;
pub mod ensemble;
pub mod error;
pub mod gradcheck;
pub mod init;
pub mod learner;
pub mod matrix;
pub mod metrics;
pub mod mixture;
pub mod optimizer;
pub mod rng;
pub mod train;

pub use config::{Loss, Mode, RunConfig, RunConfigPatch};
pub use data::{Dataset, Scaler, SplitSpec, Task};
pub use decompose::{
    decompose, ActiveSet, DecomposeOptions, EffectTable, GroupId, ImportanceReport,
};
pub use ensemble::{Ensemble, Link};
pub use error::{Error, Result};
pub use learner::{BaseLearner, LearnerKind, LearnerSpec, SubnetSpec};
pub use matrix::{gemm, Matrix};
pub use optimizer::{AdamConfig, OptimizerState};
pub use rng::Rng;
pub use train::{train_axnn, CandidateReport, IterationRecord};
