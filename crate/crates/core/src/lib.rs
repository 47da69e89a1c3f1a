//! Heavy-tailed multi-armed bandits driven by per-arm clipped SGD.
//!
//! Each arm runs its own clipped stochastic gradient descent on
//! `(x - mu)^2 / 2`, fed by a smoothed median-of-means gradient estimate;
//! the iterate plus a high-probability optimization-error bound gives the
//! arm's upper confidence index. Baselines (vanilla UCB, median-of-means
//! robust UCB), the noise laws, the environments and the experiment harness
//! live alongside.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clipped_sgd;
pub mod distributions;
pub mod environments;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod policies;

pub use clipped_sgd::{OptimizerState, Schedule};
pub use distributions::{NoiseKind, NoiseModel, RngStream};
pub use environments::{builtin_env, EnvSpec, SweepKind};
pub use error::{Error, Result};
pub use estimators::SmomConfig;
pub use harness::{
    run_experiment, run_trial, ExperimentReport, ExperimentSpec, RegretTrace, TrialOptions,
    TrialSummary,
};
pub use policies::{BanditPolicy, DeltaRule, PolicyConfig, PolicyFamily};
