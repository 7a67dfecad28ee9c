//! Inertial proximal incremental aggregated gradient (iPIAG) methods.
//!
//! The crate solves composite problems `Φ(x) = Σₙ fₙ(x) + h(x)` where every
//! `fₙ` is smooth and convex and `h` has a cheap proximal map. The smooth
//! components are split into blocks owned by simulated workers; the master
//! aggregates the most recently received block gradients, which may be stale,
//! and applies the three-step inertial proximal update
//!
//! ```text
//! y_{k+1} = x_k + η₁ (x_k − x_{k−1})
//! z_{k+1} = prox_{αh}(y_{k+1} − α g_k)
//! x_{k+1} = z_{k+1} + η₂ (z_{k+1} − z_k)
//! ```
//!
//! Plain PIAG (`η₁ = η₂ = 0`), PIAG with heavy-ball momentum (`η₂ = 0`) and
//! PIAG with Nesterov-like extrapolation (`η₁ = 0`) are parameter settings of
//! the same engine.
//!
//! Modules:
//! - [`problem`]: the [`CompositeProblem`] container and evaluation helpers.
//! - [`prox`]: separable proximal operators.
//! - [`schedule`]: deterministic delay schedules for the master/worker protocol.
//! - [`solver`]: gradient table, update step and the run loop producing a [`Trace`].
//! - [`rates`]: step-size/inertia certificates and trajectory verifiers.
//! - [`problems`]: seeded problem generators (toy chain problem, Lasso, separable quadratics).

pub mod error;
pub mod problem;
pub mod problems;
pub mod prox;
pub mod rates;
pub mod rng;
pub mod schedule;
pub mod solver;

pub use error::{Error, Result};
pub use problem::{
    evaluate_objective, full_gradient, gradient_consistency_check, CompositeProblem,
    IterateState, KnownOptimum, SmoothComponents,
};
pub use prox::{ProxKind, ProxOperator, ProxSpec};
pub use rates::{CertificateKind, RateCertificate, RateInputs};
pub use schedule::{BlockPartition, DelaySchedule, ScheduleStep};
pub use solver::{run, run_synchronous, Method, RunOptions, SolverParams, Trace, TraceRecord};
