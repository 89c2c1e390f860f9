//! Two-timescale gradient descent ascent (TTGDA) and its stochastic variant
//! (TTSGDA) for problems of the form
//!
//! ```text
//! min_{x in R^m} max_{y in Y} f(x, y)
//! ```
//!
//! where `f` is nonconvex in `x`, concave in `y`, and `Y` is convex and bounded.
//!
//! Besides the solvers themselves the crate carries the machinery needed to
//! measure what they achieve: evaluation of the max-function
//! `Phi(x) = max_y f(x, y)`, its Danskin gradient, Moreau-envelope proximal
//! points, gradient-mapping residuals, and runtime checks of the descent and
//! tracking inequalities that drive the convergence analysis.
//!
//! Module map:
//!
//! - [`model`]: regularity constants, the oracle trait, iterate state and run traces.
//! - [`noise`]: exact and Gaussian-noise samplers wrapping deterministic oracles.
//! - [`geometry`]: constraint sets with exact projections.
//! - [`schedules`]: stepsize pairs `(eta_x, eta_y)` for each problem regime.
//! - [`solvers`]: TTGDA, TTSGDA, minibatch gradients, projected ascent, extragradient, GDmax.
//! - [`stationarity`]: `Phi`, `grad Phi`, proximal points and f-stationarity.
//! - [`problems`]: built-in test problems and LIBSVM ingestion.
//! - [`certify`]: numeric checks of the structural lemmas along traces.

pub mod certify;
pub mod error;
pub mod geometry;
pub mod model;
pub mod noise;
pub mod problems;
pub mod schedules;
pub mod solvers;
pub mod stationarity;
pub mod vector;

pub use error::{Error, Result};
pub use geometry::ConstraintSet;
pub use model::{
    rng_for, validate_profile, Diagnostics, IterateState, IterRecord, MinimaxOracle, Regime,
    RegularityProfile, RunStatus, RunTrace, SolverRng, StochasticGradient,
};
pub use schedules::{StepRule, StepsizeSchedule};
pub use solvers::{
    extragradient_saddle, gdmax_run, projected_gradient_ascent, sg_minibatch, ttgda_run,
    ttsgda_run, DiagnosticsConfig, Retention, SolverConfig,
};
