//! Experiment plumbing around the `ttgda` solvers: JSON configs, single
//! runs that persist a trace and a summary, stepsize/batch sweeps, and
//! check suites that report inequality margins.
//!
//! ```text
//! config   ExperimentConfig, validation, CLI overrides
//! run      execute one configuration, write trace.csv and summary.json
//! sweep    grid over (eta_y, eta_y/eta_x, M), one RNG stream per cell
//! check    lemma, rate and oracle suites as pass/fail reports
//! ```

pub mod check;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod sweep;

pub use check::{check, CheckReport, Suite};
pub use config::{Algorithm, ExperimentConfig, Overrides, Prepared, ProblemRef};
pub use error::{HarnessError, Result};
pub use run::{execute, run_experiment, Outcome, Summary};
pub use sweep::{run_sweep, CellResult, SweepConfig};
