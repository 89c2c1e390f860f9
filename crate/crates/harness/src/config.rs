//! Experiment configuration.
//!
//! A config is a JSON object; only `problem` is required:
//!
//! ```json
//! {
//!   "problem": "quadratic-ncsc",
//!   "algorithm": "ttgda",
//!   "regime": "smooth-ncsc",
//!   "eps": 0.05,
//!   "max_iters": 20000,
//!   "seed": 7,
//!   "diagnostics_every": 10,
//!   "output": "out/quadratic"
//! }
//! ```
//!
//! `problem` is either a problem name or a full problem object (`{"kind":
//! "bilinear", "c": 2.0}`). Either `regime` or both `eta_x` and `eta_y`
//! select the stepsizes; `batch_m` overrides the minibatch size. Command
//! line flags take precedence over the file, which takes precedence over
//! the defaults listed on [`ExperimentConfig`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ttgda::problems::{DataSource, Problem, ProblemSpec};
use ttgda::{Regime, SolverConfig, StepsizeSchedule};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Ttgda,
    Ttsgda,
    Gdmax,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Ttgda => "ttgda",
            Algorithm::Ttsgda => "ttsgda",
            Algorithm::Gdmax => "gdmax",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Named(String),
    Spec(ProblemSpec),
}

impl ProblemRef {
    pub fn resolve(&self) -> Result<ProblemSpec> {
        match self {
            ProblemRef::Spec(s) => Ok(s.clone()),
            ProblemRef::Named(n) => ProblemSpec::named(n).ok_or_else(|| {
                HarnessError::config(
                    "problem",
                    format!(
                        "unknown problem '{n}' (expected bilinear, quadratic-ncsc, robust-logreg or wgan-linear)"
                    ),
                )
            }),
        }
    }
}

fn default_eps() -> f64 {
    0.1
}
fn default_iters() -> usize {
    1000
}
fn default_every() -> usize {
    10
}
fn default_inner_tol() -> f64 {
    1e-8
}
fn default_inner_steps() -> usize {
    10
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemRef,
    /// Default `ttgda`.
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub regime: Option<Regime>,
    #[serde(default)]
    pub eta_x: Option<f64>,
    #[serde(default)]
    pub eta_y: Option<f64>,
    #[serde(default)]
    pub batch_m: Option<usize>,
    /// Target accuracy; default `0.1`.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Iteration count `T`; default `1000`.
    #[serde(default = "default_iters", alias = "T")]
    pub max_iters: usize,
    #[serde(default)]
    pub seed: u64,
    /// Default `10`.
    #[serde(default = "default_every")]
    pub diagnostics_every: usize,
    /// Default `1e-8`.
    #[serde(default = "default_inner_tol")]
    pub inner_tol: f64,
    /// Inner ascent steps per outer step of `gdmax`; default `10`.
    #[serde(default = "default_inner_steps")]
    pub inner_steps: usize,
    #[serde(default)]
    pub moreau_rho: Option<f64>,
    #[serde(default)]
    pub early_stop: Option<f64>,
    /// Default: the origin.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// Default: the center of `Y`.
    #[serde(default)]
    pub y0: Option<Vec<f64>>,
    /// LIBSVM file replacing the dataset of a logistic-regression problem.
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// Output directory; default `out`.
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn for_problem(problem: ProblemRef) -> Self {
        ExperimentConfig {
            problem,
            algorithm: Algorithm::default(),
            regime: None,
            eta_x: None,
            eta_y: None,
            batch_m: None,
            eps: default_eps(),
            max_iters: default_iters(),
            seed: 0,
            diagnostics_every: default_every(),
            inner_tol: default_inner_tol(),
            inner_steps: default_inner_steps(),
            moreau_rho: None,
            early_stop: None,
            x0: None,
            y0: None,
            data: None,
            output: default_output(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| HarnessError::Json {
            path: PathBuf::from("<config>"),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        crate::output::read_json(path)
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(out) = &overrides.out {
            self.output = out.clone();
        }
        if let Some(data) = &overrides.data {
            self.data = Some(data.clone());
        }
    }

    /// Validate every field, build the problem and the solver configuration.
    pub fn prepare(&self) -> Result<Prepared> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(HarnessError::config("eps", format!("must be positive, got {}", self.eps)));
        }
        if self.max_iters == 0 {
            return Err(HarnessError::config("max_iters", "must be at least 1"));
        }
        if self.diagnostics_every == 0 {
            return Err(HarnessError::config("diagnostics_every", "must be at least 1"));
        }
        if !(self.inner_tol > 0.0) {
            return Err(HarnessError::config("inner_tol", "must be positive"));
        }
        if let Some(data) = &self.data {
            if !data.is_file() {
                return Err(HarnessError::config("data", format!("no such file: {}", data.display())));
            }
        }
        let spec = self.problem.resolve()?;
        if let ProblemSpec::RobustLogreg {
            data: DataSource::Libsvm { path },
            ..
        } = &spec
        {
            if self.data.is_none() && !Path::new(path).is_file() {
                return Err(HarnessError::config("problem.data.path", format!("no such file: {path}")));
            }
        }
        let problem = spec
            .build(self.data.as_deref())
            .map_err(|e| HarnessError::config("problem", e.to_string()))?;
        let oracle = problem.oracle.as_ref();

        let stochastic = self.algorithm == Algorithm::Ttsgda;
        if stochastic && oracle.sampler().is_none() {
            return Err(HarnessError::config(
                "algorithm",
                format!(
                    "ttsgda requires a stochastic oracle; {} has none (set problem.noise_sigma2)",
                    problem.name
                ),
            ));
        }

        let mut schedule = match (self.regime, self.eta_x, self.eta_y) {
            (None, Some(ex), Some(ey)) => StepsizeSchedule::custom(ex, ey, self.batch_m.unwrap_or(1))
                .map_err(|e| HarnessError::config("eta_x", e.to_string()))?,
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(HarnessError::config(
                    "regime",
                    "give either a regime or explicit eta_x/eta_y, not both",
                ))
            }
            (None, Some(_), None) => return Err(HarnessError::config("eta_y", "required with eta_x")),
            (None, None, Some(_)) => return Err(HarnessError::config("eta_x", "required with eta_y")),
            (None, None, None) => {
                return Err(HarnessError::config(
                    "regime",
                    "required unless eta_x and eta_y are given",
                ))
            }
            (Some(regime), None, None) => {
                StepsizeSchedule::for_regime(regime, oracle.profile(), stochastic, self.eps)
                    .map_err(|e| HarnessError::config("regime", e.to_string()))?
            }
        };
        if let Some(m) = self.batch_m {
            if m == 0 {
                return Err(HarnessError::config("batch_m", "must be at least 1"));
            }
            schedule.batch_m = m;
        }

        let x0 = match &self.x0 {
            Some(x) if x.len() != oracle.dim_x() => {
                return Err(HarnessError::config(
                    "x0",
                    format!("expected {} entries, got {}", oracle.dim_x(), x.len()),
                ))
            }
            Some(x) => x.clone(),
            None => vec![0.0; oracle.dim_x()],
        };
        let y0 = match &self.y0 {
            Some(y) if y.len() != oracle.dim_y() => {
                return Err(HarnessError::config(
                    "y0",
                    format!("expected {} entries, got {}", oracle.dim_y(), y.len()),
                ))
            }
            Some(y) => {
                if !problem.set.contains(y, 1e-9)? {
                    return Err(HarnessError::config("y0", "not in the constraint set"));
                }
                y.clone()
            }
            None => problem.set.center(),
        };

        let mut solver = SolverConfig::new(self.max_iters, schedule, self.seed)
            .with_diagnostics(self.diagnostics_every, self.inner_tol);
        if let Some(rho) = self.moreau_rho {
            if !(rho > 0.0) {
                return Err(HarnessError::config("moreau_rho", "must be positive"));
            }
            solver = solver.with_moreau(rho);
        }
        if let Some(stop) = self.early_stop {
            solver = solver.with_early_stop(stop);
        }
        Ok(Prepared {
            problem,
            solver,
            x0,
            y0,
        })
    }
}

/// Command-line values that replace config fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
}

/// A validated configuration, ready to run.
pub struct Prepared {
    pub problem: Problem,
    pub solver: SolverConfig,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
}
