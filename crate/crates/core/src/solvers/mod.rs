//! Iterative algorithms and the shared run loop.
//!
//! [`ttgda_run`], [`ttsgda_run`] and [`gdmax_run`] all go through the same
//! driver, which handles feasibility checks, the divergence guard, iterate
//! retention, lazy diagnostics, early stopping and the uniform draw of the
//! returned iterate.

mod ascent;
mod extragradient;
mod gda;
mod gdmax;
mod minibatch;

pub use ascent::{ascend_until, projected_gradient_ascent, AscentOutcome};
pub use extragradient::{extragradient_saddle, extragradient_until, EgOutcome};
pub use gda::{ttgda_run, ttsgda_run};
pub use gdmax::gdmax_run;
pub use minibatch::{sg_minibatch, sg_minibatch_into};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::model::{rng_for, Diagnostics, IterRecord, MinimaxOracle, RunStatus, RunTrace, SolverRng};
use crate::schedules::StepsizeSchedule;
use crate::stationarity;
use crate::vector;

/// Iterates with a norm above this abort the run.
pub const DIVERGENCE_NORM: f64 = 1e8;

const SELECTION_STREAM_BIT: u64 = 1 << 63;
const RETENTION_STREAM_BIT: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// Diagnose every `every` iterations (plus `t = 0` and the last iterate).
    /// `None` disables diagnostics.
    pub every: Option<usize>,
    /// Tolerance of the inner solves behind every diagnostic.
    pub inner_tol: f64,
    /// Envelope parameter for the Moreau-gradient diagnostic. When absent,
    /// merely concave problems fall back to `rho` or, failing that, `ell`.
    pub moreau_rho: Option<f64>,
    /// Compute `grad Phi` and the tracking error (strongly concave problems).
    pub grad_phi: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            every: None,
            inner_tol: 1e-8,
            moreau_rho: None,
            grad_phi: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Retention {
    Full,
    /// Keep a uniform sample of this many iterates.
    Reservoir(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub schedule: StepsizeSchedule,
    pub seed: u64,
    /// Run index; selects the RNG stream of `seed`.
    pub stream: u64,
    pub diagnostics: DiagnosticsConfig,
    pub retention: Retention,
    /// Stop once the primary stationarity diagnostic is at most this value.
    pub early_stop: Option<f64>,
}

impl SolverConfig {
    pub fn new(max_iters: usize, schedule: StepsizeSchedule, seed: u64) -> Self {
        SolverConfig {
            max_iters,
            schedule,
            seed,
            stream: 0,
            diagnostics: DiagnosticsConfig::default(),
            retention: Retention::Full,
            early_stop: None,
        }
    }

    pub fn with_diagnostics(mut self, every: usize, inner_tol: f64) -> Self {
        self.diagnostics.every = Some(every);
        self.diagnostics.inner_tol = inner_tol;
        self
    }

    pub fn with_moreau(mut self, rho_hat: f64) -> Self {
        self.diagnostics.moreau_rho = Some(rho_hat);
        self
    }

    pub fn with_retention(mut self, retention: Retention) -> Self {
        self.retention = retention;
        self
    }

    pub fn with_early_stop(mut self, threshold: f64) -> Self {
        self.early_stop = Some(threshold);
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if !(self.diagnostics.inner_tol > 0.0) {
            return Err(Error::InvalidParameter("inner_tol must be positive".into()));
        }
        if self.diagnostics.every == Some(0) {
            return Err(Error::InvalidParameter("diagnostics_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Envelope parameter used by the Moreau diagnostic, if any.
pub(crate) fn moreau_rho_for(oracle: &dyn MinimaxOracle, cfg: &DiagnosticsConfig) -> Option<f64> {
    let p = oracle.profile();
    cfg.moreau_rho.or_else(|| {
        if p.strongly_concave() && cfg.grad_phi {
            None
        } else if p.weak_convexity_rho > 0.0 {
            Some(p.weak_convexity_rho)
        } else if p.smooth_ell > 0.0 {
            Some(p.smooth_ell)
        } else {
            None
        }
    })
}

/// Diagnostics at `(x, y)` plus the oracle calls they cost.
pub(crate) fn diagnose(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    cfg: &DiagnosticsConfig,
    t: usize,
    x: &[f64],
    y: &[f64],
    grad_evals: u64,
) -> Result<(Diagnostics, u64)> {
    let tol = cfg.inner_tol;
    let f_value = oracle.value(x, y);
    let mut cost = 0;
    let (phi, tracking_error, grad_phi_norm) =
        if cfg.grad_phi && oracle.profile().strongly_concave() {
            let g = stationarity::grad_phi_from(oracle, set, x, y, tol)?;
            cost += g.evals;
            (g.phi, Some(vector::dist_sq(&g.y, y)), Some(vector::norm(&g.grad)))
        } else {
            let e = stationarity::eval_phi_from(oracle, set, x, y, tol)?;
            cost += e.evals;
            (e.value, None, None)
        };
    let moreau_grad_norm = match moreau_rho_for(oracle, cfg) {
        Some(rho_hat) => {
            let opts = stationarity::ProxOptions {
                warm_y: Some(y.to_vec()),
                ..Default::default()
            };
            let p = stationarity::prox_phi_with(oracle, set, x, rho_hat, tol, &opts)?;
            if !p.converged {
                log::warn!("prox solve at t={t} stopped with gap {:e}", p.certificate_gap);
            }
            cost += p.evals;
            Some(2.0 * rho_hat * vector::dist(x, &p.prox_point))
        }
        None => None,
    };
    Ok((
        Diagnostics {
            t,
            phi,
            f_value,
            primal_gap: phi - f_value,
            tracking_error,
            grad_phi_norm,
            moreau_grad_norm,
            grad_evals,
        },
        cost,
    ))
}

/// One iteration: updates `(x, y)` in place and returns the oracle calls spent.
pub(crate) trait Advance {
    fn advance(
        &mut self,
        t: usize,
        x: &mut Vec<f64>,
        y: &mut Vec<f64>,
        rng: &mut SolverRng,
    ) -> Result<u64>;
}

impl<F> Advance for F
where
    F: FnMut(usize, &mut Vec<f64>, &mut Vec<f64>, &mut SolverRng) -> Result<u64>,
{
    fn advance(
        &mut self,
        t: usize,
        x: &mut Vec<f64>,
        y: &mut Vec<f64>,
        rng: &mut SolverRng,
    ) -> Result<u64> {
        self(t, x, y, rng)
    }
}

pub(crate) fn check_start(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x0: &[f64],
    y0: &[f64],
) -> Result<()> {
    if x0.len() != oracle.dim_x() {
        return Err(Error::Dimension {
            expected: oracle.dim_x(),
            got: x0.len(),
        });
    }
    if y0.len() != oracle.dim_y() || set.dim() != oracle.dim_y() {
        return Err(Error::Dimension {
            expected: oracle.dim_y(),
            got: y0.len(),
        });
    }
    if !set.contains(y0, 1e-9)? {
        return Err(Error::InvalidParameter("y0 lies outside Y".into()));
    }
    Ok(())
}

struct Recorder {
    retention: Retention,
    records: Vec<IterRecord>,
    seen: usize,
    rng: SolverRng,
}

impl Recorder {
    fn push(&mut self, rec: IterRecord) {
        self.seen += 1;
        match self.retention {
            Retention::Full => self.records.push(rec),
            Retention::Reservoir(k) => {
                if self.records.len() < k {
                    self.records.push(rec);
                } else if k > 0 {
                    let j = self.rng.random_range(0..self.seen);
                    if j < k {
                        self.records[j] = rec;
                    }
                }
            }
        }
    }
}

pub(crate) fn run_loop(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    config: &SolverConfig,
    x0: &[f64],
    y0: &[f64],
    mut step: impl Advance,
) -> Result<RunTrace> {
    config.validate()?;
    check_start(oracle, set, x0, y0)?;
    let schedule = &config.schedule;
    let diag_cfg = &config.diagnostics;

    let mut rng = rng_for(config.seed, config.stream);
    let mut select_rng = rng_for(config.seed, config.stream | SELECTION_STREAM_BIT);
    let mut recorder = Recorder {
        retention: config.retention,
        records: Vec::new(),
        seen: 0,
        rng: rng_for(config.seed, config.stream | RETENTION_STREAM_BIT),
    };

    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    let mut grad_evals = 0u64;
    let mut diagnostic_evals = 0u64;
    let mut diagnostics = Vec::new();
    let mut status = RunStatus::Completed;

    recorder.push(IterRecord {
        t: 0,
        x: x.clone(),
        y: y.clone(),
        eta_x: 0.0,
        eta_y: 0.0,
    });
    let mut selected = (0usize, x.clone());

    let diagnose_at = |t: usize,
                           x: &[f64],
                           y: &[f64],
                           grad_evals: u64,
                           diagnostics: &mut Vec<Diagnostics>,
                           diagnostic_evals: &mut u64|
     -> Result<bool> {
        let (d, cost) = diagnose(oracle, set, diag_cfg, t, x, y, grad_evals)?;
        *diagnostic_evals += cost;
        let stop = match (config.early_stop, d.stationarity()) {
            (Some(thr), Some(s)) => s <= thr,
            _ => false,
        };
        diagnostics.push(d);
        Ok(stop)
    };

    let mut executed = 0;
    if diag_cfg.every.is_some()
        && diagnose_at(0, &x, &y, 0, &mut diagnostics, &mut diagnostic_evals)?
    {
        status = RunStatus::EarlyStopped { t: 0 };
    }

    if status == RunStatus::Completed {
        for t in 1..=config.max_iters {
            grad_evals += step.advance(t, &mut x, &mut y, &mut rng)?;
            if !vector::all_finite(&x) || !vector::all_finite(&y) {
                return Err(Error::NonFinite { t });
            }
            let xn = vector::norm(&x);
            if xn > DIVERGENCE_NORM {
                return Err(Error::Diverged { t, norm: xn });
            }
            executed = t;
            recorder.push(IterRecord {
                t,
                x: x.clone(),
                y: y.clone(),
                eta_x: schedule.eta_x(t),
                eta_y: schedule.eta_y(t),
            });
            if select_rng.random_range(0..=t) == 0 {
                selected = (t, x.clone());
            }
            if let Some(every) = diag_cfg.every {
                if (t % every == 0 || t == config.max_iters)
                    && diagnose_at(t, &x, &y, grad_evals, &mut diagnostics, &mut diagnostic_evals)?
                {
                    status = RunStatus::EarlyStopped { t };
                    break;
                }
            }
        }
    }

    let delta_phi_estimate = diagnostics.first().map(|d0| {
        let min_phi = diagnostics.iter().map(|d| d.phi).fold(f64::INFINITY, f64::min);
        d0.phi - min_phi
    });
    let mut records = recorder.records;
    records.sort_by_key(|r| r.t);

    Ok(RunTrace {
        records,
        diagnostics,
        iterations: executed,
        selected_index: selected.0,
        selected_x: selected.1,
        final_x: x,
        final_y: y,
        grad_evals,
        diagnostic_evals,
        inner_tol: diag_cfg.inner_tol,
        status,
        delta_phi_estimate,
    })
}
