use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use ttgda::certify::{self, CheckResult};
use ttgda::problems::{random_in_ball, Problem, ProblemSpec};
use ttgda::stationarity::{envelope_rho, eval_phi, grad_phi};
use ttgda::{ttgda_run, MinimaxOracle, Regime, SolverConfig, StepsizeSchedule};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemmas,
    Rates,
    Oracles,
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemmas" => Ok(Suite::Lemmas),
            "rates" => Ok(Suite::Rates),
            "oracles" => Ok(Suite::Oracles),
            other => Err(HarnessError::config(
                "suite",
                format!("unknown suite '{other}' (expected lemmas, rates or oracles)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub problem: String,
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
    /// Parts of the suite that do not apply to this problem.
    pub notes: Vec<String>,
    pub passed: bool,
}

const LEMMA_ITERS: usize = 2000;
const INNER_TOL: f64 = 1e-10;

fn smooth_strongly_concave(o: &dyn MinimaxOracle) -> bool {
    let p = o.profile();
    p.kappa.is_some() && p.smooth_ell > 0.0
}

fn start_point(problem: &Problem, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = problem.oracle.dim_x();
    random_in_ball(&mut rng, dim, problem.x_region)
}

fn lemma_trace(problem: &Problem, seed: u64, eps: f64) -> Result<(ttgda::RunTrace, f64)> {
    let o = problem.oracle.as_ref();
    let schedule = StepsizeSchedule::smooth_ncsc(o.profile(), false, eps)?;
    let eta_x = schedule.eta_x_const();
    let config = SolverConfig::new(LEMMA_ITERS, schedule, seed);
    let x0 = start_point(problem, seed);
    let trace = ttgda_run(o, &problem.set, &config, &x0, &problem.set.center())?;
    Ok((trace, eta_x))
}

/// `Phi(x_0) - min_t Phi(x_t)` along the records; a lower estimate of the
/// true gap, which makes the running-average check stricter.
fn delta_phi(problem: &Problem, trace: &ttgda::RunTrace) -> Result<f64> {
    let o = problem.oracle.as_ref();
    let mut phis = Vec::with_capacity(trace.records.len());
    for r in &trace.records {
        phis.push(eval_phi(o, &problem.set, &r.x, INNER_TOL)?.value);
    }
    let min = phis.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(phis.first().map_or(0.0, |p0| p0 - min))
}

fn lemmas(problem: &Problem, seed: u64, report: &mut CheckReport) -> Result<()> {
    let o = problem.oracle.as_ref();
    if smooth_strongly_concave(o) {
        let (trace, eta_x) = lemma_trace(problem, seed, 0.1)?;
        let dphi = delta_phi(problem, &trace)?;
        let tolerance = 1e-6 + 10.0 * INNER_TOL;
        let checks =
            certify::smooth_ncsc_lemmas(o, &problem.set, &trace.records, eta_x, dphi, INNER_TOL, tolerance)?;
        report.checks.extend(checks);
    } else {
        report
            .notes
            .push("tracking and descent checks need a smooth strongly concave problem".into());
    }

    let regime = if o.profile().smooth_ell > 0.0 {
        Regime::SmoothNcc
    } else {
        Regime::NonsmoothNcc
    };
    let rho_hat = envelope_rho(o.profile(), regime).filter(|r| *r > 0.0);
    match rho_hat {
        Some(rho_hat) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
            let points: Vec<Vec<f64>> = (0..5)
                .map(|_| random_in_ball(&mut rng, o.dim_x(), problem.x_region))
                .collect();
            let tol = 1e-7;
            let phi = |x: &[f64]| eval_phi(o, &problem.set, x, 1e-10).map_or(f64::NAN, |p| p.value);
            let probe = 0.5 * problem.x_region;
            let checks = certify::moreau_suite(o, &problem.set, &phi, &points, rho_hat, tol, probe, seed)?;
            report.checks.extend(checks);
        }
        None => report
            .notes
            .push("envelope checks need a weak-convexity or smoothness constant".into()),
    }
    Ok(())
}

fn rates(problem: &Problem, seed: u64, report: &mut CheckReport) -> Result<()> {
    let o = problem.oracle.as_ref();
    if !smooth_strongly_concave(o) {
        report
            .notes
            .push("rate checks need a smooth strongly concave problem".into());
        return Ok(());
    }
    let (trace, eta_x) = lemma_trace(problem, seed, 0.1)?;
    let dphi = delta_phi(problem, &trace)?;
    let running = certify::smooth_ncsc_lemmas(o, &problem.set, &trace.records, eta_x, dphi, INNER_TOL, 1e-6)?
        .into_iter()
        .filter(|c| c.name == "running-average-bound");
    report.checks.extend(running);

    // Hitting times for eps, eps/2, eps/4 below the starting gradient norm.
    let x0 = start_point(problem, seed);
    let g0 = ttgda::vector::norm(&grad_phi(o, &problem.set, &x0, INNER_TOL)?.grad);
    let eps0 = 0.5 * g0;
    let schedule = StepsizeSchedule::smooth_ncsc(o.profile(), false, eps0)?;
    let config = SolverConfig::new(200_000, schedule, seed)
        .with_diagnostics(1, 1e-9)
        .with_early_stop(eps0 / 4.0);
    let run = ttgda_run(o, &problem.set, &config, &x0, &problem.set.center())?;
    let hits: Vec<Option<usize>> = [eps0, eps0 / 2.0, eps0 / 4.0]
        .iter()
        .map(|e| run.first_hit(*e).map(|d| d.t))
        .collect();
    let margins = hits.windows(2).map(|w| match (w[0], w[1]) {
        (Some(a), Some(b)) => 4.5 - b as f64 / a.max(1) as f64,
        _ => f64::NEG_INFINITY,
    });
    report
        .checks
        .push(CheckResult::from_margins("hitting-time-halving-ratio", 0.0, margins));
    Ok(())
}

fn oracles(problem: &Problem, seed: u64, report: &mut CheckReport) {
    let o = problem.oracle.as_ref();
    let r = problem.x_region;
    let lo = vec![-r; o.dim_x()];
    let hi = vec![r; o.dim_x()];
    report.checks.extend(certify::oracle_suite(o, &problem.set, &lo, &hi, 200, seed));
    report.checks.extend(certify::projection_suite(&problem.set, 500, seed));
}

/// Run `suite` on `spec`. Failing inequalities are report content, not errors.
pub fn check(spec: &ProblemSpec, suite: Suite, seed: u64) -> Result<CheckReport> {
    let problem = spec.build(None)?;
    let mut report = CheckReport {
        problem: problem.name.clone(),
        suite,
        checks: Vec::new(),
        notes: Vec::new(),
        passed: false,
    };
    match suite {
        Suite::Lemmas => lemmas(&problem, seed, &mut report)?,
        Suite::Rates => rates(&problem, seed, &mut report)?,
        Suite::Oracles => oracles(&problem, seed, &mut report),
    }
    report.passed = !report.checks.is_empty() && report.checks.iter().all(|c| c.passed);
    Ok(report)
}
