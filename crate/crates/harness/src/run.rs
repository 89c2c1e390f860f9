use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use ttgda::{gdmax_run, ttgda_run, ttsgda_run, RegularityProfile, RunStatus, RunTrace, StepsizeSchedule};

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::Result;
use crate::output::{write_atomic, write_json_atomic};

/// Version written in the first line of every trace file.
pub const TRACE_FORMAT: &str = "# ttgda-trace v1";
pub const TRACE_COLUMNS: [&str; 5] = ["t", "metric_name", "metric_value", "f_value", "grad_evals"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub problem: String,
    pub algorithm: String,
    pub seed: u64,
    pub stream: u64,
    pub schedule: StepsizeSchedule,
    pub profile: RegularityProfile,
    pub max_iters: usize,
    pub eps: f64,
    /// `grad_phi_norm` or `moreau_grad_norm`.
    pub metric_name: String,
    pub min_metric: Option<f64>,
    pub final_metric: Option<f64>,
    /// First diagnosed `t` with metric at most `eps`.
    pub first_hit: Option<usize>,
    /// Algorithm oracle calls at `first_hit`.
    pub first_hit_grad_evals: Option<u64>,
    pub selected_index: Option<usize>,
    pub selected_x: Option<Vec<f64>>,
    pub iterations: usize,
    pub grad_evals: u64,
    pub diagnostic_evals: u64,
    pub inner_tol: f64,
    /// `completed`, `early-stopped` or `failed`.
    pub status: String,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

pub struct Outcome {
    pub trace: Option<RunTrace>,
    pub summary: Summary,
}

/// Run `config` on RNG stream `stream` of its seed without writing files.
/// Solver failures are recorded in the summary.
pub fn execute(config: &ExperimentConfig, stream: u64) -> Result<Outcome> {
    let prepared = config.prepare()?;
    let solver = prepared.solver.clone().with_stream(stream);
    let oracle = prepared.problem.oracle.as_ref();
    let set = &prepared.problem.set;
    let (x0, y0) = (&prepared.x0, &prepared.y0);

    let start = Instant::now();
    let result = match config.algorithm {
        Algorithm::Ttgda => ttgda_run(oracle, set, &solver, x0, y0),
        Algorithm::Ttsgda => ttsgda_run(oracle, set, &solver, x0, y0),
        Algorithm::Gdmax => gdmax_run(oracle, set, &solver, config.inner_steps, x0, y0),
    };
    let wall_time_s = start.elapsed().as_secs_f64();

    let mut summary = Summary {
        problem: prepared.problem.name.clone(),
        algorithm: config.algorithm.as_str().to_string(),
        seed: config.seed,
        stream,
        schedule: solver.schedule.clone(),
        profile: oracle.profile().clone(),
        max_iters: config.max_iters,
        eps: config.eps,
        metric_name: String::new(),
        min_metric: None,
        final_metric: None,
        first_hit: None,
        first_hit_grad_evals: None,
        selected_index: None,
        selected_x: None,
        iterations: 0,
        grad_evals: 0,
        diagnostic_evals: 0,
        inner_tol: config.inner_tol,
        status: "failed".into(),
        error: None,
        wall_time_s,
    };
    let trace = match result {
        Ok(trace) => trace,
        Err(e) => {
            log::warn!("run failed: {e}");
            summary.error = Some(e.to_string());
            return Ok(Outcome {
                trace: None,
                summary,
            });
        }
    };
    summary.metric_name = metric_name(&trace).to_string();
    summary.min_metric = trace.min_stationarity();
    summary.final_metric = trace.diagnostics.last().and_then(|d| d.stationarity());
    if let Some(hit) = trace.first_hit(config.eps) {
        summary.first_hit = Some(hit.t);
        summary.first_hit_grad_evals = Some(hit.grad_evals);
    }
    summary.selected_index = Some(trace.selected_index);
    summary.selected_x = Some(trace.selected_x.clone());
    summary.iterations = trace.iterations;
    summary.grad_evals = trace.grad_evals;
    summary.diagnostic_evals = trace.diagnostic_evals;
    summary.inner_tol = trace.inner_tol;
    summary.status = match trace.status {
        RunStatus::Completed => "completed",
        RunStatus::EarlyStopped { .. } => "early-stopped",
    }
    .into();
    Ok(Outcome {
        trace: Some(trace),
        summary,
    })
}

fn metric_name(trace: &RunTrace) -> &'static str {
    match trace.diagnostics.first() {
        Some(d) if d.grad_phi_norm.is_some() => "grad_phi_norm",
        Some(d) if d.moreau_grad_norm.is_some() => "moreau_grad_norm",
        _ => "none",
    }
}

/// Long-format CSV: per diagnosed iterate one row for the stationarity
/// metric, one for the primal gap and, when known, one for the tracking error.
pub fn trace_csv(trace: Option<&RunTrace>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    buf.extend_from_slice(TRACE_FORMAT.as_bytes());
    buf.push(b'\n');
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(TRACE_COLUMNS)?;
    if let Some(trace) = trace {
        let name = metric_name(trace);
        for d in &trace.diagnostics {
            let mut row = |metric: &str, value: f64| {
                w.write_record([
                    d.t.to_string(),
                    metric.to_string(),
                    value.to_string(),
                    d.f_value.to_string(),
                    d.grad_evals.to_string(),
                ])
            };
            if let Some(v) = d.stationarity() {
                row(name, v)?;
            }
            row("primal_gap", d.primal_gap)?;
            if let Some(v) = d.tracking_error {
                row("tracking_error", v)?;
            }
        }
    }
    w.into_inner()
        .map_err(|e| crate::error::HarnessError::Csv(e.into_error().into()))
}

pub fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<()> {
    write_atomic(&dir.join("trace.csv"), &trace_csv(outcome.trace.as_ref())?)?;
    write_json_atomic(&dir.join("summary.json"), &outcome.summary)
}

/// Execute `config` and write `trace.csv` and `summary.json` into its output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Summary> {
    let outcome = execute(config, 0)?;
    write_outputs(&config.output, &outcome)?;
    Ok(outcome.summary)
}
