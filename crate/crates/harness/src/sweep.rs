//! Grid sweeps over `eta_y`, the ratio `eta_y / eta_x` and the batch size.
//!
//! Cell `i` runs the base configuration on RNG stream `i` of the base seed
//! and writes into `<output>/cell-<i>`; the aggregated table goes to
//! `<output>/sweep.csv`, sorted by final metric.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::write_atomic;
use crate::run::{execute, write_outputs, Summary};

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    /// Ascent stepsizes. Empty keeps the base stepsizes.
    #[serde(default)]
    pub eta_y: Vec<f64>,
    /// Ratios `eta_y / eta_x`, required whenever `eta_y` is given.
    #[serde(default)]
    pub ratio: Vec<f64>,
    /// Batch sizes. Empty keeps the base batch size.
    #[serde(default)]
    pub batch_m: Vec<usize>,
    #[serde(default = "yes")]
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub eta_x: Option<f64>,
    pub eta_y: Option<f64>,
    pub batch_m: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: Cell,
    pub summary: Option<Summary>,
    pub error: Option<String>,
}

impl CellResult {
    /// Final metric of a completed run; failures sort last.
    pub fn sort_key(&self) -> f64 {
        self.summary
            .as_ref()
            .filter(|s| s.error.is_none())
            .and_then(|s| s.final_metric)
            .unwrap_or(f64::INFINITY)
    }
}

impl SweepConfig {
    pub fn cells(&self) -> Result<Vec<Cell>> {
        if self.eta_y.is_empty() != self.ratio.is_empty() {
            return Err(HarnessError::config("ratio", "eta_y and ratio must be given together"));
        }
        let steps: Vec<(Option<f64>, Option<f64>)> = if self.eta_y.is_empty() {
            vec![(None, None)]
        } else {
            self.eta_y
                .iter()
                .flat_map(|&ey| self.ratio.iter().map(move |&r| (Some(ey / r), Some(ey))))
                .collect()
        };
        let batches: Vec<Option<usize>> = if self.batch_m.is_empty() {
            vec![None]
        } else {
            self.batch_m.iter().map(|&m| Some(m)).collect()
        };
        let cells: Vec<Cell> = steps
            .iter()
            .flat_map(|&(ex, ey)| batches.iter().map(move |&m| (ex, ey, m)))
            .enumerate()
            .map(|(index, (eta_x, eta_y, batch_m))| Cell {
                index,
                eta_x,
                eta_y,
                batch_m,
            })
            .collect();
        Ok(cells)
    }

    pub fn cell_config(&self, cell: &Cell) -> ExperimentConfig {
        let mut c = self.base.clone();
        if cell.eta_y.is_some() {
            c.regime = None;
            c.eta_x = cell.eta_x;
            c.eta_y = cell.eta_y;
        }
        if cell.batch_m.is_some() {
            c.batch_m = cell.batch_m;
        }
        c.output = self.base.output.join(format!("cell-{:03}", cell.index));
        c
    }
}

fn run_cell(sweep: &SweepConfig, cell: &Cell, write: bool) -> CellResult {
    let config = sweep.cell_config(cell);
    let result = execute(&config, cell.index as u64).and_then(|outcome| {
        if write {
            write_outputs(&config.output, &outcome)?;
        }
        Ok(outcome.summary)
    });
    match result {
        Ok(summary) => CellResult {
            cell: cell.clone(),
            error: summary.error.clone(),
            summary: Some(summary),
        },
        Err(e) => CellResult {
            cell: cell.clone(),
            summary: None,
            error: Some(e.to_string()),
        },
    }
}

/// Run every cell, isolating per-cell failures. With `write`, each cell's
/// outputs and the aggregated `sweep.csv` are written under the base output.
pub fn run_sweep(sweep: &SweepConfig, write: bool) -> Result<Vec<CellResult>> {
    let cells = sweep.cells()?;
    let mut results: Vec<CellResult> = if sweep.parallel {
        cells.par_iter().map(|c| run_cell(sweep, c, write)).collect()
    } else {
        cells.iter().map(|c| run_cell(sweep, c, write)).collect()
    };
    results.sort_by(|a, b| {
        a.sort_key()
            .total_cmp(&b.sort_key())
            .then(a.cell.index.cmp(&b.cell.index))
    });
    if write {
        write_atomic(&sweep.base.output.join("sweep.csv"), &sweep_csv(&results)?)?;
    }
    Ok(results)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn sweep_csv(results: &[CellResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "cell",
        "eta_x",
        "eta_y",
        "batch_m",
        "status",
        "final_metric",
        "min_metric",
        "first_hit",
        "grad_evals",
        "error",
    ])?;
    for r in results {
        let s = r.summary.as_ref();
        w.write_record([
            r.cell.index.to_string(),
            opt(s.map(|s| s.schedule.eta_x(1))),
            opt(s.map(|s| s.schedule.eta_y(1))),
            opt(s.map(|s| s.schedule.batch_m)),
            s.map_or("failed".to_string(), |s| s.status.clone()),
            opt(s.and_then(|s| s.final_metric)),
            opt(s.and_then(|s| s.min_metric)),
            opt(s.and_then(|s| s.first_hit)),
            opt(s.map(|s| s.grad_evals)),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::Csv(e.into_error().into()))
}
