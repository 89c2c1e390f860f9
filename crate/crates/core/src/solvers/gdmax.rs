use crate::error::Result;
use crate::geometry::ConstraintSet;
use crate::model::{MinimaxOracle, RunTrace, SolverRng};
use crate::vector;

use super::{run_loop, SolverConfig};

/// Nested baseline: each outer iteration first runs `inner_steps` projected
/// ascent steps on `y` with `eta_y`, then one descent step on `x` with
/// `eta_x` at the updated `y`. Costs `inner_steps + 1` oracle calls.
pub fn gdmax_run(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    config: &SolverConfig,
    inner_steps: usize,
    x0: &[f64],
    y0: &[f64],
) -> Result<RunTrace> {
    let schedule = &config.schedule;
    let mut gx = vec![0.0; oracle.dim_x()];
    let mut gy = vec![0.0; oracle.dim_y()];
    let step = |t: usize, x: &mut Vec<f64>, y: &mut Vec<f64>, _rng: &mut SolverRng| {
        let eta_y = schedule.eta_y(t);
        for _ in 0..inner_steps {
            oracle.subgrad(x, y, &mut gx, &mut gy);
            vector::axpy(eta_y, &gy, y);
            set.project_in_place(y);
        }
        oracle.subgrad(x, y, &mut gx, &mut gy);
        vector::axpy(-schedule.eta_x(t), &gx, x);
        Ok(inner_steps as u64 + 1)
    };
    run_loop(oracle, set, config, x0, y0, step)
}
