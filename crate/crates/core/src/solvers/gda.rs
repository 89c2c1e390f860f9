use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::model::{MinimaxOracle, RunTrace, SolverRng};
use crate::vector;

use super::{run_loop, sg_minibatch_into, SolverConfig};

/// Two-timescale GDA with simultaneous updates:
/// `x_t = x_{t-1} - eta_x g_x`, `y_t = P_Y(y_{t-1} + eta_y g_y)`, both
/// gradients taken at `(x_{t-1}, y_{t-1})`. One oracle call per iteration.
pub fn ttgda_run(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    config: &SolverConfig,
    x0: &[f64],
    y0: &[f64],
) -> Result<RunTrace> {
    let schedule = &config.schedule;
    if schedule.batch_m > 1 {
        log::warn!(
            "deterministic run ignores batch size {}; use ttsgda_run for minibatches",
            schedule.batch_m
        );
    }
    let mut gx = vec![0.0; oracle.dim_x()];
    let mut gy = vec![0.0; oracle.dim_y()];
    let step = |t: usize, x: &mut Vec<f64>, y: &mut Vec<f64>, _rng: &mut SolverRng| {
        oracle.subgrad(x, y, &mut gx, &mut gy);
        apply(set, schedule.eta_x(t), schedule.eta_y(t), &gx, &gy, x, y);
        Ok(1)
    };
    run_loop(oracle, set, config, x0, y0, step)
}

/// Stochastic two-timescale GDA: the same loop driven by minibatch averages
/// of `schedule.batch_m` sampler draws. Counts `M` oracle calls per iteration.
pub fn ttsgda_run(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    config: &SolverConfig,
    x0: &[f64],
    y0: &[f64],
) -> Result<RunTrace> {
    let sampler = oracle.sampler().ok_or(Error::MissingSampler)?;
    let schedule = &config.schedule;
    let m = schedule.batch_m.max(1);
    let mut gx = vec![0.0; oracle.dim_x()];
    let mut gy = vec![0.0; oracle.dim_y()];
    let mut scratch = (vec![0.0; oracle.dim_x()], vec![0.0; oracle.dim_y()]);
    let step = |t: usize, x: &mut Vec<f64>, y: &mut Vec<f64>, rng: &mut SolverRng| {
        sg_minibatch_into(sampler, m, x, y, rng, &mut gx, &mut gy, &mut scratch);
        apply(set, schedule.eta_x(t), schedule.eta_y(t), &gx, &gy, x, y);
        Ok(m as u64)
    };
    run_loop(oracle, set, config, x0, y0, step)
}

fn apply(
    set: &ConstraintSet,
    eta_x: f64,
    eta_y: f64,
    gx: &[f64],
    gy: &[f64],
    x: &mut [f64],
    y: &mut [f64],
) {
    vector::axpy(-eta_x, gx, x);
    vector::axpy(eta_y, gy, y);
    set.project_in_place(y);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RegularityProfile;
    use crate::noise::Noiseless;
    use crate::problems::bilinear::Bilinear;
    use crate::problems::quadratic::QuadraticNcsc;
    use crate::schedules::StepsizeSchedule;
    use crate::solvers::Retention;

    #[test]
    fn one_step_on_bilinear() {
        let oracle = Bilinear::new(1.0, 1.0).unwrap();
        let set = oracle.set().clone();
        let cfg = SolverConfig::new(1, StepsizeSchedule::custom(0.1, 0.5, 1).unwrap(), 0);
        let trace = ttgda_run(&oracle, &set, &cfg, &[1.0], &[0.5]).unwrap();
        assert!((trace.final_x[0] - 0.95).abs() < 1e-15);
        assert_eq!(trace.final_y, vec![1.0]);
        assert_eq!(trace.grad_evals, 1);
        assert_eq!(trace.records.len(), 2);
    }

    #[test]
    fn equal_stepsizes_do_not_converge_on_bilinear() {
        // Simultaneous GDA with eta_x = eta_y spirals outward on f = xy.
        let oracle = Bilinear::new(1.0, 100.0).unwrap();
        let set = oracle.set().clone();
        let cfg = SolverConfig::new(2000, StepsizeSchedule::custom(0.1, 0.1, 1).unwrap(), 0);
        let trace = ttgda_run(&oracle, &set, &cfg, &[1.0], &[0.0]).unwrap();
        let radius = |r: &crate::model::IterRecord| (r.x[0].powi(2) + r.y[0].powi(2)).sqrt();
        let tail = &trace.records[1000..];
        assert!(tail.iter().all(|r| radius(r) > 1.0));
        assert!(radius(trace.records.last().unwrap()) > 10.0);
    }

    #[test]
    fn zero_steps_freeze_iterates() {
        let oracle = Bilinear::new(1.0, 1.0).unwrap();
        let set = oracle.set().clone();
        let cfg = SolverConfig::new(50, StepsizeSchedule::custom(0.0, 0.0, 1).unwrap(), 3);
        let trace = ttgda_run(&oracle, &set, &cfg, &[0.7], &[-0.2]).unwrap();
        assert!(trace
            .records
            .iter()
            .all(|r| r.x == vec![0.7] && r.y == vec![-0.2]));
    }

    #[test]
    fn scalar_quadratic_reaches_small_gradient() {
        let q = QuadraticNcsc::scalar(-0.5, 1.0, 1.0, 10.0).unwrap();
        let schedule = StepsizeSchedule::smooth_ncsc(q.profile(), false, 1e-2).unwrap();
        let cfg = SolverConfig::new(3000, schedule, 1).with_diagnostics(100, 1e-10);
        let trace = ttgda_run(&q, q.set(), &cfg, &[2.0], &[0.0]).unwrap();
        let norms: Vec<f64> = trace
            .diagnostics
            .iter()
            .map(|d| d.grad_phi_norm.unwrap())
            .collect();
        assert!(norms.last().unwrap() < &1e-2, "{norms:?}");
        assert!((norms[0] - 1.0).abs() < 1e-8);
        for d in &trace.diagnostics {
            let exact = 0.5 * trace.records[d.t].x[0].abs();
            assert!((d.grad_phi_norm.unwrap() - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn noiseless_sampler_reproduces_deterministic_trace() {
        let q = QuadraticNcsc::scalar(-0.5, 1.0, 1.0, 10.0).unwrap();
        let schedule = StepsizeSchedule::custom(0.01, 0.5, 1).unwrap();
        let cfg = SolverConfig::new(200, schedule, 9);
        let det = ttgda_run(&q, q.set(), &cfg, &[2.0], &[0.0]).unwrap();
        let noiseless = Noiseless::new(q.clone());
        let sto = ttsgda_run(&noiseless, q.set(), &cfg, &[2.0], &[0.0]).unwrap();
        assert_eq!(det.records, sto.records);
        assert_eq!(det.selected_index, sto.selected_index);
    }

    #[test]
    fn missing_sampler_is_an_error() {
        let oracle = Bilinear::new(1.0, 1.0).unwrap();
        let set = oracle.set().clone();
        let cfg = SolverConfig::new(1, StepsizeSchedule::custom(0.1, 0.5, 1).unwrap(), 0);
        assert!(matches!(
            ttsgda_run(&oracle, &set, &cfg, &[1.0], &[0.0]),
            Err(Error::MissingSampler)
        ));
    }

    #[test]
    fn divergence_is_reported_with_iteration() {
        // Ascent-only problem: f = -x^2 pushes x outward under descent.
        let q = QuadraticNcsc::scalar(-2.0, 0.0, 1.0, 1.0).unwrap();
        let cfg = SolverConfig::new(1000, StepsizeSchedule::custom(1.0, 1.0, 1).unwrap(), 0);
        let err = ttgda_run(&q, q.set(), &cfg, &[1.0], &[0.0]).unwrap_err();
        assert!(matches!(err, Error::Diverged { t, .. } if t > 1 && t < 100));
    }

    #[test]
    fn reservoir_keeps_requested_count_and_same_selection() {
        let oracle = Bilinear::new(1.0, 1.0).unwrap();
        let set = oracle.set().clone();
        let schedule = StepsizeSchedule::custom(0.01, 0.1, 1).unwrap();
        let full = SolverConfig::new(500, schedule.clone(), 4);
        let res = full.clone().with_retention(Retention::Reservoir(20));
        let a = ttgda_run(&oracle, &set, &full, &[1.0], &[0.0]).unwrap();
        let b = ttgda_run(&oracle, &set, &res, &[1.0], &[0.0]).unwrap();
        assert_eq!(a.records.len(), 501);
        assert_eq!(b.records.len(), 20);
        assert_eq!(a.selected_index, b.selected_index);
        assert_eq!(a.selected_x, a.records[a.selected_index].x);
    }

    #[test]
    fn profile_is_reachable_from_oracle() {
        let oracle = Bilinear::new(2.0, 1.5).unwrap();
        let p: &RegularityProfile = oracle.profile();
        assert_eq!(p.diameter_d, 3.0);
    }
}
