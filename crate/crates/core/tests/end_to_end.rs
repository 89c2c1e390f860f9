use ttgda::problems::quadratic::QuadraticNcsc;
use ttgda::problems::ProblemSpec;
use ttgda::stationarity::{f_stationarity, grad_phi};
use ttgda::{
    gdmax_run, ttgda_run, ttsgda_run, MinimaxOracle, Regime, Retention, RunStatus, SolverConfig,
    StepsizeSchedule,
};

#[test]
fn regime_schedule_reaches_target_on_quadratic() {
    let q = QuadraticNcsc::benchmark();
    let eps = 0.05;
    let s = StepsizeSchedule::for_regime(Regime::SmoothNcsc, q.profile(), false, eps).unwrap();
    let cfg = SolverConfig::new(20_000, s, 1)
        .with_diagnostics(10, 1e-9)
        .with_early_stop(eps);
    let x0 = vec![0.3, -0.3, 0.3, -0.3, 0.3];
    let trace = ttgda_run(&q, q.set(), &cfg, &x0, &[0.0; 3]).unwrap();
    assert!(trace.min_stationarity().unwrap() <= eps);
    assert!(matches!(trace.status, RunStatus::EarlyStopped { .. }));
    let hit = trace.first_hit(eps).unwrap();
    let exact = q.grad_phi_exact(&trace.records[hit.t].x);
    let n = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((n - hit.grad_phi_norm.unwrap()).abs() < 1e-6);
}

#[test]
fn stochastic_run_on_wgan_counts_minibatch_evaluations() {
    let p = ProblemSpec::named("wgan-linear").unwrap().build(None).unwrap();
    let s = StepsizeSchedule::custom(1e-3, 1e-2, 8).unwrap();
    let cfg = SolverConfig::new(500, s, 3).with_diagnostics(100, 1e-6);
    let trace = ttsgda_run(p.oracle.as_ref(), &p.set, &cfg, &[0.5, 0.5], &[0.0, 0.0]).unwrap();
    assert_eq!(trace.grad_evals, 500 * 8);
    assert_eq!(trace.component_evals(), 2 * 500 * 8);
    assert!(trace.diagnostics.iter().all(|d| d.phi.is_finite()));
    assert_eq!(trace.diagnostics.len(), 6);
}

#[test]
fn gdmax_on_logreg_decreases_phi() {
    let p = ProblemSpec::named("robust-logreg").unwrap().build(None).unwrap();
    let o = p.oracle.as_ref();
    let s = StepsizeSchedule::custom(0.05, 0.5, 1).unwrap();
    let cfg = SolverConfig::new(30, s, 0).with_diagnostics(10, 1e-7);
    let trace = gdmax_run(o, &p.set, &cfg, 10, &vec![0.0; o.dim_x()], &p.set.center()).unwrap();
    assert_eq!(trace.grad_evals, 30 * 11);
    let first = trace.diagnostics.first().unwrap().phi;
    let last = trace.diagnostics.last().unwrap().phi;
    assert!(last < first, "{first} -> {last}");
}

#[test]
fn reservoir_keeps_bounded_history_with_same_selection() {
    let q = QuadraticNcsc::benchmark();
    let s = StepsizeSchedule::smooth_ncsc(q.profile(), false, 0.1).unwrap();
    let x0 = vec![0.1; 5];
    let full = ttgda_run(&q, q.set(), &SolverConfig::new(5000, s.clone(), 4), &x0, &[0.0; 3]).unwrap();
    let cfg = SolverConfig::new(5000, s, 4).with_retention(Retention::Reservoir(50));
    let small = ttgda_run(&q, q.set(), &cfg, &x0, &[0.0; 3]).unwrap();
    assert_eq!(small.records.len(), 50);
    assert_eq!(full.selected_index, small.selected_index);
    assert_eq!(full.selected_x, small.selected_x);
    assert_eq!(full.final_x, small.final_x);
}

#[test]
fn stationary_point_of_phi_is_nearly_stationary_for_f() {
    let q = QuadraticNcsc::benchmark();
    let x = vec![1e-3; 5];
    let g = grad_phi(&q, q.set(), &x, 1e-10).unwrap();
    let r = f_stationarity(&q, q.set(), &x, &g.y).unwrap();
    assert!(r.max_residual() < 1e-2, "{r:?}");
}
