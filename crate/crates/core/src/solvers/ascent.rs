use crate::error::Result;
use crate::geometry::ConstraintSet;
use crate::model::MinimaxOracle;
use crate::vector;

/// `steps` iterations of `y <- P_Y(y + eta * grad_y f(x, y))` at fixed `x`.
pub fn projected_gradient_ascent(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x: &[f64],
    y0: &[f64],
    steps: usize,
    eta: f64,
) -> Result<Vec<f64>> {
    super::check_start(oracle, set, x, y0)?;
    let mut y = y0.to_vec();
    let mut gx = vec![0.0; x.len()];
    let mut gy = vec![0.0; y.len()];
    for _ in 0..steps {
        oracle.subgrad(x, &y, &mut gx, &mut gy);
        vector::axpy(eta, &gy, &mut y);
        set.project_in_place(&mut y);
    }
    Ok(y)
}

#[derive(Debug, Clone)]
pub struct AscentOutcome {
    /// Last iterate, i.e. the projected step from `y_prev`.
    pub y: Vec<f64>,
    /// Iterate before the last step.
    pub y_prev: Vec<f64>,
    /// `grad_x f(x, y_prev)` from the last oracle call.
    pub grad_x_prev: Vec<f64>,
    /// Running average of the iterates `y_1..y_k`.
    pub y_avg: Vec<f64>,
    /// `|y - y_prev| / eta`, the gradient-mapping residual at `y_prev`.
    pub residual: f64,
    pub steps: usize,
    pub converged: bool,
}

/// Projected ascent at fixed `x` until `|y_{k+1} - y_k| / eta <= tol`, or
/// `max_steps` oracle calls. Always takes at least one step.
pub fn ascend_until(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x: &[f64],
    y0: &[f64],
    eta: f64,
    tol: f64,
    max_steps: usize,
) -> AscentOutcome {
    let mut y = y0.to_vec();
    let mut next = y.clone();
    let mut avg = vec![0.0; y.len()];
    let mut gx = vec![0.0; x.len()];
    let mut gy = vec![0.0; y.len()];
    let mut steps = 0;
    let mut residual = f64::INFINITY;
    while steps < max_steps.max(1) {
        oracle.subgrad(x, &y, &mut gx, &mut gy);
        next.copy_from_slice(&y);
        vector::axpy(eta, &gy, &mut next);
        set.project_in_place(&mut next);
        steps += 1;
        let w = 1.0 / steps as f64;
        for (a, v) in avg.iter_mut().zip(&next) {
            *a += w * (v - *a);
        }
        residual = vector::dist(&next, &y) / eta;
        if residual <= tol {
            return AscentOutcome {
                y: next,
                y_prev: y,
                grad_x_prev: gx,
                y_avg: avg,
                residual,
                steps,
                converged: true,
            };
        }
        std::mem::swap(&mut y, &mut next);
    }
    // `y` now holds the last iterate and `next` the one before it.
    AscentOutcome {
        y,
        y_prev: next,
        grad_x_prev: gx,
        y_avg: avg,
        residual,
        steps,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::quadratic::QuadraticNcsc;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};

    #[test]
    fn stationary_start_is_a_fixed_point() {
        // f = x y - 0.5 y^2 with x = 0.3: argmax y = 0.3 inside the ball.
        let q = QuadraticNcsc::scalar(0.0, 1.0, 1.0, 5.0).unwrap();
        let y = projected_gradient_ascent(&q, q.set(), &[0.3], &[0.3], 10, 0.7).unwrap();
        assert!((y[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn one_unit_step_reaches_argmax() {
        let q = QuadraticNcsc::scalar(0.0, 0.0, 1.0, 1.0).unwrap();
        let y = projected_gradient_ascent(&q, q.set(), &[0.0], &[1.0], 1, 1.0).unwrap();
        assert_eq!(y, vec![0.0]);
    }

    #[test]
    fn contraction_rate_on_random_strongly_concave_quadratic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (m, n) = (3, 4);
        let c = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let q = DMatrix::from_fn(m, m, |i, j| if i == j { -0.2 } else { 0.0 });
        let prob = QuadraticNcsc::new(q, c.clone(), 0.5, 100.0, 1.0).unwrap();
        let x = vec![0.4, -0.3, 0.8];
        let ystar: Vec<f64> = (c.transpose() * DVector::from_vec(x.clone()) / 0.5)
            .iter()
            .copied()
            .collect();
        let kappa = prob.profile().kappa.unwrap();
        let eta = 1.0 / prob.profile().smooth_ell;
        let y0 = vec![0.0; n];
        let d0 = vector::dist_sq(&y0, &ystar);
        for k in 1..40 {
            let yk = projected_gradient_ascent(&prob, prob.set(), &x, &y0, k, eta).unwrap();
            let bound = (1.0 - 1.0 / kappa).powi(k as i32) * d0;
            assert!(vector::dist_sq(&yk, &ystar) <= bound * (1.0 + 1e-9) + 1e-15);
        }
    }

    #[test]
    fn ascend_until_stops_on_residual() {
        let q = QuadraticNcsc::scalar(-0.5, 1.0, 1.0, 10.0).unwrap();
        let out = ascend_until(&q, q.set(), &[2.0], &[0.0], 1.0 / q.profile().smooth_ell, 1e-10, 10_000);
        assert!(out.converged);
        assert!((out.y[0] - 2.0).abs() < 1e-9);
    }
}
