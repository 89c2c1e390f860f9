use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::model::MinimaxOracle;
use crate::vector;

use super::DIVERGENCE_NORM;

#[derive(Debug, Clone)]
pub struct EgOutcome {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Residual at the returned pair, see [`extragradient_until`].
    pub residual: f64,
    pub steps: usize,
    pub grad_evals: u64,
    pub converged: bool,
}

/// Extragradient on `min_x max_{y in Y} f(x, y) + reg * |x - anchor|^2`,
/// run for exactly `steps` iterations from `(x0, y0)`.
///
/// Each iteration extrapolates with the gradient at `(x, y)` and then
/// updates `(x, y)` with the gradient at the extrapolated point. Both `y`
/// moves are projected onto `Y`.
#[allow(clippy::too_many_arguments)]
pub fn extragradient_saddle(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    anchor: &[f64],
    reg: f64,
    eta: f64,
    steps: usize,
    x0: &[f64],
    y0: &[f64],
) -> Result<EgOutcome> {
    extragradient_until(oracle, set, anchor, reg, eta, x0, y0, f64::NEG_INFINITY, steps)
}

/// As [`extragradient_saddle`], stopping early once the residual
/// `|grad_x F(x, y)| + ell |y+ - y|` drops to `tol`, where `F` is the
/// regularized objective and `y+ = P_Y(y + grad_y f(x, y) / ell)`.
/// When `ell` is unknown the ascent part uses `eta` in place of `1/ell`.
#[allow(clippy::too_many_arguments)]
pub fn extragradient_until(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    anchor: &[f64],
    reg: f64,
    eta: f64,
    x0: &[f64],
    y0: &[f64],
    tol: f64,
    max_steps: usize,
) -> Result<EgOutcome> {
    super::check_start(oracle, set, x0, y0)?;
    if anchor.len() != x0.len() {
        return Err(Error::Dimension {
            expected: x0.len(),
            got: anchor.len(),
        });
    }
    let ell = oracle.profile().smooth_ell;
    let bound = 1.0 / (2.0 * (ell + 2.0 * reg));
    if ell > 0.0 && eta > bound * (1.0 + 1e-12) {
        log::warn!("extragradient step {eta} exceeds the stable bound {bound}");
    }
    let ascent_step = if ell > 0.0 { 1.0 / ell } else { eta };

    let (m, n) = (x0.len(), y0.len());
    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    let (mut gx, mut gy) = (vec![0.0; m], vec![0.0; n]);
    let (mut xt, mut yt) = (vec![0.0; m], vec![0.0; n]);
    let mut yplus = vec![0.0; n];
    let mut evals = 0u64;
    let mut steps = 0;

    loop {
        oracle.subgrad(&x, &y, &mut gx, &mut gy);
        evals += 1;
        for i in 0..m {
            gx[i] += 2.0 * reg * (x[i] - anchor[i]);
        }
        yplus.copy_from_slice(&y);
        vector::axpy(ascent_step, &gy, &mut yplus);
        set.project_in_place(&mut yplus);
        let residual = vector::norm(&gx) + vector::dist(&yplus, &y) / ascent_step;
        if !residual.is_finite() {
            return Err(Error::NonFinite { t: steps });
        }
        if residual <= tol || steps >= max_steps {
            return Ok(EgOutcome {
                x,
                y,
                residual,
                steps,
                grad_evals: evals,
                converged: residual <= tol,
            });
        }

        // Extrapolation.
        xt.copy_from_slice(&x);
        vector::axpy(-eta, &gx, &mut xt);
        yt.copy_from_slice(&y);
        vector::axpy(eta, &gy, &mut yt);
        set.project_in_place(&mut yt);

        // Update from (x, y) with the gradient at the extrapolated point.
        oracle.subgrad(&xt, &yt, &mut gx, &mut gy);
        evals += 1;
        for i in 0..m {
            x[i] -= eta * (gx[i] + 2.0 * reg * (xt[i] - anchor[i]));
        }
        vector::axpy(eta, &gy, &mut y);
        set.project_in_place(&mut y);
        steps += 1;

        let xn = vector::norm(&x);
        if xn > DIVERGENCE_NORM {
            return Err(Error::Diverged { t: steps, norm: xn });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::bilinear::Bilinear;
    use crate::problems::quadratic::QuadraticNcsc;

    #[test]
    fn regularized_bilinear_converges_to_origin() {
        let b = Bilinear::new(1.0, 1.0).unwrap();
        let out =
            extragradient_until(&b, b.set(), &[0.0], 1.0, 1.0 / 6.0, &[1.0], &[0.5], 1e-4, 10_000)
                .unwrap();
        assert!(out.converged, "residual {}", out.residual);
        assert!(out.x[0].abs() < 1e-4 && out.y[0].abs() < 1e-4);
    }

    #[test]
    fn oversized_step_still_runs() {
        let b = Bilinear::new(1.0, 1.0).unwrap();
        let out = extragradient_saddle(&b, b.set(), &[0.0], 1.0, 0.2, 10_000, &[1.0], &[0.5]).unwrap();
        assert!(out.residual <= 1e-4);
        assert_eq!(out.grad_evals, 2 * 10_000 + 1);
    }

    #[test]
    fn unregularized_extragradient_still_contracts_on_bilinear() {
        let b = Bilinear::new(1.0, 10.0).unwrap();
        let out = extragradient_saddle(&b, b.set(), &[0.0], 0.0, 0.5, 200, &[1.0], &[0.5]).unwrap();
        // Per-step modulus squared is 1 - eta^2 + eta^4 < 1.
        let r = (out.x[0].powi(2) + out.y[0].powi(2)).sqrt();
        assert!(r < 1.25f64.sqrt() * (0.8125f64).powf(100.0) * 1.0001, "{r}");
    }

    #[test]
    fn zero_objective_pulls_to_anchor() {
        let zero = QuadraticNcsc::scalar(0.0, 0.0, 1.0, 1.0).unwrap();
        let out = extragradient_saddle(&zero, zero.set(), &[3.0], 1.0, 0.1, 500, &[0.0], &[0.0]).unwrap();
        assert!((out.x[0] - 3.0).abs() < 1e-8);
    }
}
