//! Nonconvex-strongly-concave quadratic
//! `f(x, y) = 0.5 x'Qx + x'Cy - 0.5 mu |y|^2` on a Euclidean ball of radius `R`,
//! with closed-form `y*(x)`, `Phi` and `grad Phi`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::model::{MinimaxOracle, RegularityProfile};

#[derive(Debug, Clone)]
pub struct QuadraticNcsc {
    q: DMatrix<f64>,
    c: DMatrix<f64>,
    mu: f64,
    radius: f64,
    x_box: f64,
    set: ConstraintSet,
    profile: RegularityProfile,
}

fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0, |a: f64, v| a.max(v.abs()))
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().fold(0.0, |a: f64, v| a.max(*v))
}

impl QuadraticNcsc {
    /// `x_box` is the radius of the Euclidean ball of `x` over which `L` is
    /// reported.
    pub fn new(q: DMatrix<f64>, c: DMatrix<f64>, mu: f64, radius: f64, x_box: f64) -> Result<Self> {
        let m = q.nrows();
        if q.ncols() != m || c.nrows() != m {
            return Err(Error::InvalidParameter("Q must be m×m and C m×n".into()));
        }
        if (&q - q.transpose()).amax() > 1e-12 * (1.0 + q.amax()) {
            return Err(Error::InvalidParameter("Q not symmetric".into()));
        }
        if !(mu > 0.0 && radius > 0.0 && x_box > 0.0) {
            return Err(Error::InvalidParameter(
                "mu, R and the x box radius must be positive".into(),
            ));
        }
        let n = c.ncols();
        let mut h = DMatrix::zeros(m + n, m + n);
        h.view_mut((0, 0), (m, m)).copy_from(&q);
        h.view_mut((0, m), (m, n)).copy_from(&c);
        h.view_mut((m, 0), (n, m)).copy_from(&c.transpose());
        for i in 0..n {
            h[(m + i, m + i)] = -mu;
        }
        let ell = spectral_norm_sym(&h);
        let lambda_min = SymmetricEigen::new(q.clone())
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a: f64, v| a.min(*v));
        let lip = spectral_norm_sym(&q) * x_box + spectral_norm(&c) * radius;
        let profile = RegularityProfile::new(2.0 * radius)
            .with_smoothness(ell)
            .with_strong_concavity(mu)
            .with_weak_convexity((-lambda_min).max(0.0))
            .with_lipschitz(lip)
            .with_derived_kappa();
        Ok(QuadraticNcsc {
            q,
            c,
            mu,
            radius,
            x_box,
            set: ConstraintSet::centered_ball(n, radius),
            profile,
        })
    }

    /// One-dimensional instance `0.5 q x^2 + c x y - 0.5 mu y^2`. The `x`
    /// box keeps `y*(x)` interior.
    pub fn scalar(q: f64, c: f64, mu: f64, radius: f64) -> Result<Self> {
        let x_box = if c != 0.0 { mu * radius / c.abs() } else { radius };
        Self::new(
            DMatrix::from_element(1, 1, q),
            DMatrix::from_element(1, 1, c),
            mu,
            radius,
            x_box,
        )
    }

    /// Fixed `m = 5`, `n = 3` instance with `mu = 1`, `kappa = 4`, `R = 3`
    /// and `Q = 0.5 I - 0.5 C C'`, which is indefinite while
    /// `Q + C C' / mu` stays positive definite.
    pub fn benchmark() -> Self {
        Self::conditioned(5, 3, 4.0, 3.0, 2024)
    }

    /// Random instance with `mu = 1` whose `C` is scaled so that `kappa`
    /// hits `target_kappa`.
    pub fn conditioned(m: usize, n: usize, target_kappa: f64, radius: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c0 = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let build = |scale: f64| {
            let c = &c0 * scale;
            let q = DMatrix::identity(m, m) * 0.5 - (&c * c.transpose()) * 0.5;
            let x_box = radius / spectral_norm(&c).max(1e-12);
            Self::new(q, c, 1.0, radius, x_box).expect("valid construction")
        };
        let (mut lo, mut hi) = (1e-3, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if build(mid).profile.smooth_ell < target_kappa {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        build(0.5 * (lo + hi))
    }

    pub fn set(&self) -> &ConstraintSet {
        &self.set
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn x_box(&self) -> f64 {
        self.x_box
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn y_star(&self, x: &[f64]) -> Vec<f64> {
        let v = self.c.transpose() * DVector::from_column_slice(x) / self.mu;
        let mut y: Vec<f64> = v.iter().copied().collect();
        self.set.project_in_place(&mut y);
        y
    }

    pub fn phi_exact(&self, x: &[f64]) -> f64 {
        self.value(x, &self.y_star(x))
    }

    pub fn grad_phi_exact(&self, x: &[f64]) -> Vec<f64> {
        let y = self.y_star(x);
        let g = &self.q * DVector::from_column_slice(x) + &self.c * DVector::from_vec(y);
        g.iter().copied().collect()
    }

    /// Minimum of `Phi` over the region where `y*(x)` is interior, when
    /// `Q + C C' / mu` is positive semidefinite (then it is 0 at `x = 0`).
    pub fn phi_min(&self) -> Option<f64> {
        let p = &self.q + (&self.c * self.c.transpose()) / self.mu;
        let min_eig = SymmetricEigen::new(p)
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a: f64, v| a.min(*v));
        (min_eig >= -1e-12).then_some(0.0)
    }
}

impl MinimaxOracle for QuadraticNcsc {
    fn dim_x(&self) -> usize {
        self.q.nrows()
    }
    fn dim_y(&self) -> usize {
        self.c.ncols()
    }
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        let yv = DVector::from_column_slice(y);
        0.5 * xv.dot(&(&self.q * &xv)) + xv.dot(&(&self.c * &yv)) - 0.5 * self.mu * yv.norm_squared()
    }
    fn subgrad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        let (m, n) = (x.len(), y.len());
        for i in 0..m {
            let mut s = 0.0;
            for j in 0..m {
                s += self.q[(i, j)] * x[j];
            }
            for k in 0..n {
                s += self.c[(i, k)] * y[k];
            }
            gx[i] = s;
        }
        for k in 0..n {
            let mut s = -self.mu * y[k];
            for i in 0..m {
                s += self.c[(i, k)] * x[i];
            }
            gy[k] = s;
        }
    }
    fn profile(&self) -> &RegularityProfile {
        &self.profile
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_profile, Regime};
    use crate::problems::{finite_difference_error, random_in_ball};
    use crate::vector;

    #[test]
    fn scalar_closed_forms() {
        let q = QuadraticNcsc::scalar(-0.5, 1.0, 1.0, 10.0).unwrap();
        assert_eq!(q.y_star(&[2.0]), vec![2.0]);
        assert!((q.phi_exact(&[2.0]) - 1.0).abs() < 1e-15);
        assert!((q.grad_phi_exact(&[2.0])[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn benchmark_is_conditioned_and_indefinite() {
        let q = QuadraticNcsc::benchmark();
        let p = q.profile();
        assert!((p.kappa.unwrap() - 4.0).abs() < 1e-9);
        assert!(p.weak_convexity_rho > 0.0);
        assert_eq!(q.phi_min(), Some(0.0));
        assert!(validate_profile(p, Regime::SmoothNcsc).is_ok());
    }

    #[test]
    fn rejects_asymmetric_q() {
        let q = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let c = DMatrix::from_element(2, 1, 1.0);
        assert!(QuadraticNcsc::new(q, c, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let q = QuadraticNcsc::benchmark();
        let lo = vec![-q.x_box() / 3.0; 5];
        let hi = vec![q.x_box() / 3.0; 5];
        let err = finite_difference_error(&q, &lo, &hi, q.set(), 50, 3);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn y_star_is_kappa_lipschitz_and_phi_is_smooth() {
        let q = QuadraticNcsc::benchmark();
        let p = q.profile();
        let kappa = p.kappa.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let a = random_in_ball(&mut rng, 5, 2.0 * q.x_box());
            let b = random_in_ball(&mut rng, 5, 2.0 * q.x_box());
            let dx = vector::dist(&a, &b);
            assert!(vector::dist(&q.y_star(&a), &q.y_star(&b)) <= kappa * dx * (1.0 + 1e-12));
            let dg = vector::dist(&q.grad_phi_exact(&a), &q.grad_phi_exact(&b));
            assert!(dg <= 2.0 * kappa * p.smooth_ell * dx * (1.0 + 1e-12));
        }
    }
}
