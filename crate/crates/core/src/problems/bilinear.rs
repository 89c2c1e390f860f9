//! `f(x, y) = c x y` on `Y = [-R, R]`, whose max-function is `|c| R |x|`.

use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::model::{MinimaxOracle, RegularityProfile};

#[derive(Debug, Clone)]
pub struct Bilinear {
    c: f64,
    radius: f64,
    set: ConstraintSet,
    profile: RegularityProfile,
}

impl Bilinear {
    pub fn new(c: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bilinear problem needs finite c and R > 0 (c={c}, R={radius})"
            )));
        }
        let profile = RegularityProfile::new(2.0 * radius)
            .with_lipschitz(c.abs() * radius)
            .with_smoothness(c.abs());
        Ok(Bilinear {
            c,
            radius,
            set: ConstraintSet::interval(-radius, radius),
            profile,
        })
    }

    /// Declare a weak-convexity modulus. `Phi` is convex, so any
    /// `rho >= 0` is valid; nonsmooth stepsize rules need `rho > 0`.
    pub fn with_weak_convexity(mut self, rho: f64) -> Self {
        self.profile.weak_convexity_rho = rho;
        self
    }

    pub fn set(&self) -> &ConstraintSet {
        &self.set
    }

    /// `Phi(x) = |c| R |x|`.
    pub fn phi_exact(&self, x: f64) -> f64 {
        self.c.abs() * self.radius * x.abs()
    }

    /// Proximal point of `Phi / (2 rho_hat)`: soft thresholding at `|c| R / (2 rho_hat)`.
    pub fn prox_exact(&self, x: f64, rho_hat: f64) -> f64 {
        let thr = self.c.abs() * self.radius / (2.0 * rho_hat);
        x.signum() * (x.abs() - thr).max(0.0)
    }
}

impl MinimaxOracle for Bilinear {
    fn dim_x(&self) -> usize {
        1
    }
    fn dim_y(&self) -> usize {
        1
    }
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.c * x[0] * y[0]
    }
    fn subgrad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        gx[0] = self.c * y[0];
        gy[0] = self.c * x[0];
    }
    fn profile(&self) -> &RegularityProfile {
        &self.profile
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_profile, Regime};
    use crate::problems::finite_difference_error;

    #[test]
    fn values_and_gradients() {
        let b = Bilinear::new(1.0, 1.0).unwrap();
        assert_eq!(b.value(&[2.0], &[0.5]), 1.0);
        let (gx, gy) = b.subgrad_vec(&[2.0], &[0.5]);
        assert_eq!((gx[0], gy[0]), (0.5, 2.0));
        assert_eq!(b.phi_exact(3.0), 3.0);
    }

    #[test]
    fn profile_constants() {
        let b = Bilinear::new(-2.0, 1.5).unwrap();
        let p = b.profile();
        assert_eq!((p.lipschitz_l, p.smooth_ell, p.diameter_d), (3.0, 2.0, 3.0));
        assert!(validate_profile(p, Regime::SmoothNcc).is_ok());
        assert!(validate_profile(p, Regime::NonsmoothNcc).is_err());
        let b = b.with_weak_convexity(1.0);
        assert!(validate_profile(b.profile(), Regime::NonsmoothNcc).is_ok());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let b = Bilinear::new(1.7, 2.0).unwrap();
        let err = finite_difference_error(&b, &[-3.0], &[3.0], b.set(), 50, 13);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn rejects_nonpositive_radius() {
        assert!(Bilinear::new(1.0, 0.0).is_err());
    }
}
