//! WGAN with a linear generator `G_x(z) = x1 + x2 z` and quadratic
//! discriminator `D_y(a) = y1 a + y2 a^2`, fitting `N(mu_hat, sigma_hat^2)`:
//!
//! ```text
//! f(x, y) = E[D_y(a) - D_y(G_x(z))] - lambda |y|^2
//!         = y1 (mu_hat - x1) + y2 (mu_hat^2 + sigma_hat^2 - x1^2 - x2^2) - lambda |y|^2
//! ```

use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::model::{MinimaxOracle, RegularityProfile, SolverRng, StochasticGradient};

#[derive(Debug, Clone)]
pub struct WganLinear {
    mu_hat: f64,
    sigma_hat: f64,
    lambda: f64,
    real: Normal<f64>,
    set: ConstraintSet,
    profile: RegularityProfile,
}

impl WganLinear {
    /// `y` lives in the box `[-y_radius, y_radius]^2`; constants are reported
    /// over the `x` box `[-x_box, x_box]^2`.
    pub fn new(mu_hat: f64, sigma_hat: f64, lambda: f64, y_radius: f64, x_box: f64) -> Result<Self> {
        if !(sigma_hat > 0.0 && lambda > 0.0 && y_radius > 0.0 && x_box > 0.0) {
            return Err(Error::InvalidParameter(
                "sigma_hat, lambda, y_radius and x_box must be positive".into(),
            ));
        }
        let (r, b) = (y_radius, x_box);
        let ell = 2.0 * r + (1.0 + 8.0 * b * b).sqrt() + 2.0 * lambda;
        let lip = ((r + 2.0 * r * b).powi(2) + (2.0 * r * b).powi(2)).sqrt();
        let s2 = sigma_hat * sigma_hat;
        let sigma2 = 4.0 * r * r * b * b
            + (r + 2.0 * r * b).powi(2)
            + 8.0 * r * r * b * b
            + s2
            + b * b
            + 4.0 * mu_hat * mu_hat * s2
            + 2.0 * s2 * s2
            + 6.0 * b.powi(4);
        let set = ConstraintSet::cube(2, r);
        let profile = RegularityProfile::new(set.diameter())
            .with_smoothness(ell)
            .with_strong_concavity(2.0 * lambda)
            .with_weak_convexity(2.0 * r)
            .with_lipschitz(lip)
            .with_noise(sigma2)
            .with_derived_kappa();
        Ok(WganLinear {
            mu_hat,
            sigma_hat,
            lambda,
            real: Normal::new(mu_hat, sigma_hat).expect("positive sigma_hat"),
            set,
            profile,
        })
    }

    /// `mu_hat = 0`, `sigma_hat = 0.1`, `lambda = 1e-3`, `y_radius = 1`, `x_box = 2`.
    pub fn standard() -> Self {
        Self::new(0.0, 0.1, 1e-3, 1.0, 2.0).expect("valid defaults")
    }

    pub fn set(&self) -> &ConstraintSet {
        &self.set
    }

    /// Exact `E |G - grad f|^2` of the single-draw sampler.
    pub fn gradient_variance(&self, x: &[f64], y: &[f64]) -> f64 {
        let (x1, x2, y1, y2) = (x[0], x[1], y[0], y[1]);
        let s2 = self.sigma_hat * self.sigma_hat;
        let m = self.mu_hat;
        4.0 * y2 * y2 * x2 * x2
            + (y1 + 2.0 * y2 * x1).powi(2)
            + 8.0 * y2 * y2 * x2 * x2
            + s2
            + x2 * x2
            + 4.0 * m * m * s2
            + 2.0 * s2 * s2
            + 4.0 * x1 * x1 * x2 * x2
            + 2.0 * x2.powi(4)
    }

    /// Per-draw gradient for real sample `a` and latent `z`.
    pub fn draw_gradient(&self, x: &[f64], y: &[f64], a: f64, z: f64, gx: &mut [f64], gy: &mut [f64]) {
        let g = x[0] + x[1] * z;
        let s = y[0] + 2.0 * y[1] * g;
        gx[0] = -s;
        gx[1] = -z * s;
        gy[0] = a - g - 2.0 * self.lambda * y[0];
        gy[1] = a * a - g * g - 2.0 * self.lambda * y[1];
    }
}

impl MinimaxOracle for WganLinear {
    fn dim_x(&self) -> usize {
        2
    }
    fn dim_y(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let m = self.mu_hat;
        let second = m * m + self.sigma_hat * self.sigma_hat;
        y[0] * (m - x[0]) + y[1] * (second - x[0] * x[0] - x[1] * x[1])
            - self.lambda * (y[0] * y[0] + y[1] * y[1])
    }
    fn subgrad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        let m = self.mu_hat;
        gx[0] = -y[0] - 2.0 * y[1] * x[0];
        gx[1] = -2.0 * y[1] * x[1];
        gy[0] = m - x[0] - 2.0 * self.lambda * y[0];
        gy[1] = m * m + self.sigma_hat * self.sigma_hat - x[0] * x[0] - x[1] * x[1]
            - 2.0 * self.lambda * y[1];
    }
    fn profile(&self) -> &RegularityProfile {
        &self.profile
    }
    fn sampler(&self) -> Option<&dyn StochasticGradient> {
        Some(self)
    }
}

impl StochasticGradient for WganLinear {
    fn sample(&self, x: &[f64], y: &[f64], rng: &mut SolverRng, gx: &mut [f64], gy: &mut [f64]) {
        let a = self.real.sample(rng);
        let z: f64 = StandardNormal.sample(rng);
        self.draw_gradient(x, y, a, z, gx, gy);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rng_for;
    use crate::problems::finite_difference_error;

    #[test]
    fn matched_moments_leave_only_the_regularizer() {
        let w = WganLinear::standard();
        let y = [0.3, -0.7];
        let v = w.value(&[0.0, 0.1], &y);
        assert!((v + 1e-3 * (0.09 + 0.49)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_value() {
        let w = WganLinear::standard();
        assert!((w.value(&[0.0, 1.0], &[0.0, 1.0]) + 0.991).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let w = WganLinear::standard();
        let err = finite_difference_error(&w, &[-2.0, -2.0], &[2.0, 2.0], w.set(), 50, 9);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn sampler_mean_matches_expectation() {
        let w = WganLinear::standard();
        let (x, y) = ([0.4, 0.6], [0.5, -0.3]);
        let (gx, gy) = w.subgrad_vec(&x, &y);
        let mut rng = rng_for(3, 0);
        let draws = 100_000;
        let mut sum = [0.0; 4];
        let mut sq = [0.0; 4];
        let (mut sx, mut sy) = ([0.0; 2], [0.0; 2]);
        for _ in 0..draws {
            w.sample(&x, &y, &mut rng, &mut sx, &mut sy);
            for (k, v) in sx.iter().chain(&sy).enumerate() {
                sum[k] += v;
                sq[k] += v * v;
            }
        }
        let n = draws as f64;
        for (k, exact) in gx.iter().chain(&gy).enumerate() {
            let mean = sum[k] / n;
            let sd = (sq[k] / n - mean * mean).sqrt();
            assert!((mean - exact).abs() <= 4.0 * sd / n.sqrt(), "coord {k}");
        }
    }

    #[test]
    fn profile_variance_dominates_pointwise_variance_on_the_box() {
        let w = WganLinear::standard();
        let s2 = w.profile().noise_var_sigma2;
        for x1 in [-2.0, 0.0, 2.0] {
            for x2 in [-2.0, 1.0, 2.0] {
                for y in [[1.0, 1.0], [-1.0, 1.0], [0.0, -1.0]] {
                    assert!(w.gradient_variance(&[x1, x2], &y) <= s2);
                }
            }
        }
    }
}
