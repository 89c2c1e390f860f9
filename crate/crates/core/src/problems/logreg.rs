//! Distributionally robust logistic regression with a nonconvex penalty:
//!
//! ```text
//! f(x, y) = (1/N) sum_i y_i log(1 + exp(-b_i a_i'x)) - (lambda1/2) |N y - 1|^2
//!           + lambda2 sum_j alpha x_j^2 / (1 + alpha x_j^2)
//! ```
//!
//! over `y` in the probability simplex of dimension `N`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::model::{MinimaxOracle, RegularityProfile, SolverRng, StochasticGradient};
use crate::problems::libsvm::DatasetLibsvm;

#[derive(Debug, Clone)]
pub struct RobustLogreg {
    data: DatasetLibsvm,
    lambda1: f64,
    lambda2: f64,
    alpha: f64,
    set: ConstraintSet,
    profile: RegularityProfile,
}

/// `log(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `1 / (1 + exp(-t))` without overflow.
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl RobustLogreg {
    /// `x_box` bounds `|x|` for the reported noise variance, which grows
    /// with the per-sample losses.
    pub fn new(data: DatasetLibsvm, lambda1: f64, lambda2: f64, alpha: f64, x_box: f64) -> Result<Self> {
        let n = data.num_samples();
        if n == 0 || data.num_features == 0 {
            return Err(Error::InvalidParameter(
                "dataset needs at least one sample and one feature".into(),
            ));
        }
        if data.labels.iter().any(|b| b.abs() != 1.0) {
            return Err(Error::InvalidParameter("labels must be +1 or -1".into()));
        }
        if !(lambda1 > 0.0 && lambda2 >= 0.0 && alpha > 0.0 && x_box > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need lambda1 > 0, lambda2 >= 0, alpha > 0, x_box > 0 \
                 (got {lambda1}, {lambda2}, {alpha}, {x_box})"
            )));
        }
        let nf = n as f64;
        let d = data.num_features as f64;
        let norms_sq: Vec<f64> = (0..n).map(|i| data.row_norm_sq(i)).collect();
        let max_sq = norms_sq.iter().cloned().fold(0.0, f64::max);
        let sum_sq: f64 = norms_sq.iter().sum();
        let mu = lambda1 * nf * nf;
        let ell = max_sq / (4.0 * nf) + 2.0 * alpha * lambda2 + sum_sq.sqrt() / nf + mu;
        let lip = max_sq.sqrt() / nf + lambda2 * 9.0 / 8.0 * (alpha / 3.0).sqrt() * d.sqrt();
        let worst_loss = std::f64::consts::LN_2 + max_sq.sqrt() * x_box;
        let sigma2 = max_sq / nf + worst_loss * worst_loss;
        let profile = RegularityProfile::new(std::f64::consts::SQRT_2)
            .with_smoothness(ell)
            .with_strong_concavity(mu)
            .with_weak_convexity(lambda2 * alpha / 2.0)
            .with_lipschitz(lip)
            .with_noise(sigma2)
            .with_derived_kappa();
        Ok(RobustLogreg {
            set: ConstraintSet::Simplex { n },
            data,
            lambda1,
            lambda2,
            alpha,
            profile,
        })
    }

    /// `lambda1 = 1/N^2`, `lambda2 = 1e-2`, `alpha = 10`, `x_box = 10`.
    pub fn with_defaults(data: DatasetLibsvm) -> Result<Self> {
        let n = data.num_samples().max(1) as f64;
        Self::new(data, 1.0 / (n * n), 1e-2, 10.0, 10.0)
    }

    pub fn set(&self) -> &ConstraintSet {
        &self.set
    }

    pub fn data(&self) -> &DatasetLibsvm {
        &self.data
    }

    fn loss(&self, i: usize, x: &[f64]) -> f64 {
        softplus(-self.data.labels[i] * self.data.row_dot(i, x))
    }

    /// Adds `scale * grad loss_i(x)` to `g`.
    fn add_loss_grad(&self, i: usize, x: &[f64], scale: f64, g: &mut [f64]) {
        let b = self.data.labels[i];
        let coef = -b * sigmoid(-b * self.data.row_dot(i, x)) * scale;
        for &(j, v) in &self.data.rows[i] {
            g[j - 1] += coef * v;
        }
    }

    fn penalty(&self, x: &[f64]) -> f64 {
        let a = self.alpha;
        self.lambda2 * x.iter().map(|t| a * t * t / (1.0 + a * t * t)).sum::<f64>()
    }

    fn penalty_grad(&self, x: &[f64], g: &mut [f64]) {
        let a = self.alpha;
        for (gj, t) in g.iter_mut().zip(x) {
            let den = 1.0 + a * t * t;
            *gj = self.lambda2 * 2.0 * a * t / (den * den);
        }
    }

    fn coupling_grad(&self, y: &[f64], gy: &mut [f64]) {
        let nf = y.len() as f64;
        for (g, yi) in gy.iter_mut().zip(y) {
            *g = -self.lambda1 * nf * (nf * yi - 1.0);
        }
    }

    /// `E |G(x, y, i) - grad f(x, y)|^2` for the single-sample sampler,
    /// computed by enumerating every index.
    pub fn gradient_variance(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.data.num_samples();
        let nf = n as f64;
        let d = x.len();
        let mut mean = vec![0.0; d];
        let mut second = 0.0;
        let mut loss_sq = 0.0;
        for i in 0..n {
            let mut u = vec![0.0; d];
            self.add_loss_grad(i, x, y[i], &mut u);
            second += u.iter().map(|v| v * v).sum::<f64>() / nf;
            for (m, v) in mean.iter_mut().zip(&u) {
                *m += v / nf;
            }
            let l = self.loss(i, x);
            loss_sq += l * l;
        }
        let var_x = second - mean.iter().map(|v| v * v).sum::<f64>();
        let var_y = loss_sq / nf - loss_sq / (nf * nf);
        var_x + var_y
    }
}

impl MinimaxOracle for RobustLogreg {
    fn dim_x(&self) -> usize {
        self.data.num_features
    }
    fn dim_y(&self) -> usize {
        self.data.num_samples()
    }
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let nf = y.len() as f64;
        let fit: f64 = (0..y.len()).map(|i| y[i] * self.loss(i, x)).sum::<f64>() / nf;
        let spread: f64 = y.iter().map(|yi| (nf * yi - 1.0).powi(2)).sum();
        fit - 0.5 * self.lambda1 * spread + self.penalty(x)
    }
    fn subgrad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        let nf = y.len() as f64;
        self.penalty_grad(x, gx);
        self.coupling_grad(y, gy);
        for i in 0..y.len() {
            self.add_loss_grad(i, x, y[i] / nf, gx);
            gy[i] += self.loss(i, x) / nf;
        }
    }
    fn profile(&self) -> &RegularityProfile {
        &self.profile
    }
    fn sampler(&self) -> Option<&dyn StochasticGradient> {
        Some(self)
    }
}

impl StochasticGradient for RobustLogreg {
    /// One uniformly drawn sample index; the coupling term in `y` is exact.
    fn sample(&self, x: &[f64], y: &[f64], rng: &mut SolverRng, gx: &mut [f64], gy: &mut [f64]) {
        let i = rng.random_range(0..y.len());
        self.penalty_grad(x, gx);
        self.add_loss_grad(i, x, y[i], gx);
        self.coupling_grad(y, gy);
        gy[i] += self.loss(i, x);
    }
}
