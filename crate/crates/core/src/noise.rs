//! Stochastic wrappers that turn a deterministic oracle into one with a sampler.

use rand_distr::{Distribution, Normal};

use crate::model::{MinimaxOracle, RegularityProfile, SolverRng, StochasticGradient};

/// Sampler that returns the exact gradient; `sigma^2 = 0`.
#[derive(Debug, Clone)]
pub struct Noiseless<O> {
    inner: O,
    profile: RegularityProfile,
}

impl<O: MinimaxOracle> Noiseless<O> {
    pub fn new(inner: O) -> Self {
        let profile = inner.profile().clone().with_noise(0.0);
        Noiseless { inner, profile }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: MinimaxOracle> MinimaxOracle for Noiseless<O> {
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.inner.value(x, y)
    }
    fn subgrad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        self.inner.subgrad(x, y, gx, gy)
    }
    fn profile(&self) -> &RegularityProfile {
        &self.profile
    }
    fn sampler(&self) -> Option<&dyn StochasticGradient> {
        Some(self)
    }
}

impl<O: MinimaxOracle> StochasticGradient for Noiseless<O> {
    fn sample(&self, x: &[f64], y: &[f64], _rng: &mut SolverRng, gx: &mut [f64], gy: &mut [f64]) {
        self.inner.subgrad(x, y, gx, gy)
    }
}

/// Exact gradient plus isotropic Gaussian noise with total variance `sigma2`
/// spread evenly over the `m + n` coordinates.
#[derive(Debug, Clone)]
pub struct GaussianNoise<O> {
    inner: O,
    profile: RegularityProfile,
    normal: Normal<f64>,
}

impl<O: MinimaxOracle> GaussianNoise<O> {
    pub fn new(inner: O, sigma2: f64) -> Self {
        let coords = (inner.dim_x() + inner.dim_y()) as f64;
        let sd = (sigma2.max(0.0) / coords).sqrt();
        let profile = inner.profile().clone().with_noise(sigma2);
        GaussianNoise {
            inner,
            profile,
            normal: Normal::new(0.0, sd).expect("finite standard deviation"),
        }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: MinimaxOracle> MinimaxOracle for GaussianNoise<O> {
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.inner.value(x, y)
    }
    fn subgrad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        self.inner.subgrad(x, y, gx, gy)
    }
    fn profile(&self) -> &RegularityProfile {
        &self.profile
    }
    fn sampler(&self) -> Option<&dyn StochasticGradient> {
        Some(self)
    }
}

impl<O: MinimaxOracle> StochasticGradient for GaussianNoise<O> {
    fn sample(&self, x: &[f64], y: &[f64], rng: &mut SolverRng, gx: &mut [f64], gy: &mut [f64]) {
        self.inner.subgrad(x, y, gx, gy);
        for g in gx.iter_mut().chain(gy.iter_mut()) {
            *g += self.normal.sample(rng);
        }
    }
}
