//! Stepsize pairs `(eta_x^t, eta_y^t)` for each regime.
//!
//! Indexing: `eta_x(t)` and `eta_y(t)` are the steps that produce iterate
//! `t` from iterate `t - 1`, for `t >= 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_profile, Regime, RegularityProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum StepRule {
    Constant { eta: f64 },
    /// `1 / (mu * k)` where `k` runs `1..=block` and then restarts.
    Epoch { mu: f64, block: usize },
}

impl StepRule {
    pub fn at(&self, t: usize) -> f64 {
        match *self {
            StepRule::Constant { eta } => eta,
            StepRule::Epoch { mu, block } => {
                let k = (t.max(1) - 1) % block + 1;
                1.0 / (mu * k as f64)
            }
        }
    }

    /// Smallest value the rule ever takes.
    pub fn min_value(&self) -> f64 {
        match *self {
            StepRule::Constant { eta } => eta,
            StepRule::Epoch { mu, block } => 1.0 / (mu * block as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepsizeSchedule {
    pub regime: Regime,
    pub x_rule: StepRule,
    pub y_rule: StepRule,
    pub block_b: Option<usize>,
    pub target_eps: Option<f64>,
    pub batch_m: usize,
}

impl StepsizeSchedule {
    pub fn eta_x(&self, t: usize) -> f64 {
        self.x_rule.at(t)
    }

    pub fn eta_y(&self, t: usize) -> f64 {
        self.y_rule.at(t)
    }

    /// Constant `eta_x`, the only form any regime produces for `x`.
    pub fn eta_x_const(&self) -> f64 {
        self.x_rule.min_value()
    }

    /// User-chosen constant steps.
    pub fn custom(eta_x: f64, eta_y: f64, batch_m: usize) -> Result<Self> {
        if !(eta_x >= 0.0 && eta_y >= 0.0 && eta_x.is_finite() && eta_y.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "stepsizes must be finite and nonnegative (eta_x={eta_x}, eta_y={eta_y})"
            )));
        }
        if batch_m == 0 {
            return Err(Error::InvalidParameter("batch size must be >= 1".into()));
        }
        StepsizeSchedule {
            regime: Regime::Custom,
            x_rule: StepRule::Constant { eta: eta_x },
            y_rule: StepRule::Constant { eta: eta_y },
            block_b: None,
            target_eps: None,
            batch_m,
        }
        .checked()
    }

    /// Build the schedule prescribed for `regime` at accuracy `eps`.
    pub fn for_regime(
        regime: Regime,
        profile: &RegularityProfile,
        stochastic: bool,
        eps: f64,
    ) -> Result<Self> {
        match regime {
            Regime::SmoothNcsc => Self::smooth_ncsc(profile, stochastic, eps),
            Regime::SmoothNcc => Self::smooth_ncc(profile, stochastic, eps),
            Regime::NonsmoothNcsc => Self::nonsmooth_ncsc(profile, stochastic, eps),
            Regime::NonsmoothNcc => Self::nonsmooth_ncc(profile, stochastic, eps),
            Regime::Custom => Err(Error::InvalidParameter(
                "custom regime needs explicit stepsizes".into(),
            )),
        }
    }

    /// `eta_x = 1/(16 (kappa+1)^2 ell)`, `eta_y = 1/ell`, batch `max(1, ceil(48 kappa sigma^2 / eps^2))`.
    pub fn smooth_ncsc(profile: &RegularityProfile, stochastic: bool, eps: f64) -> Result<Self> {
        let p = prepare(profile, Regime::SmoothNcsc, eps)?;
        let ell = p.smooth_ell;
        let kappa = p.kappa.ok_or(Error::NotStronglyConcave)?;
        let eta_x = 1.0 / (16.0 * (kappa + 1.0).powi(2) * ell);
        let batch_m = if stochastic {
            ((48.0 * kappa * p.noise_var_sigma2 / (eps * eps)).ceil() as usize).max(1)
        } else {
            1
        };
        constant(Regime::SmoothNcsc, eta_x, 1.0 / ell, eps, batch_m)
    }

    pub fn smooth_ncc(profile: &RegularityProfile, stochastic: bool, eps: f64) -> Result<Self> {
        let p = prepare(profile, Regime::SmoothNcc, eps)?;
        let (ell, l2, d2) = (p.smooth_ell, p.lipschitz_l.powi(2), p.diameter_d.powi(2));
        let e2 = eps * eps;
        let (eta_x, eta_y) = if stochastic {
            let s2 = p.noise_var_sigma2;
            let g2 = l2 + s2;
            let mut eta_x = (e2 / (80.0 * ell * g2)).min(e2 * e2 / (8192.0 * ell.powi(3) * g2 * d2));
            let mut eta_y = 1.0 / (2.0 * ell);
            // Terms with sigma^2 in the denominator are +inf when sigma^2 = 0.
            if s2 > 0.0 {
                eta_x = eta_x.min(e2.powi(3) / (131072.0 * ell.powi(3) * g2 * d2 * s2));
                eta_y = eta_y.min(e2 / (32.0 * ell * s2));
            }
            (eta_x, eta_y)
        } else {
            let eta_x = (e2 / (80.0 * ell * l2)).min(e2 * e2 / (4096.0 * ell.powi(3) * l2 * d2));
            (eta_x, 1.0 / ell)
        };
        constant(Regime::SmoothNcc, eta_x, eta_y, eps, 1)
    }

    /// Constant `eta_x` and the restarting `eta_y^t = 1/(mu (t - jB))` rule.
    pub fn nonsmooth_ncsc(profile: &RegularityProfile, stochastic: bool, eps: f64) -> Result<Self> {
        let p = prepare(profile, Regime::NonsmoothNcsc, eps)?;
        let (rho, mu) = (p.weak_convexity_rho, p.strong_concavity_mu);
        let g2 = p.lipschitz_l.powi(2) + if stochastic { p.noise_var_sigma2 } else { 0.0 };
        let e2 = eps * eps;
        let c = 4096.0 * rho * rho * g2 * g2;
        let log_term = (1.0 + c / (mu * mu * e2 * e2)).ln();
        let eta_x = (e2 / (48.0 * rho * g2))
            .min(mu * e2 * e2 / c)
            .min(mu * e2 * e2 / (c * log_term * log_term));
        let block = epoch_block(mu, eta_x);
        StepsizeSchedule {
            regime: Regime::NonsmoothNcsc,
            x_rule: StepRule::Constant { eta: eta_x },
            y_rule: StepRule::Epoch { mu, block },
            block_b: Some(block),
            target_eps: Some(eps),
            batch_m: 1,
        }
        .checked()
    }

    pub fn nonsmooth_ncc(profile: &RegularityProfile, stochastic: bool, eps: f64) -> Result<Self> {
        let p = prepare(profile, Regime::NonsmoothNcc, eps)?;
        let (rho, d2) = (p.weak_convexity_rho, p.diameter_d.powi(2));
        let l2 = p.lipschitz_l.powi(2);
        let e2 = eps * eps;
        let (eta_x, eta_y) = if stochastic {
            let g2 = l2 + p.noise_var_sigma2;
            (
                (e2 / (48.0 * rho * g2)).min(e2.powi(3) / (131072.0 * rho.powi(3) * g2 * g2 * d2)),
                e2 / (32.0 * rho * g2),
            )
        } else {
            (
                (e2 / (48.0 * rho * l2)).min(e2.powi(3) / (65536.0 * rho.powi(3) * l2 * l2 * d2)),
                e2 / (16.0 * rho * l2),
            )
        };
        constant(Regime::NonsmoothNcc, eta_x, eta_y, eps, 1)
    }

    fn checked(self) -> Result<Self> {
        let eta_x = self.x_rule.min_value();
        let worst_y = self.y_rule.min_value();
        if eta_x > worst_y {
            // For the epoch rule the smallest eta_y occurs at the end of the first block.
            let t = self.block_b.unwrap_or(1);
            return Err(Error::TwoTimescale {
                t,
                eta_x,
                eta_y: worst_y,
            });
        }
        Ok(self)
    }
}

/// `B = floor(sqrt(1 / (mu eta_x))) + 1`.
pub fn epoch_block(mu: f64, eta_x: f64) -> usize {
    (1.0 / (mu * eta_x)).sqrt().floor() as usize + 1
}

fn prepare(profile: &RegularityProfile, regime: Regime, eps: f64) -> Result<RegularityProfile> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    validate_profile(profile, regime).map_err(Error::Profile)
}

fn constant(regime: Regime, eta_x: f64, eta_y: f64, eps: f64, batch_m: usize) -> Result<StepsizeSchedule> {
    StepsizeSchedule {
        regime,
        x_rule: StepRule::Constant { eta: eta_x },
        y_rule: StepRule::Constant { eta: eta_y },
        block_b: None,
        target_eps: Some(eps),
        batch_m,
    }
    .checked()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ncsc(ell: f64, mu: f64) -> RegularityProfile {
        RegularityProfile::new(1.0)
            .with_smoothness(ell)
            .with_strong_concavity(mu)
            .with_derived_kappa()
    }

    #[test]
    fn smooth_ncsc_constants() {
        let s = StepsizeSchedule::smooth_ncsc(&ncsc(1.0, 0.5), false, 0.1).unwrap();
        assert_relative_eq!(s.eta_x(1), 1.0 / 144.0, max_relative = 1e-15);
        assert_eq!(s.eta_y(1), 1.0);
        let s = StepsizeSchedule::smooth_ncsc(&ncsc(1.0, 1.0), false, 0.1).unwrap();
        assert_relative_eq!(s.eta_x(5), 1.0 / 64.0, max_relative = 1e-15);
        assert_eq!(s.batch_m, 1);
    }

    #[test]
    fn smooth_ncsc_batch_size() {
        let p = ncsc(1.0, 0.5).with_noise(1.0);
        let s = StepsizeSchedule::smooth_ncsc(&p, true, 1.0).unwrap();
        assert_eq!(s.batch_m, 96);
    }

    #[test]
    fn smooth_ncsc_rejects_zero_mu() {
        let p = RegularityProfile::new(1.0).with_smoothness(1.0);
        let err = StepsizeSchedule::smooth_ncsc(&p, false, 0.1).unwrap_err();
        assert!(err.to_string().contains("μ>0 required"));
    }

    #[test]
    fn smooth_ncc_examples() {
        let p = RegularityProfile::new(1.0).with_smoothness(1.0).with_lipschitz(1.0);
        let s = StepsizeSchedule::smooth_ncc(&p, false, 0.1).unwrap();
        assert_relative_eq!(s.eta_x(1), 2.44140625e-8, max_relative = 1e-12);
        assert_eq!(s.eta_y(1), 1.0);

        let s = StepsizeSchedule::smooth_ncc(&p.clone().with_noise(1.0), true, 0.1).unwrap();
        assert_relative_eq!(s.eta_y(1), 3.125e-4, max_relative = 1e-12);

        let s = StepsizeSchedule::smooth_ncc(&p, true, 0.1).unwrap();
        assert_relative_eq!(s.eta_x(1), 1.220703125e-8, max_relative = 1e-12);
        assert_eq!(s.eta_y(1), 0.5);
    }

    #[test]
    fn epoch_pattern_for_block_eleven() {
        assert_eq!(epoch_block(1.0, 0.01), 11);
        let rule = StepRule::Epoch { mu: 1.0, block: 11 };
        for t in 1..=11 {
            assert_relative_eq!(rule.at(t), 1.0 / t as f64);
        }
        assert_eq!(rule.at(12), 1.0);
    }

    #[test]
    fn nonsmooth_ncsc_log_term_is_active() {
        let p = RegularityProfile::new(1.0)
            .with_lipschitz(1.0)
            .with_weak_convexity(1.0)
            .with_strong_concavity(1.0);
        let s = StepsizeSchedule::nonsmooth_ncsc(&p, false, 1.0).unwrap();
        let expected = 1.0 / (4096.0 * 4097f64.ln().powi(2));
        assert_relative_eq!(s.eta_x(1), expected, max_relative = 1e-12);
        assert!((s.eta_x(1) - 3.528e-6).abs() < 1e-9);
        assert_eq!(s.block_b, Some(epoch_block(1.0, expected)));
    }

    #[test]
    fn nonsmooth_ncsc_stochastic_substitutes_noise() {
        let det = RegularityProfile::new(1.0)
            .with_lipschitz(2.0)
            .with_weak_convexity(1.0)
            .with_strong_concavity(1.0);
        let sto = RegularityProfile::new(1.0)
            .with_lipschitz(1.0)
            .with_weak_convexity(1.0)
            .with_strong_concavity(1.0)
            .with_noise(3.0);
        let a = StepsizeSchedule::nonsmooth_ncsc(&det, false, 0.5).unwrap();
        let b = StepsizeSchedule::nonsmooth_ncsc(&sto, true, 0.5).unwrap();
        assert_relative_eq!(a.eta_x(1), b.eta_x(1), max_relative = 1e-15);
    }

    #[test]
    fn nonsmooth_ncc_examples() {
        let p = RegularityProfile::new(1.0)
            .with_lipschitz(1.0)
            .with_weak_convexity(1.0);
        let s = StepsizeSchedule::nonsmooth_ncc(&p, false, 0.2).unwrap();
        assert_relative_eq!(s.eta_y(1), 2.5e-3, max_relative = 1e-12);
        assert_relative_eq!(s.eta_x(1), 0.2f64.powi(6) / 65536.0, max_relative = 1e-12);

        let s = StepsizeSchedule::nonsmooth_ncc(&p.with_noise(1.0), true, 0.2).unwrap();
        assert_relative_eq!(s.eta_y(1), 6.25e-4, max_relative = 1e-12);
    }

    #[test]
    fn custom_rejects_violated_two_timescale_condition() {
        assert!(StepsizeSchedule::custom(0.0, 0.0, 1).is_ok());
        assert!(matches!(
            StepsizeSchedule::custom(1.0, 0.1, 1),
            Err(Error::TwoTimescale { .. })
        ));
    }

    fn profile_strategy() -> impl Strategy<Value = RegularityProfile> {
        (0.1..10.0f64, 0.01..1.0f64, 0.1..10.0f64, 0.0..1.0f64, 0.1..5.0f64, 0.0..4.0f64)
            .prop_map(|(ell, mu_frac, l, rho_frac, d, s2)| {
                RegularityProfile::new(d)
                    .with_smoothness(ell)
                    .with_strong_concavity(mu_frac * ell)
                    .with_lipschitz(l)
                    .with_weak_convexity(rho_frac * ell + 1e-3 * ell)
                    .with_noise(s2)
                    .with_derived_kappa()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn two_timescale_condition_and_eps_monotonicity(
            p in profile_strategy(),
            stochastic in any::<bool>(),
            eps in 0.01..1.0f64,
            shrink in 0.1..1.0f64,
        ) {
            for regime in Regime::ANALYZED_REGIMES {
                let mut q = p.clone();
                if regime.smooth() {
                    q.weak_convexity_rho = q.weak_convexity_rho.min(q.smooth_ell);
                }
                let s = StepsizeSchedule::for_regime(regime, &q, stochastic, eps).unwrap();
                let horizon = s.block_b.map_or(3, |b| 2 * b + 1).min(1_000_000);
                for t in 1..=horizon {
                    prop_assert!(s.eta_x(t) <= s.eta_y(t));
                }
                let tighter = StepsizeSchedule::for_regime(regime, &q, stochastic, eps * shrink).unwrap();
                prop_assert!(tighter.eta_x(1) <= s.eta_x(1));
            }
        }

        #[test]
        fn epoch_rule_is_periodic(mu in 0.01..10.0f64, block in 1usize..500, t in 1usize..10_000) {
            let rule = StepRule::Epoch { mu, block };
            prop_assert_eq!(rule.at(t + block), rule.at(t));
        }
    }
}
