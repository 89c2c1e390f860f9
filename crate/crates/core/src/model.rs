//! Shared domain types: regularity constants, the oracle interface, iterate
//! state and run traces.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Counter-based generator used for every random draw in the crate.
pub type SolverRng = ChaCha8Rng;

/// RNG stream for run `stream` of experiment `seed`.
///
/// Distinct streams of the same seed never overlap, so concurrent runs and
/// sweep cells can derive independent generators from one base seed.
pub fn rng_for(seed: u64, stream: u64) -> SolverRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Problem regime; selects which constants are required and which stepsize
/// rule applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `l`-smooth, `mu`-strongly concave in `y`.
    SmoothNcsc,
    /// `l`-smooth, `L`-Lipschitz in `x`, concave in `y`.
    SmoothNcc,
    /// `L`-Lipschitz and `rho`-weakly convex in `x`, `mu`-strongly concave in `y`.
    NonsmoothNcsc,
    /// `L`-Lipschitz and `rho`-weakly convex in `x`, concave in `y`.
    NonsmoothNcc,
    /// User-supplied constant stepsizes.
    Custom,
}

impl Regime {
    pub const ANALYZED_REGIMES: [Regime; 4] = [
        Regime::SmoothNcsc,
        Regime::SmoothNcc,
        Regime::NonsmoothNcsc,
        Regime::NonsmoothNcc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::SmoothNcsc => "smooth-ncsc",
            Regime::SmoothNcc => "smooth-ncc",
            Regime::NonsmoothNcsc => "nonsmooth-ncsc",
            Regime::NonsmoothNcc => "nonsmooth-ncc",
            Regime::Custom => "custom",
        }
    }

    pub fn strongly_concave(&self) -> bool {
        matches!(self, Regime::SmoothNcsc | Regime::NonsmoothNcsc)
    }

    pub fn smooth(&self) -> bool {
        matches!(self, Regime::SmoothNcsc | Regime::SmoothNcc)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "smooth-ncsc" => Ok(Regime::SmoothNcsc),
            "smooth-ncc" => Ok(Regime::SmoothNcc),
            "nonsmooth-ncsc" => Ok(Regime::NonsmoothNcsc),
            "nonsmooth-ncc" => Ok(Regime::NonsmoothNcc),
            "custom" => Ok(Regime::Custom),
            other => Err(format!("unknown regime '{other}'")),
        }
    }
}

/// Problem constants that parameterize stepsize rules and certificates.
///
/// A zero in `smooth_ell`, `lipschitz_l` or `weak_convexity_rho` means the
/// constant is unknown or not applicable; `strong_concavity_mu == 0` encodes
/// a merely concave problem. `kappa` is stored rather than recomputed and is
/// checked against `ell / mu` by [`validate_profile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityProfile {
    pub lipschitz_l: f64,
    pub smooth_ell: f64,
    pub strong_concavity_mu: f64,
    pub weak_convexity_rho: f64,
    pub noise_var_sigma2: f64,
    pub diameter_d: f64,
    pub kappa: Option<f64>,
}

impl RegularityProfile {
    pub fn new(diameter_d: f64) -> Self {
        RegularityProfile {
            lipschitz_l: 0.0,
            smooth_ell: 0.0,
            strong_concavity_mu: 0.0,
            weak_convexity_rho: 0.0,
            noise_var_sigma2: 0.0,
            diameter_d,
            kappa: None,
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz_l = l;
        self
    }

    pub fn with_smoothness(mut self, ell: f64) -> Self {
        self.smooth_ell = ell;
        self
    }

    pub fn with_strong_concavity(mut self, mu: f64) -> Self {
        self.strong_concavity_mu = mu;
        self
    }

    pub fn with_weak_convexity(mut self, rho: f64) -> Self {
        self.weak_convexity_rho = rho;
        self
    }

    pub fn with_noise(mut self, sigma2: f64) -> Self {
        self.noise_var_sigma2 = sigma2;
        self
    }

    /// Store `kappa = ell / mu` (or clear it when undefined).
    pub fn with_derived_kappa(mut self) -> Self {
        self.kappa = if self.strong_concavity_mu > 0.0 && self.smooth_ell > 0.0 {
            Some(self.smooth_ell / self.strong_concavity_mu)
        } else {
            None
        };
        self
    }

    pub fn strongly_concave(&self) -> bool {
        self.strong_concavity_mu > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileViolation {
    MuRequired,
    MuExceedsEll { mu: f64, ell: f64 },
    NonPositiveDiameter(f64),
    Negative(&'static str),
    NonFinite(&'static str),
    Required(&'static str),
    KappaMismatch { stored: Option<f64>, expected: f64 },
    RhoExceedsEll { rho: f64, ell: f64 },
}

impl fmt::Display for ProfileViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileViolation::MuRequired => write!(f, "μ>0 required"),
            ProfileViolation::MuExceedsEll { mu, ell } => write!(f, "μ={mu} exceeds ℓ={ell}"),
            ProfileViolation::NonPositiveDiameter(d) => write!(f, "D>0 required (got {d})"),
            ProfileViolation::Negative(name) => write!(f, "{name} must be nonnegative"),
            ProfileViolation::NonFinite(name) => write!(f, "{name} must be finite"),
            ProfileViolation::Required(what) => write!(f, "{what} required"),
            ProfileViolation::KappaMismatch { stored, expected } => {
                write!(f, "κ={stored:?} does not match ℓ/μ={expected}")
            }
            ProfileViolation::RhoExceedsEll { rho, ell } => {
                write!(f, "ρ={rho} exceeds ℓ={ell} in a smooth regime")
            }
        }
    }
}

/// Check that `profile` carries every constant `regime` needs.
pub fn validate_profile(
    profile: &RegularityProfile,
    regime: Regime,
) -> Result<RegularityProfile, Vec<ProfileViolation>> {
    let mut violations = Vec::new();
    let fields: [(&'static str, f64); 6] = [
        ("L", profile.lipschitz_l),
        ("ℓ", profile.smooth_ell),
        ("μ", profile.strong_concavity_mu),
        ("ρ", profile.weak_convexity_rho),
        ("σ²", profile.noise_var_sigma2),
        ("D", profile.diameter_d),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            violations.push(ProfileViolation::NonFinite(name));
        } else if value < 0.0 {
            violations.push(ProfileViolation::Negative(name));
        }
    }
    if profile.diameter_d.is_finite() && profile.diameter_d <= 0.0 {
        violations.push(ProfileViolation::NonPositiveDiameter(profile.diameter_d));
    }

    let mu = profile.strong_concavity_mu;
    let ell = profile.smooth_ell;
    if mu > 0.0 && ell > 0.0 {
        if mu > ell {
            violations.push(ProfileViolation::MuExceedsEll { mu, ell });
        }
        let expected = ell / mu;
        let ok = profile
            .kappa
            .is_some_and(|k| (k - expected).abs() <= 1e-12 * expected.max(1.0));
        if !ok {
            violations.push(ProfileViolation::KappaMismatch {
                stored: profile.kappa,
                expected,
            });
        }
    }

    let mut require = |cond: bool, v: ProfileViolation| {
        if !cond {
            violations.push(v);
        }
    };
    match regime {
        Regime::SmoothNcsc => {
            require(mu > 0.0, ProfileViolation::MuRequired);
            require(ell > 0.0, ProfileViolation::Required("ℓ>0"));
        }
        Regime::SmoothNcc => {
            require(ell > 0.0, ProfileViolation::Required("ℓ>0"));
            require(profile.lipschitz_l > 0.0, ProfileViolation::Required("L>0"));
        }
        Regime::NonsmoothNcsc => {
            require(mu > 0.0, ProfileViolation::MuRequired);
            require(profile.lipschitz_l > 0.0, ProfileViolation::Required("L>0"));
            require(
                profile.weak_convexity_rho > 0.0,
                ProfileViolation::Required("ρ>0"),
            );
        }
        Regime::NonsmoothNcc => {
            require(profile.lipschitz_l > 0.0, ProfileViolation::Required("L>0"));
            require(
                profile.weak_convexity_rho > 0.0,
                ProfileViolation::Required("ρ>0"),
            );
        }
        Regime::Custom => {}
    }
    if regime.smooth() && ell > 0.0 && profile.weak_convexity_rho > ell {
        violations.push(ProfileViolation::RhoExceedsEll {
            rho: profile.weak_convexity_rho,
            ell,
        });
    }

    if violations.is_empty() {
        Ok(profile.clone())
    } else {
        Err(violations)
    }
}

/// Deterministic first-order access to `f(x, y)`.
///
/// `subgrad` must be deterministic: repeated calls at identical `(x, y)`
/// return identical pairs. At nonsmooth points the oracle picks the
/// subgradient.
pub trait MinimaxOracle: Send + Sync {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;
    fn value(&self, x: &[f64], y: &[f64]) -> f64;
    /// Write `g_x in ∂_x f(x, y)` and `g_y in ∂_y f(x, y)`.
    fn subgrad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]);
    fn profile(&self) -> &RegularityProfile;

    fn sampler(&self) -> Option<&dyn StochasticGradient> {
        None
    }

    fn subgrad_vec(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut gx = vec![0.0; self.dim_x()];
        let mut gy = vec![0.0; self.dim_y()];
        self.subgrad(x, y, &mut gx, &mut gy);
        (gx, gy)
    }
}

/// Unbiased stochastic gradient `G(x, y, xi)` with bounded variance.
pub trait StochasticGradient: Send + Sync {
    /// Draw one noise realization from `rng` and write `(G_x, G_y)`.
    fn sample(&self, x: &[f64], y: &[f64], rng: &mut SolverRng, gx: &mut [f64], gy: &mut [f64]);
}

/// Loop state of the two-timescale iteration.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub t: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub rng: SolverRng,
}

/// Iterate `(x_t, y_t)` together with the stepsizes that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub t: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub eta_x: f64,
    pub eta_y: f64,
}

/// Stationarity diagnostics at iterate `t`, computed with inner solves at
/// tolerance [`RunTrace::inner_tol`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: usize,
    /// Estimate of `Phi(x_t)`.
    pub phi: f64,
    /// `f(x_t, y_t)`.
    pub f_value: f64,
    /// `Delta_t = Phi(x_t) - f(x_t, y_t)`.
    pub primal_gap: f64,
    /// `delta_t = |y*(x_t) - y_t|^2`, strongly concave problems only.
    pub tracking_error: Option<f64>,
    pub grad_phi_norm: Option<f64>,
    pub moreau_grad_norm: Option<f64>,
    /// Algorithm oracle calls made up to iterate `t`.
    pub grad_evals: u64,
}

impl Diagnostics {
    /// `|grad Phi|` when available, otherwise the Moreau-envelope gradient norm.
    pub fn stationarity(&self) -> Option<f64> {
        self.grad_phi_norm.or(self.moreau_grad_norm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    EarlyStopped { t: usize },
}

/// Everything a solver run produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTrace {
    /// Retained iterates; all of them unless a reservoir was requested.
    pub records: Vec<IterRecord>,
    pub diagnostics: Vec<Diagnostics>,
    /// Number of iterations actually executed.
    pub iterations: usize,
    /// Index `t` of the returned iterate.
    pub selected_index: usize,
    pub selected_x: Vec<f64>,
    pub final_x: Vec<f64>,
    pub final_y: Vec<f64>,
    /// Algorithm oracle calls: one per `subgrad` call, one per sampler draw.
    pub grad_evals: u64,
    /// Oracle calls spent on diagnostics (excluded from `grad_evals`).
    pub diagnostic_evals: u64,
    pub inner_tol: f64,
    pub status: RunStatus,
    /// `Phi(x_0) - min_t Phi(x_t)` over the diagnosed iterates.
    pub delta_phi_estimate: Option<f64>,
}

impl RunTrace {
    /// Gradient components evaluated: each oracle call yields one `G_x` and one `G_y`.
    pub fn component_evals(&self) -> u64 {
        2 * self.grad_evals
    }

    pub fn min_stationarity(&self) -> Option<f64> {
        self.diagnostics
            .iter()
            .filter_map(Diagnostics::stationarity)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
    }

    /// First diagnosed iterate whose stationarity measure is at most `eps`.
    pub fn first_hit(&self, eps: f64) -> Option<&Diagnostics> {
        self.diagnostics
            .iter()
            .find(|d| d.stationarity().is_some_and(|s| s <= eps))
    }
}
