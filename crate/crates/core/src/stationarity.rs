//! Measuring stationarity: the max-function `Phi(x) = max_{y in Y} f(x, y)`,
//! its gradient, Moreau-envelope proximal points, f-stationarity residuals
//! and the translations between the `Phi` and `f` notions.
//!
//! Every quantity here comes from an inner solve. The tolerance of that
//! solve is returned with the result so callers can budget for it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::model::{MinimaxOracle, Regime, RegularityProfile};
use crate::solvers::{ascend_until, check_start, extragradient_until};
use crate::vector;

/// Hard cap on inner ascent steps for merely concave problems.
const CONCAVE_ASCENT_CAP: usize = 2_000_000;

fn ell_of(profile: &RegularityProfile) -> Result<f64> {
    if profile.smooth_ell > 0.0 {
        Ok(profile.smooth_ell)
    } else {
        Err(Error::MissingConstant("ℓ"))
    }
}

fn kappa_of(profile: &RegularityProfile) -> Result<f64> {
    if !profile.strongly_concave() {
        return Err(Error::NotStronglyConcave);
    }
    let ell = ell_of(profile)?;
    Ok(profile
        .kappa
        .unwrap_or(ell / profile.strong_concavity_mu)
        .max(1.0))
}

/// Step budget for projected ascent to reach gradient-mapping residual `tol`.
fn ascent_budget(profile: &RegularityProfile, tol: f64) -> usize {
    let ell = profile.smooth_ell;
    let scale = (ell * profile.diameter_d / tol).max(std::f64::consts::E);
    if profile.strongly_concave() {
        let kappa = profile
            .kappa
            .unwrap_or(ell / profile.strong_concavity_mu)
            .max(1.0);
        (4.0 * kappa * scale.ln()).ceil() as usize + 100
    } else {
        ((scale * scale).ceil() as usize)
            .saturating_add(100)
            .min(CONCAVE_ASCENT_CAP)
    }
}

/// Estimate of `Phi(x)` with the near-maximizer that produced it.
#[derive(Debug, Clone)]
pub struct PhiEval {
    pub value: f64,
    pub y: Vec<f64>,
    /// Gradient-mapping residual `ell |y+ - y|` at exit.
    pub residual: f64,
    pub steps: usize,
    pub evals: u64,
    /// False when the step budget ran out before the residual reached `tol`.
    pub converged: bool,
}

/// `Phi(x)` via projected ascent from the center of `Y`.
pub fn eval_phi(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x: &[f64],
    tol: f64,
) -> Result<PhiEval> {
    eval_phi_from(oracle, set, x, &set.center(), tol)
}

/// `Phi(x)` via projected ascent with step `1/ell` from `y_start`, stopping
/// when `ell |y+ - y| <= tol`. Merely concave problems also consider the
/// averaged iterate and report the better of the two values.
pub fn eval_phi_from(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x: &[f64],
    y_start: &[f64],
    tol: f64,
) -> Result<PhiEval> {
    check_start(oracle, set, x, y_start)?;
    let profile = oracle.profile();
    let ell = ell_of(profile)?;
    let out = ascend_until(oracle, set, x, y_start, 1.0 / ell, tol, ascent_budget(profile, tol));
    if !out.converged {
        log::warn!(
            "max-function solve stopped after {} steps with residual {:e}",
            out.steps,
            out.residual
        );
    }
    let mut value = oracle.value(x, &out.y);
    let mut y = out.y;
    if !profile.strongly_concave() {
        let avg = oracle.value(x, &out.y_avg);
        if avg > value {
            value = avg;
            y = out.y_avg;
        }
    }
    Ok(PhiEval {
        value,
        y,
        residual: out.residual,
        steps: out.steps,
        evals: out.steps as u64,
        converged: out.converged,
    })
}

#[derive(Debug, Clone)]
pub struct GradPhi {
    pub grad: Vec<f64>,
    /// Near-maximizer with `|y - y*(x)| <= tol / ell`.
    pub y: Vec<f64>,
    pub phi: f64,
    pub evals: u64,
    pub converged: bool,
}

/// `grad Phi(x) = grad_x f(x, y*(x))` to accuracy `tol` (strongly concave only).
pub fn grad_phi(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x: &[f64],
    tol: f64,
) -> Result<GradPhi> {
    grad_phi_from(oracle, set, x, &set.center(), tol)
}

/// As [`grad_phi`], warm-starting the inner ascent at `y_start`.
///
/// The ascent runs until `ell |y+ - y| <= tol / (2 kappa)`, which places `y+`
/// within `tol / ell` of `y*(x)`; the gradient is then read off at `y+`.
pub fn grad_phi_from(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x: &[f64],
    y_start: &[f64],
    tol: f64,
) -> Result<GradPhi> {
    check_start(oracle, set, x, y_start)?;
    let profile = oracle.profile();
    let kappa = kappa_of(profile)?;
    let ell = ell_of(profile)?;
    let inner_tol = tol / (2.0 * kappa);
    let out = ascend_until(
        oracle,
        set,
        x,
        y_start,
        1.0 / ell,
        inner_tol,
        ascent_budget(profile, inner_tol),
    );
    if !out.converged {
        log::warn!("gradient solve stopped with residual {:e}", out.residual);
    }
    let (grad, _) = oracle.subgrad_vec(x, &out.y);
    Ok(GradPhi {
        grad,
        phi: oracle.value(x, &out.y),
        y: out.y,
        evals: out.steps as u64 + 1,
        converged: out.converged,
    })
}

/// Proximal point of `Phi / (2 rho_hat)` at `x`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxResult {
    /// `argmin_w Phi(w) + rho_hat |w - x|^2`.
    pub prox_point: Vec<f64>,
    /// `y` half of the regularized saddle point.
    pub y: Vec<f64>,
    /// Residual of the extragradient solve at exit.
    pub certificate_gap: f64,
    /// `Phi(prox) + rho_hat |prox - x|^2`.
    pub envelope_value: f64,
    pub phi_at_prox: f64,
    pub evals: u64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ProxOptions {
    pub warm_x: Option<Vec<f64>>,
    pub warm_y: Option<Vec<f64>>,
    pub max_steps: usize,
}

impl Default for ProxOptions {
    fn default() -> Self {
        ProxOptions {
            warm_x: None,
            warm_y: None,
            max_steps: 1_000_000,
        }
    }
}

/// Proximal point by extragradient on
/// `min_w max_{y in Y} f(w, y) + rho_hat |w - x|^2` with step
/// `1 / (2 (ell + 2 rho_hat))`. Fails if the solve does not certify `tol`.
pub fn prox_phi(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x: &[f64],
    rho_hat: f64,
    tol: f64,
) -> Result<ProxResult> {
    let opts = ProxOptions::default();
    let res = prox_phi_with(oracle, set, x, rho_hat, tol, &opts)?;
    if !res.converged {
        return Err(Error::BudgetExhausted {
            steps: opts.max_steps,
            residual: res.certificate_gap,
        });
    }
    Ok(res)
}

/// As [`prox_phi`] but returns the unconverged result instead of failing.
pub fn prox_phi_with(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x: &[f64],
    rho_hat: f64,
    tol: f64,
    opts: &ProxOptions,
) -> Result<ProxResult> {
    if !(rho_hat > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "envelope parameter must be positive, got {rho_hat}"
        )));
    }
    let ell = ell_of(oracle.profile())?;
    let eta = 1.0 / (2.0 * (ell + 2.0 * rho_hat));
    let x0 = opts.warm_x.clone().unwrap_or_else(|| x.to_vec());
    let y0 = opts.warm_y.clone().unwrap_or_else(|| set.center());
    let eg = extragradient_until(oracle, set, x, rho_hat, eta, &x0, &y0, tol, opts.max_steps)?;
    let phi = eval_phi_from(oracle, set, &eg.x, &eg.y, tol)?;
    let envelope_value = phi.value + rho_hat * vector::dist_sq(&eg.x, x);
    Ok(ProxResult {
        envelope_value,
        phi_at_prox: phi.value,
        prox_point: eg.x,
        y: eg.y,
        certificate_gap: eg.residual,
        evals: eg.grad_evals + phi.evals,
        converged: eg.converged,
    })
}

/// `|grad Phi_{1/(2 rho_hat)}(x)| = 2 rho_hat |x - prox(x)|`.
pub fn moreau_grad_norm(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x: &[f64],
    rho_hat: f64,
    tol: f64,
) -> Result<f64> {
    let p = prox_phi(oracle, set, x, rho_hat, tol)?;
    Ok(2.0 * rho_hat * vector::dist(x, &p.prox_point))
}

/// Envelope parameter for a regime: `ell` when smooth, `rho` otherwise.
pub fn envelope_rho(profile: &RegularityProfile, regime: Regime) -> Option<f64> {
    let v = if regime.smooth() {
        profile.smooth_ell
    } else {
        profile.weak_convexity_rho
    };
    (v > 0.0).then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FStationarity {
    /// `P_Y(y + grad_y f(x, y) / ell)`.
    pub y_plus: Vec<f64>,
    /// `|grad_x f(x, y+)|`.
    pub f_grad_x_norm: f64,
    /// `ell |y+ - y|`.
    pub grad_mapping_norm: f64,
}

impl FStationarity {
    pub fn max_residual(&self) -> f64 {
        self.f_grad_x_norm.max(self.grad_mapping_norm)
    }
}

/// Residuals of the pair `(x, y)`; two oracle calls.
pub fn f_stationarity(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x: &[f64],
    y: &[f64],
) -> Result<FStationarity> {
    check_start(oracle, set, x, y)?;
    let ell = ell_of(oracle.profile())?;
    let (_, gy) = oracle.subgrad_vec(x, y);
    let mut y_plus = y.to_vec();
    vector::axpy(1.0 / ell, &gy, &mut y_plus);
    set.project_in_place(&mut y_plus);
    let (gx_plus, _) = oracle.subgrad_vec(x, &y_plus);
    Ok(FStationarity {
        f_grad_x_norm: vector::norm(&gx_plus),
        grad_mapping_norm: ell * vector::dist(&y_plus, y),
        y_plus,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationarityReport {
    pub phi_value: f64,
    pub grad_phi_norm: Option<f64>,
    pub moreau_grad_norm: f64,
    /// `rho_hat` of the envelope `Phi_{1/(2 rho_hat)}` used above.
    pub envelope_rho: f64,
    pub f_grad_x_norm: f64,
    pub grad_mapping_norm: f64,
    pub inner_tol: f64,
    pub inner_iters: u64,
}

/// All stationarity measures at `(x, y)`.
pub fn stationarity_report(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x: &[f64],
    y: &[f64],
    rho_hat: f64,
    tol: f64,
) -> Result<StationarityReport> {
    let phi = eval_phi_from(oracle, set, x, y, tol)?;
    let mut iters = phi.evals;
    let grad_phi_norm = if oracle.profile().strongly_concave() {
        let g = grad_phi_from(oracle, set, x, y, tol)?;
        iters += g.evals;
        Some(vector::norm(&g.grad))
    } else {
        None
    };
    let prox = prox_phi(oracle, set, x, rho_hat, tol)?;
    iters += prox.evals;
    let fs = f_stationarity(oracle, set, x, y)?;
    Ok(StationarityReport {
        phi_value: phi.value,
        grad_phi_norm,
        moreau_grad_norm: 2.0 * rho_hat * vector::dist(x, &prox.prox_point),
        envelope_rho: rho_hat,
        f_grad_x_norm: fs.f_grad_x_norm,
        grad_mapping_norm: fs.grad_mapping_norm,
        inner_tol: tol,
        inner_iters: iters + 2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TranslationBranch {
    /// Projected ascent at frozen `x`.
    StronglyConcave,
    /// Extragradient on the `ell`-regularized saddle problem.
    Concave,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Translation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub report: FStationarity,
    pub branch: TranslationBranch,
    pub grad_evals: u64,
    /// Whether the residuals meet the guaranteed bound (`2 eps` or `4 eps`, plus `tol`).
    pub certified: bool,
}

/// Turn an `eps`-stationary point of `Phi` into an approximately stationary
/// pair of `f`.
///
/// Strongly concave problems keep `x_hat` and run projected ascent until
/// `ell |y+ - y| <= eps / (2 kappa)`, giving residuals at most `2 eps`.
/// Merely concave problems solve `min_x max_y f(x, y) + ell |x - x_hat|^2`
/// by extragradient to residual `min(eps, tol)`, giving residuals at most
/// `4 eps`.
pub fn translate_phi_to_f(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x_hat: &[f64],
    eps: f64,
    tol: f64,
) -> Result<Translation> {
    let profile = oracle.profile();
    let ell = ell_of(profile)?;
    let y0 = set.center();
    let (x, y, mut evals, branch, bound) = if profile.strongly_concave() {
        let kappa = kappa_of(profile)?;
        let target = eps / (2.0 * kappa);
        let out = ascend_until(
            oracle,
            set,
            x_hat,
            &y0,
            1.0 / ell,
            target,
            ascent_budget(profile, target),
        );
        (
            x_hat.to_vec(),
            out.y_prev,
            out.steps as u64,
            TranslationBranch::StronglyConcave,
            2.0 * eps,
        )
    } else {
        let eg = extragradient_until(
            oracle,
            set,
            x_hat,
            ell,
            1.0 / (6.0 * ell),
            x_hat,
            &y0,
            eps.min(tol),
            ProxOptions::default().max_steps,
        )?;
        (eg.x, eg.y, eg.grad_evals, TranslationBranch::Concave, 4.0 * eps)
    };
    let report = f_stationarity(oracle, set, &x, &y)?;
    evals += 2;
    let certified = report.max_residual() <= bound + tol;
    if !certified {
        log::warn!(
            "translated pair has residual {:e} above the bound {:e}; x_hat may not be {eps}-stationary",
            report.max_residual(),
            bound
        );
    }
    Ok(Translation {
        x,
        y,
        report,
        branch,
        grad_evals: evals,
        certified,
    })
}
