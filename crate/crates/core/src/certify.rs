//! Numeric checks of the inequalities behind the convergence analysis,
//! evaluated along actual traces or at sampled points.
//!
//! Every check reports its worst margin, `min (bound - observed)` over all
//! instances, and passes when that margin is at least `-tolerance`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::model::{IterRecord, MinimaxOracle};
use crate::problems::{finite_difference_error, random_in_set};
use crate::stationarity::{grad_phi, prox_phi};
use crate::vector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub tolerance: f64,
    pub worst_margin: f64,
    pub checked: usize,
    pub passed: bool,
}

impl CheckResult {
    pub fn from_margins(name: &str, tolerance: f64, margins: impl IntoIterator<Item = f64>) -> Self {
        let mut worst = f64::INFINITY;
        let mut checked = 0;
        for m in margins {
            checked += 1;
            // NaN margins count as failures.
            worst = if m.is_nan() { f64::NEG_INFINITY } else { worst.min(m) };
        }
        CheckResult {
            name: name.to_string(),
            tolerance,
            worst_margin: worst,
            checked,
            passed: worst >= -tolerance,
        }
    }
}

/// Exact-as-possible quantities at one iterate of a strongly concave run.
#[derive(Debug, Clone)]
pub struct IterateQuantities {
    pub phi: f64,
    pub grad_phi_sq: f64,
    pub y_star: Vec<f64>,
    /// `|y*(x_t) - y_t|^2`.
    pub delta: f64,
}

pub fn iterate_quantities(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    records: &[IterRecord],
    tol: f64,
) -> Result<Vec<IterateQuantities>> {
    records
        .iter()
        .map(|r| {
            let g = grad_phi(oracle, set, &r.x, tol)?;
            Ok(IterateQuantities {
                phi: g.phi,
                grad_phi_sq: vector::norm_sq(&g.grad),
                delta: vector::dist_sq(&g.y, &r.y),
                y_star: g.y,
            })
        })
        .collect()
}

/// Tracking recursion, descent inequality, ascent contraction and the
/// running-average bound along consecutive records of a smooth strongly
/// concave run with constant `eta_x` and `eta_y = 1/ell`.
///
/// `delta_phi` bounds `Phi(x_0) - inf Phi` over the region the run visits.
pub fn smooth_ncsc_lemmas(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    records: &[IterRecord],
    eta_x: f64,
    delta_phi: f64,
    inner_tol: f64,
    tolerance: f64,
) -> Result<Vec<CheckResult>> {
    let p = oracle.profile();
    let ell = p.smooth_ell;
    let kappa = p.kappa.ok_or(Error::NotStronglyConcave)?;
    let d = p.diameter_d;
    let q = iterate_quantities(oracle, set, records, inner_tol)?;
    let pairs = || {
        records
            .windows(2)
            .zip(q.windows(2))
            .filter(|(r, _)| r[1].t == r[0].t + 1)
    };

    let k3 = 4.0 * kappa.powi(3) * eta_x * eta_x;
    let tracking = pairs().map(|(_, w)| {
        let bound = (1.0 - 1.0 / (2.0 * kappa) + k3 * ell * ell) * w[0].delta + k3 * w[0].grad_phi_sq;
        bound - w[1].delta
    });
    let tracking = CheckResult::from_margins("tracking-recursion", tolerance, tracking);

    let descent = pairs().map(|(_, w)| {
        let bound = w[0].phi - 7.0 * eta_x / 16.0 * w[0].grad_phi_sq
            + 9.0 * eta_x * ell * ell / 16.0 * w[0].delta;
        bound - w[1].phi
    });
    let descent = CheckResult::from_margins("descent", tolerance, descent);

    let contraction = pairs().map(|(r, w)| {
        (1.0 - 1.0 / kappa) * w[0].delta - vector::dist_sq(&w[0].y_star, &r[1].y)
    });
    let contraction = CheckResult::from_margins("ascent-contraction", tolerance, contraction);

    let constant = 128.0 * kappa * kappa * ell * delta_phi + 5.0 * kappa * ell * ell * d * d;
    let mut sum = 0.0;
    let running = q.iter().enumerate().map(|(i, qi)| {
        sum += qi.grad_phi_sq;
        let n = (i + 1) as f64;
        constant / n - sum / n
    });
    let running: Vec<f64> = running.collect();
    let running = CheckResult::from_margins("running-average-bound", tolerance, running);

    Ok(vec![tracking, descent, contraction, running])
}

/// First iteration whose `|grad Phi|` is at most `eps`, by direct evaluation.
pub fn hitting_time(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    records: &[IterRecord],
    eps: f64,
    tol: f64,
) -> Result<Option<usize>> {
    for r in records {
        if vector::norm(&grad_phi(oracle, set, &r.x, tol)?.grad) <= eps {
            return Ok(Some(r.t));
        }
    }
    Ok(None)
}

/// Idempotence, nonexpansiveness and the variational inequality of the
/// projection at random points around `set`.
pub fn projection_suite(set: &ConstraintSet, samples: usize, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = 2.0 * set.diameter().max(1.0);
    let center = set.center();
    let outside = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        center
            .iter()
            .map(|c| c + rng.random_range(-spread..spread))
            .collect()
    };
    let (mut idem, mut nonexp, mut vi) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..samples {
        let u = outside(&mut rng);
        let v = outside(&mut rng);
        let mut pu = u.clone();
        set.project_in_place(&mut pu);
        let mut pv = v.clone();
        set.project_in_place(&mut pv);
        let mut ppu = pu.clone();
        set.project_in_place(&mut ppu);
        idem.push(-vector::dist(&ppu, &pu));
        nonexp.push(vector::dist(&u, &v) - vector::dist(&pu, &pv));
        let w = random_in_set(&mut rng, set);
        vi.push(-vector::dot(&vector::sub(&u, &pu), &vector::sub(&w, &pu)));
    }
    vec![
        CheckResult::from_margins("projection-idempotent", 0.0, idem),
        CheckResult::from_margins("projection-nonexpansive", 1e-12, nonexp),
        CheckResult::from_margins("projection-variational", 1e-10, vi),
    ]
}

/// Gradient/finite-difference agreement (relative `1e-5`) and sampled
/// Lipschitz and smoothness quotients against the reported `L` and `ell`.
pub fn oracle_suite(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    x_lo: &[f64],
    x_hi: &[f64],
    samples: usize,
    seed: u64,
) -> Vec<CheckResult> {
    let err = finite_difference_error(oracle, x_lo, x_hi, set, samples, seed);
    let mut out = vec![CheckResult::from_margins("finite-difference", 1e-5, [-err])];

    let p = oracle.profile();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let draw_x = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        x_lo.iter().zip(x_hi).map(|(a, b)| rng.random_range(*a..*b)).collect()
    };
    let (mut lip, mut smooth) = (Vec::new(), Vec::new());
    for _ in 0..samples {
        let (x1, x2) = (draw_x(&mut rng), draw_x(&mut rng));
        let (y1, y2) = (random_in_set(&mut rng, set), random_in_set(&mut rng, set));
        let dx = vector::dist(&x1, &x2);
        if p.lipschitz_l > 0.0 && dx > 0.0 {
            let q = (oracle.value(&x1, &y1) - oracle.value(&x2, &y1)).abs() / dx;
            lip.push(p.lipschitz_l * (1.0 + 1e-6) - q);
        }
        if p.smooth_ell > 0.0 {
            let (gx1, gy1) = oracle.subgrad_vec(&x1, &y1);
            let (gx2, gy2) = oracle.subgrad_vec(&x2, &y2);
            let dz = (dx * dx + vector::dist_sq(&y1, &y2)).sqrt();
            let dg = (vector::dist_sq(&gx1, &gx2) + vector::dist_sq(&gy1, &gy2)).sqrt();
            if dz > 0.0 {
                smooth.push(p.smooth_ell * (1.0 + 1e-6) - dg / dz);
            }
        }
    }
    if !lip.is_empty() {
        out.push(CheckResult::from_margins("lipschitz-quotient", 0.0, lip));
    }
    if !smooth.is_empty() {
        out.push(CheckResult::from_margins("smoothness-quotient", 0.0, smooth));
    }
    out
}

/// Secant tests of `Phi` on a box: `L`-Lipschitz and `rho`-weakly convex.
#[allow(clippy::too_many_arguments)]
pub fn phi_structure_suite(
    phi: &dyn Fn(&[f64]) -> f64,
    x_lo: &[f64],
    x_hi: &[f64],
    lipschitz: f64,
    rho: f64,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lip, mut weak) = (Vec::new(), Vec::new());
    for _ in 0..samples {
        let a: Vec<f64> = x_lo.iter().zip(x_hi).map(|(l, h)| rng.random_range(*l..*h)).collect();
        let b: Vec<f64> = x_lo.iter().zip(x_hi).map(|(l, h)| rng.random_range(*l..*h)).collect();
        let lam: f64 = rng.random_range(0.0..1.0);
        let mid: Vec<f64> = a.iter().zip(&b).map(|(u, v)| lam * u + (1.0 - lam) * v).collect();
        let d = vector::dist(&a, &b);
        let (pa, pb) = (phi(&a), phi(&b));
        lip.push(lipschitz * d - (pa - pb).abs());
        weak.push(lam * pa + (1.0 - lam) * pb + 0.5 * rho * lam * (1.0 - lam) * d * d - phi(&mid));
    }
    vec![
        CheckResult::from_margins("phi-lipschitz", tolerance, lip),
        CheckResult::from_margins("phi-weakly-convex", tolerance, weak),
    ]
}

/// Envelope descent `Phi(prox(x)) <= Phi(x)` and the subgradient witness:
/// `g = 2 rho_hat (x - prox(x))` satisfies
/// `Phi(z) >= Phi(prox) + <g, z - prox> - (rho_hat/2) |z - prox|^2`
/// at random `z` within `probe` of the proximal point.
#[allow(clippy::too_many_arguments)]
pub fn moreau_suite(
    oracle: &dyn MinimaxOracle,
    set: &ConstraintSet,
    phi: &dyn Fn(&[f64]) -> f64,
    points: &[Vec<f64>],
    rho_hat: f64,
    tol: f64,
    probe: f64,
    seed: u64,
) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut descent, mut witness, mut distance) = (Vec::new(), Vec::new(), Vec::new());
    for x in points {
        let p = prox_phi(oracle, set, x, rho_hat, tol)?;
        let xhat = &p.prox_point;
        let phi_hat = phi(xhat);
        descent.push(phi(x) + 2.0 * tol - phi_hat);
        let g: Vec<f64> = x.iter().zip(xhat).map(|(a, b)| 2.0 * rho_hat * (a - b)).collect();
        let norm = vector::norm(&g);
        // |x - x_hat| = |g| / (2 rho_hat) by construction; recheck the arithmetic.
        distance.push(norm / (2.0 * rho_hat) - vector::dist(x, xhat) + 1e-12);
        for _ in 0..10 {
            let z: Vec<f64> = xhat.iter().map(|v| v + rng.random_range(-probe..probe)).collect();
            let dz = vector::sub(&z, xhat);
            let lower = phi_hat + vector::dot(&g, &dz) - 0.5 * rho_hat * vector::norm_sq(&dz);
            witness.push(phi(&z) - lower);
        }
    }
    // Prox error of size tol moves the witness inequality by O(tol * |z - x_hat|).
    let wtol = 10.0 * tol * (1.0 + probe) + 1e-9;
    Ok(vec![
        CheckResult::from_margins("envelope-descent", 0.0, descent),
        CheckResult::from_margins("prox-distance", 0.0, distance),
        CheckResult::from_margins("subgradient-witness", wtol, witness),
    ])
}
