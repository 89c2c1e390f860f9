use crate::error::{Error, Result};
use crate::model::{MinimaxOracle, SolverRng, StochasticGradient};

/// Average of `m` independent sampler draws at `(x, y)`.
pub fn sg_minibatch(
    oracle: &dyn MinimaxOracle,
    m: usize,
    x: &[f64],
    y: &[f64],
    rng: &mut SolverRng,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let sampler = oracle.sampler().ok_or(Error::MissingSampler)?;
    if m == 0 {
        return Err(Error::InvalidParameter("batch size must be >= 1".into()));
    }
    let mut gx = vec![0.0; x.len()];
    let mut gy = vec![0.0; y.len()];
    let mut scratch = (vec![0.0; x.len()], vec![0.0; y.len()]);
    sg_minibatch_into(sampler, m, x, y, rng, &mut gx, &mut gy, &mut scratch);
    Ok((gx, gy))
}

/// Allocation-free form of [`sg_minibatch`]. With `m == 1` the single draw
/// is written through unchanged.
#[allow(clippy::too_many_arguments)]
pub fn sg_minibatch_into(
    sampler: &dyn StochasticGradient,
    m: usize,
    x: &[f64],
    y: &[f64],
    rng: &mut SolverRng,
    gx: &mut [f64],
    gy: &mut [f64],
    scratch: &mut (Vec<f64>, Vec<f64>),
) {
    sampler.sample(x, y, rng, gx, gy);
    if m <= 1 {
        return;
    }
    let (sx, sy) = scratch;
    for _ in 1..m {
        sampler.sample(x, y, rng, sx, sy);
        for (a, b) in gx.iter_mut().zip(sx.iter()) {
            *a += b;
        }
        for (a, b) in gy.iter_mut().zip(sy.iter()) {
            *a += b;
        }
    }
    let inv = 1.0 / m as f64;
    gx.iter_mut().chain(gy.iter_mut()).for_each(|v| *v *= inv);
}
