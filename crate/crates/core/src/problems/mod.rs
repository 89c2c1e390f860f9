//! Built-in problems and the declarative [`ProblemSpec`] used by front ends.

pub mod bilinear;
pub mod libsvm;
pub mod logreg;
pub mod quadratic;
pub mod wgan;

use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::model::MinimaxOracle;
use crate::noise::{GaussianNoise, Noiseless};

use bilinear::Bilinear;
use libsvm::{gaussian_blobs, parse_libsvm, DatasetLibsvm};
use logreg::RobustLogreg;
use quadratic::QuadraticNcsc;
use wgan::WganLinear;

/// Source of a logistic-regression dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum DataSource {
    Libsvm {
        path: String,
    },
    Blobs {
        samples: usize,
        features: usize,
        separation: f64,
        #[serde(default = "one")]
        spread: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemSpec {
    Bilinear {
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "one")]
        radius: f64,
        /// Declared weak-convexity modulus for the nonsmooth stepsize rules.
        #[serde(default)]
        rho: Option<f64>,
        /// Add a sampler: `0` gives exact gradients, positive values Gaussian noise.
        #[serde(default)]
        noise_sigma2: Option<f64>,
    },
    /// The fixed 5×3 instance with `kappa = 4` unless `q`/`c` are given.
    QuadraticNcsc {
        #[serde(default)]
        q: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        c: Option<Vec<Vec<f64>>>,
        #[serde(default = "one")]
        mu: f64,
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default)]
        x_box: Option<f64>,
        #[serde(default)]
        noise_sigma2: Option<f64>,
    },
    RobustLogreg {
        data: DataSource,
        #[serde(default)]
        lambda1: Option<f64>,
        #[serde(default)]
        lambda2: Option<f64>,
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(default)]
        x_box: Option<f64>,
    },
    WganLinear {
        #[serde(default)]
        mu_hat: f64,
        #[serde(default)]
        sigma_hat: Option<f64>,
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        y_radius: Option<f64>,
        #[serde(default)]
        x_box: Option<f64>,
    },
}

/// A constructed problem ready for the solvers.
pub struct Problem {
    pub name: String,
    pub oracle: Box<dyn MinimaxOracle>,
    pub set: ConstraintSet,
    /// Half-width of an `x` box on which the reported profile constants hold.
    pub x_region: f64,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("profile", self.oracle.profile())
            .field("set", &self.set)
            .finish()
    }
}

fn with_noise<O: MinimaxOracle + 'static>(o: O, noise: Option<f64>) -> Box<dyn MinimaxOracle> {
    match noise {
        None => Box::new(o),
        Some(s) if s <= 0.0 => Box::new(Noiseless::new(o)),
        Some(s) => Box::new(GaussianNoise::new(o, s)),
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidParameter(format!("{what} must be a nonempty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::Bilinear { .. } => "bilinear",
            ProblemSpec::QuadraticNcsc { .. } => "quadratic-ncsc",
            ProblemSpec::RobustLogreg { .. } => "robust-logreg",
            ProblemSpec::WganLinear { .. } => "wgan-linear",
        }
    }

    /// Default instance of a named problem kind.
    pub fn named(kind: &str) -> Option<Self> {
        Some(match kind {
            "bilinear" => ProblemSpec::Bilinear {
                c: 1.0,
                radius: 1.0,
                rho: Some(1.0),
                noise_sigma2: None,
            },
            "quadratic-ncsc" => ProblemSpec::QuadraticNcsc {
                q: None,
                c: None,
                mu: 1.0,
                radius: None,
                x_box: None,
                noise_sigma2: None,
            },
            "robust-logreg" => ProblemSpec::RobustLogreg {
                data: DataSource::Blobs {
                    samples: 100,
                    features: 5,
                    separation: 40.0,
                    spread: 1.0,
                    seed: 0,
                },
                lambda1: None,
                lambda2: None,
                alpha: None,
                x_box: None,
            },
            "wgan-linear" => ProblemSpec::WganLinear {
                mu_hat: 0.0,
                sigma_hat: None,
                lambda: None,
                y_radius: None,
                x_box: None,
            },
            _ => return None,
        })
    }

    /// Construct the oracle. `data_override` replaces a logistic-regression
    /// dataset with a LIBSVM file.
    pub fn build(&self, data_override: Option<&Path>) -> Result<Problem> {
        let name = self.kind().to_string();
        let (oracle, set, x_region): (Box<dyn MinimaxOracle>, ConstraintSet, f64) = match self {
            ProblemSpec::Bilinear {
                c,
                radius,
                rho,
                noise_sigma2,
            } => {
                let mut b = Bilinear::new(*c, *radius)?;
                if let Some(r) = rho {
                    b = b.with_weak_convexity(*r);
                }
                let set = b.set().clone();
                (with_noise(b, *noise_sigma2), set, 2.0)
            }
            ProblemSpec::QuadraticNcsc {
                q,
                c,
                mu,
                radius,
                x_box,
                noise_sigma2,
            } => {
                let prob = match (q, c) {
                    (None, None) => QuadraticNcsc::benchmark(),
                    (Some(q), Some(c)) => {
                        let (q, c) = (matrix(q, "q")?, matrix(c, "c")?);
                        let radius = radius.unwrap_or(10.0);
                        let cn = c.norm().max(1e-12);
                        QuadraticNcsc::new(q, c, *mu, radius, x_box.unwrap_or(mu * radius / cn))?
                    }
                    _ => {
                        return Err(Error::InvalidParameter(
                            "quadratic-ncsc needs both q and c, or neither".into(),
                        ))
                    }
                };
                let set = prob.set().clone();
                let region = prob.x_box() / (prob.dim_x() as f64).sqrt();
                (with_noise(prob, *noise_sigma2), set, region)
            }
            ProblemSpec::RobustLogreg {
                data,
                lambda1,
                lambda2,
                alpha,
                x_box,
            } => {
                let ds = match (data_override, data) {
                    (Some(path), _) => load_libsvm(path)?,
                    (None, DataSource::Libsvm { path }) => load_libsvm(Path::new(path))?,
                    (
                        None,
                        DataSource::Blobs {
                            samples,
                            features,
                            separation,
                            spread,
                            seed,
                        },
                    ) => gaussian_blobs(*samples, *features, *separation, *spread, *seed),
                };
                let n = ds.num_samples().max(1) as f64;
                let p = RobustLogreg::new(
                    ds,
                    lambda1.unwrap_or(1.0 / (n * n)),
                    lambda2.unwrap_or(1e-2),
                    alpha.unwrap_or(10.0),
                    x_box.unwrap_or(10.0),
                )?;
                let set = p.set().clone();
                (Box::new(p), set, x_box.unwrap_or(10.0))
            }
            ProblemSpec::WganLinear {
                mu_hat,
                sigma_hat,
                lambda,
                y_radius,
                x_box,
            } => {
                let w = WganLinear::new(
                    *mu_hat,
                    sigma_hat.unwrap_or(0.1),
                    lambda.unwrap_or(1e-3),
                    y_radius.unwrap_or(1.0),
                    x_box.unwrap_or(2.0),
                )?;
                let set = w.set().clone();
                (Box::new(w), set, x_box.unwrap_or(2.0))
            }
        };
        Ok(Problem {
            name,
            oracle,
            set,
            x_region,
        })
    }
}

pub fn load_libsvm(path: &Path) -> Result<DatasetLibsvm> {
    let file = std::fs::File::open(path).map_err(|e| {
        Error::InvalidParameter(format!("cannot open {}: {e}", path.display()))
    })?;
    Ok(parse_libsvm(std::io::BufReader::new(file))?)
}

/// Uniform point in the Euclidean ball of the given radius.
pub fn random_in_ball<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|a| a * a).sum();
        if n2 <= 1.0 {
            return v.into_iter().map(|a| a * radius).collect();
        }
    }
}

/// A point of `set`: a random point of its bounding region, projected.
pub fn random_in_set<R: Rng>(rng: &mut R, set: &ConstraintSet) -> Vec<f64> {
    let mut v: Vec<f64> = match set {
        ConstraintSet::Box { lower, upper } => lower
            .iter()
            .zip(upper)
            .map(|(a, b)| if a < b { rng.random_range(*a..*b) } else { *a })
            .collect(),
        ConstraintSet::Ball { center, radius } => random_in_ball(rng, center.len(), *radius)
            .into_iter()
            .zip(center)
            .map(|(v, c)| v + c)
            .collect(),
        ConstraintSet::Simplex { n } => {
            let w: Vec<f64> = (0..*n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|a| a / s).collect()
        }
    };
    set.project_in_place(&mut v);
    v
}

/// Largest relative gap between the oracle's gradient and central
/// differences of its value, over `samples` random points with `x` in the
/// box `[x_lo, x_hi]` and `y` in `set`. The gap is measured as
/// `|fd - g| / max(1, |g|)` per coordinate.
pub fn finite_difference_error(
    oracle: &dyn MinimaxOracle,
    x_lo: &[f64],
    x_hi: &[f64],
    set: &ConstraintSet,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x: Vec<f64> = x_lo
            .iter()
            .zip(x_hi)
            .map(|(a, b)| rng.random_range(*a..*b))
            .collect();
        let y = random_in_set(&mut rng, set);
        let (gx, gy) = oracle.subgrad_vec(&x, &y);
        for i in 0..x.len() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += h;
            xm[i] -= h;
            let fd = (oracle.value(&xp, &y) - oracle.value(&xm, &y)) / (2.0 * h);
            worst = worst.max((fd - gx[i]).abs() / gx[i].abs().max(1.0));
        }
        for k in 0..y.len() {
            let (mut yp, mut ym) = (y.clone(), y.clone());
            yp[k] += h;
            ym[k] -= h;
            let fd = (oracle.value(&x, &yp) - oracle.value(&x, &ym)) / (2.0 * h);
            worst = worst.max((fd - gy[k]).abs() / gy[k].abs().max(1.0));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_named_problem_builds() {
        for kind in ["bilinear", "quadratic-ncsc", "robust-logreg", "wgan-linear"] {
            let p = ProblemSpec::named(kind).unwrap().build(None).unwrap();
            assert_eq!(p.name, kind);
            assert_eq!(p.set.dim(), p.oracle.dim_y());
        }
        assert!(ProblemSpec::named("nope").is_none());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = ProblemSpec::named("robust-logreg").unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back: ProblemSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn random_points_land_in_their_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for set in [
            ConstraintSet::cube(3, 2.0),
            ConstraintSet::centered_ball(4, 0.5),
            ConstraintSet::Simplex { n: 6 },
        ] {
            for _ in 0..100 {
                let v = random_in_set(&mut rng, &set);
                assert!(set.contains(&v, 1e-12).unwrap());
            }
        }
    }
}
