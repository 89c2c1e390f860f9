//! Convex bounded sets `Y` with exact Euclidean projections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstraintSet {
    /// Coordinate box `lower <= y <= upper`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Probability simplex `{y >= 0, sum y = 1}` in `R^n`.
    Simplex { n: usize },
}

impl ConstraintSet {
    pub fn interval(lo: f64, hi: f64) -> Self {
        ConstraintSet::Box {
            lower: vec![lo],
            upper: vec![hi],
        }
    }

    pub fn cube(n: usize, radius: f64) -> Self {
        ConstraintSet::Box {
            lower: vec![-radius; n],
            upper: vec![radius; n],
        }
    }

    pub fn centered_ball(n: usize, radius: f64) -> Self {
        ConstraintSet::Ball {
            center: vec![0.0; n],
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConstraintSet::Box { lower, .. } => lower.len(),
            ConstraintSet::Ball { center, .. } => center.len(),
            ConstraintSet::Simplex { n } => *n,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ConstraintSet::Box { lower, upper } => vector::dist(upper, lower),
            ConstraintSet::Ball { radius, .. } => 2.0 * radius,
            ConstraintSet::Simplex { n } => {
                if *n > 1 {
                    std::f64::consts::SQRT_2
                } else {
                    0.0
                }
            }
        }
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Euclidean projection of `v` onto the set.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        let mut out = v.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    /// Project `v` in place. Panics in debug builds on a dimension mismatch.
    pub fn project_in_place(&self, v: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        match self {
            ConstraintSet::Box { lower, upper } => {
                for ((vi, lo), hi) in v.iter_mut().zip(lower).zip(upper) {
                    *vi = vi.clamp(*lo, *hi);
                }
            }
            ConstraintSet::Ball { center, radius } => {
                let d = vector::dist(v, center);
                if d > *radius {
                    let s = radius / d;
                    for (vi, ci) in v.iter_mut().zip(center) {
                        *vi = ci + s * (*vi - ci);
                    }
                    // Rounding can leave the rescaled point a few ulps outside,
                    // which would make a second projection move it again.
                    let mut shrink = 1.0 - 2.0 * f64::EPSILON;
                    for _ in 0..32 {
                        if vector::dist(v, center) <= *radius {
                            break;
                        }
                        for (vi, ci) in v.iter_mut().zip(center) {
                            *vi = ci + shrink * (*vi - ci);
                        }
                        shrink *= shrink;
                    }
                }
            }
            ConstraintSet::Simplex { .. } => project_simplex(v),
        }
    }

    /// Distance from `v` to the set.
    pub fn distance(&self, v: &[f64]) -> Result<f64> {
        let p = self.project(v)?;
        Ok(vector::dist(&p, v))
    }

    /// Whether `dist(v, Y) <= tol`.
    pub fn contains(&self, v: &[f64], tol: f64) -> Result<bool> {
        self.check_dim(v)?;
        let inside = match self {
            ConstraintSet::Box { lower, upper } => {
                let d2: f64 = v
                    .iter()
                    .zip(lower)
                    .zip(upper)
                    .map(|((x, lo), hi)| {
                        let e = (lo - x).max(0.0) + (x - hi).max(0.0);
                        e * e
                    })
                    .sum();
                d2.sqrt() <= tol
            }
            ConstraintSet::Ball { center, radius } => {
                (vector::dist(v, center) - radius).max(0.0) <= tol
            }
            ConstraintSet::Simplex { .. } => self.distance(v)? <= tol,
        };
        Ok(inside)
    }

    /// A canonical interior-ish starting point.
    pub fn center(&self) -> Vec<f64> {
        match self {
            ConstraintSet::Box { lower, upper } => {
                lower.iter().zip(upper).map(|(a, b)| 0.5 * (a + b)).collect()
            }
            ConstraintSet::Ball { center, .. } => center.clone(),
            ConstraintSet::Simplex { n } => vec![1.0 / *n as f64; *n],
        }
    }
}

/// Sort-and-threshold projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    if v.len() == 1 {
        v[0] = 1.0;
        return;
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        // `>=` keeps the scan going on ties, so the larger support wins.
        if u - candidate >= 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    for vi in v.iter_mut() {
        *vi = (*vi - theta).max(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn box_keeps_interior_point() {
        let s = ConstraintSet::interval(-1.0, 1.0);
        assert_eq!(s.project(&[0.5]).unwrap(), vec![0.5]);
    }

    #[test]
    fn simplex_projects_corner() {
        let s = ConstraintSet::Simplex { n: 2 };
        let p = s.project(&[2.0, 0.0]).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
    }

    #[test]
    fn ball_scales_radially() {
        let s = ConstraintSet::centered_ball(2, 1.0);
        let p = s.project(&[3.0, 4.0]).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn membership_examples() {
        let third = 1.0 / 3.0;
        assert!(ConstraintSet::Simplex { n: 3 }
            .contains(&[third, third, third], 0.0)
            .unwrap());
        assert!(!ConstraintSet::interval(0.0, 1.0)
            .contains(&[1.001], 1e-6)
            .unwrap());
        assert!(ConstraintSet::centered_ball(2, 1.0)
            .contains(&[1.0, 0.0], 0.0)
            .unwrap());
    }

    #[test]
    fn diameters() {
        let b = ConstraintSet::Box {
            lower: vec![0.0, 0.0],
            upper: vec![3.0, 4.0],
        };
        assert_eq!(b.diameter(), 5.0);
        assert_eq!(ConstraintSet::centered_ball(3, 2.0).diameter(), 4.0);
        assert_eq!(
            ConstraintSet::Simplex { n: 5 }.diameter(),
            std::f64::consts::SQRT_2
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = ConstraintSet::Simplex { n: 3 };
        assert!(matches!(
            s.project(&[1.0]),
            Err(Error::Dimension { expected: 3, got: 1 })
        ));
    }

    /// Minimize `|u - v|^2` over a grid of the simplex with spacing `h`.
    fn grid_projection(v: &[f64], h: f64) -> Vec<f64> {
        let steps = (1.0 / h).round() as usize;
        let mut best = (f64::INFINITY, Vec::new());
        let mut consider = |u: Vec<f64>| {
            let d = vector::dist_sq(&u, v);
            if d < best.0 {
                best = (d, u);
            }
        };
        match v.len() {
            1 => consider(vec![1.0]),
            2 => {
                for i in 0..=steps {
                    let a = i as f64 * h;
                    consider(vec![a, 1.0 - a]);
                }
            }
            3 => {
                // Coarse pass, then a fine pass in a window around the coarse winner.
                let coarse: f64 = 1e-2;
                let cs = (1.0 / coarse).round() as usize;
                let mut anchor = (f64::INFINITY, 0.0, 0.0);
                for i in 0..=cs {
                    for j in 0..=(cs - i) {
                        let (a, b) = (i as f64 * coarse, j as f64 * coarse);
                        let d = vector::dist_sq(&[a, b, (1.0 - a - b).max(0.0)], v);
                        if d < anchor.0 {
                            anchor = (d, a, b);
                        }
                    }
                }
                let w = (2.0 * coarse / h).round() as i64;
                for i in -w..=w {
                    for j in -w..=w {
                        let a = anchor.1 + i as f64 * h;
                        let b = anchor.2 + j as f64 * h;
                        if a >= 0.0 && b >= 0.0 && a + b <= 1.0 + 1e-12 {
                            consider(vec![a, b, (1.0 - a - b).max(0.0)]);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        best.1
    }

    #[test]
    fn simplex_matches_fine_grid_in_two_dimensions() {
        let v = [2.0, 0.0];
        let brute = grid_projection(&v, 1e-4);
        let exact = ConstraintSet::Simplex { n: 2 }.project(&v).unwrap();
        assert!(vector::dist(&brute, &exact) < 1e-3);
    }

    fn set_strategy() -> impl Strategy<Value = ConstraintSet> {
        prop_oneof![
            (1usize..5).prop_flat_map(|n| {
                (
                    prop::collection::vec(-3.0..0.0f64, n),
                    prop::collection::vec(0.0..3.0f64, n),
                )
                    .prop_map(|(lower, upper)| ConstraintSet::Box { lower, upper })
            }),
            (1usize..5).prop_flat_map(|n| {
                (prop::collection::vec(-2.0..2.0f64, n), 0.1..4.0f64)
                    .prop_map(|(center, radius)| ConstraintSet::Ball { center, radius })
            }),
            (1usize..6).prop_map(|n| ConstraintSet::Simplex { n }),
        ]
    }

    fn set_and_points(k: usize) -> impl Strategy<Value = (ConstraintSet, Vec<Vec<f64>>)> {
        set_strategy().prop_flat_map(move |s| {
            let n = s.dim();
            (
                Just(s),
                prop::collection::vec(prop::collection::vec(-10.0..10.0f64, n), k),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn projection_is_idempotent((s, pts) in set_and_points(1)) {
            let p = s.project(&pts[0]).unwrap();
            let pp = s.project(&p).unwrap();
            prop_assert!(vector::dist(&p, &pp) <= 1e-12, "{:?} vs {:?}", p, pp);
        }

        #[test]
        fn projection_is_nonexpansive((s, pts) in set_and_points(2)) {
            let pu = s.project(&pts[0]).unwrap();
            let pv = s.project(&pts[1]).unwrap();
            prop_assert!(vector::dist(&pu, &pv) <= vector::dist(&pts[0], &pts[1]) + 1e-12);
        }

        #[test]
        fn projection_satisfies_variational_inequality((s, pts) in set_and_points(2)) {
            let v = &pts[0];
            let pv = s.project(v).unwrap();
            let u = s.project(&pts[1]).unwrap();
            let lhs = vector::dot(&vector::sub(v, &pv), &vector::sub(&u, &pv));
            prop_assert!(lhs <= 1e-10, "lhs = {}", lhs);
        }

        #[test]
        fn projection_lands_in_set((s, pts) in set_and_points(1)) {
            let p = s.project(&pts[0]).unwrap();
            prop_assert!(s.contains(&p, 1e-12).unwrap());
        }

        #[test]
        fn simplex_matches_grid_brute_force(v in prop::collection::vec(-2.0..2.0f64, 1..=3)) {
            let brute = grid_projection(&v, 1e-4);
            let exact = ConstraintSet::Simplex { n: v.len() }.project(&v).unwrap();
            prop_assert!(vector::dist(&brute, &exact) <= 1e-3);
        }
    }
}
