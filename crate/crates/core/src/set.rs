//! Closed convex sets with Euclidean projections.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::vector::{dist, norm};

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    /// `{0} ⊂ ℝⁿ`
    SingletonZero(usize),
    Box { lo: Vec<f64>, hi: Vec<f64> },
    NonnegOrthant(usize),
    /// `{(t, x) : ‖x‖ ≤ t} ⊂ ℝⁿ`, the first coordinate is `t`.
    SecondOrderCone(usize),
}

impl ConvexSet {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_len("ConvexSet::new_box", lo.len(), hi.len())?;
        if let Some(i) = lo.iter().zip(&hi).position(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidParameter {
                name: "box",
                reason: format!("lower bound exceeds upper bound at index {i}"),
            });
        }
        Ok(ConvexSet::Box { lo, hi })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::SingletonZero(n) | ConvexSet::NonnegOrthant(n) | ConvexSet::SecondOrderCone(n) => *n,
            ConvexSet::Box { lo, .. } => lo.len(),
        }
    }

    pub fn is_cone(&self) -> bool {
        !matches!(self, ConvexSet::Box { .. })
    }

    pub fn project(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len("ConvexSet::project", self.dim(), u.len())?;
        Ok(self.project_unchecked(u))
    }

    pub(crate) fn project_unchecked(&self, u: &[f64]) -> Vec<f64> {
        match self {
            ConvexSet::SingletonZero(n) => alloc::vec![0.0; *n],
            ConvexSet::Box { lo, hi } => u
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (a, b))| v.max(*a).min(*b))
                .collect(),
            ConvexSet::NonnegOrthant(_) => u.iter().map(|v| v.max(0.0)).collect(),
            ConvexSet::SecondOrderCone(n) => {
                if *n == 0 {
                    return Vec::new();
                }
                let t = u[0];
                let xn = norm(&u[1..]);
                if xn <= t {
                    u.to_vec()
                } else if xn <= -t {
                    alloc::vec![0.0; *n]
                } else {
                    let a = 0.5 * (t + xn);
                    let mut out = Vec::with_capacity(*n);
                    out.push(a);
                    out.extend(u[1..].iter().map(|v| a * v / xn));
                    out
                }
            }
        }
    }

    pub fn dist(&self, u: &[f64]) -> Result<f64> {
        Ok(dist(u, &self.project(u)?))
    }

    pub fn contains(&self, u: &[f64], tol: f64) -> Result<bool> {
        Ok(self.dist(u)? <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{dot, sub};
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sets() -> Vec<ConvexSet> {
        vec![
            ConvexSet::SingletonZero(3),
            ConvexSet::new_box(vec![-1.0, 0.0, 2.0], vec![1.0, 0.0, 5.0]).unwrap(),
            ConvexSet::NonnegOrthant(3),
            ConvexSet::SecondOrderCone(3),
        ]
    }

    #[test]
    fn worked_projections() {
        let b = ConvexSet::new_box(vec![-1.0; 2], vec![1.0; 2]).unwrap();
        assert_eq!(b.project(&[0.5, -0.3]).unwrap(), vec![0.5, -0.3]);
        assert_eq!(ConvexSet::SingletonZero(2).project(&[2.0, -7.0]).unwrap(), vec![0.0, 0.0]);
        let soc = ConvexSet::SecondOrderCone(3);
        assert_eq!(soc.project(&[-1.0, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(soc.project(&[0.0, 1.0, 0.0]).unwrap(), vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn worked_distances() {
        assert_eq!(ConvexSet::SingletonZero(2).dist(&[3.0, 4.0]).unwrap(), 5.0);
        let unit = ConvexSet::new_box(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(unit.dist(&[2.0]).unwrap(), 1.0);
        assert_eq!(unit.dist(&[0.25]).unwrap(), 0.0);
        assert!(ConvexSet::SecondOrderCone(3).contains(&[2.0, 1.0, 1.0], 0.0).unwrap());
    }

    #[test]
    fn rejects_inverted_box_and_bad_dims() {
        assert!(ConvexSet::new_box(vec![1.0], vec![0.0]).is_err());
        assert!(ConvexSet::NonnegOrthant(2).project(&[1.0]).is_err());
    }

    /// Brute-force projection onto the 3-D cone: minimize over a polar grid of
    /// boundary points `(r, r cos θ, r sin θ)` and the apex.
    fn soc_grid_projection(u: &[f64]) -> Vec<f64> {
        let mut best = vec![0.0; 3];
        let mut best_d = norm(u);
        if norm(&u[1..]) <= u[0] {
            return u.to_vec();
        }
        for i in 0..=4000 {
            let theta = 2.0 * core::f64::consts::PI * i as f64 / 4000.0;
            let (c, s) = (libm::cos(theta), libm::sin(theta));
            // Optimal r along this ray in closed form, clamped at 0.
            let dir = [1.0, c, s];
            let r = (dot(u, &dir) / 2.0).max(0.0);
            let p = [r, r * c, r * s];
            let d = dist(u, &p);
            if d < best_d {
                best_d = d;
                best = p.to_vec();
            }
        }
        best
    }

    #[test]
    fn soc_projection_matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let soc = ConvexSet::SecondOrderCone(3);
        for _ in 0..50 {
            let u: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let p = soc.project(&u).unwrap();
            let g = soc_grid_projection(&u);
            assert!(dist(&p, &g) < 5e-3, "{u:?}: {p:?} vs {g:?}");
            assert!(dist(&u, &p) <= dist(&u, &g) + 1e-12);
        }
    }

    #[test]
    fn projection_idempotent_and_firmly_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for s in sets() {
            for _ in 0..100 {
                let u: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
                let v: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
                let pu = s.project(&u).unwrap();
                assert!(dist(&s.project(&pu).unwrap(), &pu) <= 1e-14 * (1.0 + norm(&pu)));
                let pv = s.project(&v).unwrap();
                let dp = sub(&pu, &pv);
                assert!(dot(&dp, &dp) <= dot(&dp, &sub(&u, &v)) + 1e-12);
            }
        }
    }
}
