//! Linear maps with adjoints and largest-singular-value estimates.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::Matrix;
use crate::error::{check_len, Error, Result};
use crate::vector::{norm, norm_sq};

/// Multiplicative safety margin applied to every norm estimate so that step
/// sizes derived from it stay on the safe side.
pub const NORM_SAFETY: f64 = 1.0 + 1e-6;

const POWER_MAX_ITERS: usize = 10_000;
const POWER_TOL: f64 = 1e-9;
const POWER_SEED: u64 = 0x0b5e_55ed;

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Dense(Matrix),
    Identity,
    ScaledIdentity(f64),
    Negated(Box<LinearMap>),
    /// Keeps the listed output rows of `inner`.
    RowSubsample {
        indices: Vec<usize>,
        inner: Box<LinearMap>,
    },
    /// Forward differences of a row-major `height x width` image. Output is the
    /// vertical differences followed by the horizontal ones; the last row
    /// (resp. column) difference is zero.
    DiffStencil2D { height: usize, width: usize },
    /// `outer ∘ inner`
    Compose(Box<LinearMap>, Box<LinearMap>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    kind: MapKind,
}

impl LinearMap {
    pub fn dense(m: Matrix) -> Self {
        LinearMap {
            rows: m.rows(),
            cols: m.cols(),
            kind: MapKind::Dense(m),
        }
    }

    pub fn identity(n: usize) -> Self {
        LinearMap {
            rows: n,
            cols: n,
            kind: MapKind::Identity,
        }
    }

    pub fn scaled_identity(n: usize, alpha: f64) -> Self {
        LinearMap {
            rows: n,
            cols: n,
            kind: MapKind::ScaledIdentity(alpha),
        }
    }

    pub fn negated(inner: LinearMap) -> Self {
        LinearMap {
            rows: inner.rows,
            cols: inner.cols,
            kind: MapKind::Negated(Box::new(inner)),
        }
    }

    pub fn row_subsample(indices: Vec<usize>, inner: LinearMap) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= inner.rows) {
            return Err(Error::InvalidParameter {
                name: "indices",
                reason: format!("row {bad} out of range for a map with {} rows", inner.rows),
            });
        }
        Ok(LinearMap {
            rows: indices.len(),
            cols: inner.cols,
            kind: MapKind::RowSubsample {
                indices,
                inner: Box::new(inner),
            },
        })
    }

    pub fn diff_stencil_2d(height: usize, width: usize) -> Self {
        let n = height * width;
        LinearMap {
            rows: 2 * n,
            cols: n,
            kind: MapKind::DiffStencil2D { height, width },
        }
    }

    pub fn compose(outer: LinearMap, inner: LinearMap) -> Result<Self> {
        check_len("LinearMap::compose", outer.cols, inner.rows)?;
        Ok(LinearMap {
            rows: outer.rows,
            cols: inner.cols,
            kind: MapKind::Compose(Box::new(outer), Box::new(inner)),
        })
    }

    /// Scalar multiple `alpha * self`, folded into the simplest representation.
    pub fn scaled(self, alpha: f64) -> Self {
        match self.kind {
            MapKind::Identity => LinearMap::scaled_identity(self.rows, alpha),
            MapKind::ScaledIdentity(beta) => LinearMap::scaled_identity(self.rows, alpha * beta),
            _ if alpha == 1.0 => self,
            _ if alpha == -1.0 => LinearMap::negated(self),
            _ => {
                let s = LinearMap::scaled_identity(self.rows, alpha);
                // Dimensions agree by construction.
                LinearMap::compose(s, self).expect("scaled: matching dimensions")
            }
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    /// `Some(alpha)` when the map is `alpha * I`.
    pub fn as_scaled_identity(&self) -> Option<f64> {
        match &self.kind {
            MapKind::Identity => Some(1.0),
            MapKind::ScaledIdentity(a) => Some(*a),
            MapKind::Negated(inner) => inner.as_scaled_identity().map(|a| -a),
            _ => None,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("LinearMap::apply", self.cols, x.len())?;
        Ok(self.apply_unchecked(x))
    }

    pub fn adjoint_apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len("LinearMap::adjoint_apply", self.rows, u.len())?;
        Ok(self.adjoint_unchecked(u))
    }

    fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            MapKind::Dense(m) => m.matvec(x),
            MapKind::Identity => x.to_vec(),
            MapKind::ScaledIdentity(a) => x.iter().map(|v| a * v).collect(),
            MapKind::Negated(inner) => inner.apply_unchecked(x).into_iter().map(|v| -v).collect(),
            MapKind::RowSubsample { indices, inner } => {
                let full = inner.apply_unchecked(x);
                indices.iter().map(|&i| full[i]).collect()
            }
            MapKind::DiffStencil2D { height, width } => stencil_forward(*height, *width, x),
            MapKind::Compose(outer, inner) => outer.apply_unchecked(&inner.apply_unchecked(x)),
        }
    }

    fn adjoint_unchecked(&self, u: &[f64]) -> Vec<f64> {
        match &self.kind {
            MapKind::Dense(m) => m.matvec_t(u),
            MapKind::Identity => u.to_vec(),
            MapKind::ScaledIdentity(a) => u.iter().map(|v| a * v).collect(),
            MapKind::Negated(inner) => inner.adjoint_unchecked(u).into_iter().map(|v| -v).collect(),
            MapKind::RowSubsample { indices, inner } => {
                let mut full = vec![0.0; inner.rows];
                for (&i, v) in indices.iter().zip(u) {
                    full[i] += v;
                }
                inner.adjoint_unchecked(&full)
            }
            MapKind::DiffStencil2D { height, width } => stencil_adjoint(*height, *width, u),
            MapKind::Compose(outer, inner) => inner.adjoint_unchecked(&outer.adjoint_unchecked(u)),
        }
    }

    /// Squared spectral norm `‖M‖²`, inflated by [`NORM_SAFETY`].
    ///
    /// Identity-like maps and the difference stencil use their known spectra;
    /// everything else runs power iteration on `MᵀM` from a fixed seeded start.
    pub fn op_norm_sq(&self) -> Result<f64> {
        Ok(self.exact_norm_sq()? * NORM_SAFETY)
    }

    fn exact_norm_sq(&self) -> Result<f64> {
        match &self.kind {
            MapKind::Identity => Ok(if self.rows == 0 { 0.0 } else { 1.0 }),
            MapKind::ScaledIdentity(a) => Ok(if self.rows == 0 { 0.0 } else { a * a }),
            MapKind::Negated(inner) => inner.exact_norm_sq(),
            MapKind::DiffStencil2D { height, width } => Ok(stencil_norm_sq(*height, *width)),
            _ => power_iteration(self).map(|r| r.value),
        }
    }

    /// Materializes the map column by column.
    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        let mut e = vec![0.0; self.cols];
        for j in 0..self.cols {
            e[j] = 1.0;
            let col = self.apply_unchecked(&e);
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, *v);
            }
            e[j] = 0.0;
        }
        m
    }
}

fn stencil_forward(h: usize, w: usize, x: &[f64]) -> Vec<f64> {
    let n = h * w;
    let mut out = vec![0.0; 2 * n];
    for i in 0..h {
        for j in 0..w {
            let p = i * w + j;
            if i + 1 < h {
                out[p] = x[p + w] - x[p];
            }
            if j + 1 < w {
                out[n + p] = x[p + 1] - x[p];
            }
        }
    }
    out
}

fn stencil_adjoint(h: usize, w: usize, u: &[f64]) -> Vec<f64> {
    let n = h * w;
    let mut out = vec![0.0; n];
    for i in 0..h {
        for j in 0..w {
            let p = i * w + j;
            if i + 1 < h {
                out[p + w] += u[p];
                out[p] -= u[p];
            }
            if j + 1 < w {
                out[p + 1] += u[n + p];
                out[p] -= u[n + p];
            }
        }
    }
    out
}

/// Largest eigenvalue of `DᵀD` for the Neumann forward-difference stencil:
/// the path-graph Laplacian spectra `4 sin²(πk/(2m))` add across the two axes.
fn stencil_norm_sq(h: usize, w: usize) -> f64 {
    let axis = |m: usize| {
        if m <= 1 {
            0.0
        } else {
            let s = libm::sin(PI * (m - 1) as f64 / (2.0 * m as f64));
            4.0 * s * s
        }
    };
    axis(h) + axis(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationResult {
    pub value: f64,
    pub iterations: usize,
}

/// Power iteration on `MᵀM`. Stops when the eigen-residual drops below
/// `1e-9 θ`, or when the Rayleigh quotient (monotone for this iteration) stops
/// moving while the residual is already small.
pub fn power_iteration(map: &LinearMap) -> Result<PowerIterationResult> {
    if map.rows == 0 || map.cols == 0 {
        return Ok(PowerIterationResult {
            value: 0.0,
            iterations: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v: Vec<f64> = (0..map.cols).map(|_| rng.random::<f64>() - 0.5).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|e| *e /= nv);
    let mut theta = 0.0;
    for it in 1..=POWER_MAX_ITERS {
        let gv = map.adjoint_unchecked(&map.apply_unchecked(&v));
        let next: f64 = gv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let gnorm = norm(&gv);
        if gnorm == 0.0 {
            return Ok(PowerIterationResult {
                value: 0.0,
                iterations: it,
            });
        }
        let resid_sq = (norm_sq(&gv) - next * next).max(0.0);
        let resid = libm::sqrt(resid_sq);
        let stalled = (next - theta).abs() <= 1e-15 * next && resid <= 1e-5 * next;
        theta = next;
        if resid <= POWER_TOL * theta || stalled {
            return Ok(PowerIterationResult {
                value: theta,
                iterations: it,
            });
        }
        v = gv.into_iter().map(|e| e / gnorm).collect();
    }
    Err(Error::NoConvergence {
        iterations: POWER_MAX_ITERS,
        rayleigh: theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::dot;
    use rand_distr::{Distribution, StandardNormal};

    fn randn(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    }

    fn seeded_dense(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_row_major(rows, cols, randn(&mut rng, rows * cols)).unwrap()
    }

    /// Cyclic Jacobi eigenvalue sweep for a symmetric matrix.
    fn jacobi_eigenvalues(m: &Matrix) -> Vec<f64> {
        let n = m.rows();
        let mut a = m.clone();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a.get(p, q) * a.get(p, q);
                }
            }
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / libm::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        (0..n).map(|i| a.get(i, i)).collect()
    }

    fn all_kinds() -> Vec<LinearMap> {
        let d = LinearMap::dense(seeded_dense(7, 5, 3));
        vec![
            LinearMap::identity(6),
            LinearMap::scaled_identity(4, -2.5),
            LinearMap::negated(d.clone()),
            LinearMap::row_subsample(vec![0, 3, 6], d.clone()).unwrap(),
            LinearMap::diff_stencil_2d(4, 5),
            LinearMap::compose(LinearMap::dense(seeded_dense(3, 7, 4)), d.clone()).unwrap(),
            d,
        ]
    }

    #[test]
    fn identity_and_dense_products() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(LinearMap::identity(3).apply(&x).unwrap(), x.to_vec());
        assert_eq!(LinearMap::identity(3).adjoint_apply(&x).unwrap(), x.to_vec());
        let m = LinearMap::dense(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
        assert_eq!(m.apply(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        assert_eq!(m.adjoint_apply(&[1.0, 0.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn stencil_kills_constant_image() {
        let d = LinearMap::diff_stencil_2d(4, 4);
        assert!(d.apply(&[2.5; 16]).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn row_subsample_adjoint_scatters() {
        let s = LinearMap::row_subsample(vec![0, 2], LinearMap::identity(3)).unwrap();
        assert_eq!(s.adjoint_apply(&[5.0, 7.0]).unwrap(), vec![5.0, 0.0, 7.0]);
        assert!(LinearMap::row_subsample(vec![3], LinearMap::identity(3)).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = LinearMap::identity(3).apply(&[1.0, 2.0]).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                context: "LinearMap::apply",
                expected: 3,
                actual: 2
            }
        );
        assert!(LinearMap::identity(3).adjoint_apply(&[1.0]).is_err());
    }

    #[test]
    fn adjoint_consistency_for_every_kind() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in all_kinds() {
            for _ in 0..100 {
                let x = randn(&mut rng, m.cols());
                let u = randn(&mut rng, m.rows());
                let lhs = dot(&m.apply(&x).unwrap(), &u);
                let rhs = dot(&x, &m.adjoint_apply(&u).unwrap());
                assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + norm(&x) * norm(&u)));
            }
        }
    }

    #[test]
    fn norm_dominates_probe_ratios() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for m in all_kinds() {
            let l = m.op_norm_sq().unwrap();
            for _ in 0..50 {
                let x = randn(&mut rng, m.cols());
                let ratio = norm_sq(&m.apply(&x).unwrap()) / norm_sq(&x);
                assert!(l >= ratio - 1e-8);
            }
        }
    }

    #[test]
    fn compose_is_sequential_application() {
        let n = LinearMap::dense(seeded_dense(4, 3, 1));
        let m = LinearMap::dense(seeded_dense(2, 4, 2));
        let c = LinearMap::compose(m.clone(), n.clone()).unwrap();
        let x = [0.3, -1.2, 2.0];
        assert_eq!(c.apply(&x).unwrap(), m.apply(&n.apply(&x).unwrap()).unwrap());
        assert!(LinearMap::compose(n, m).is_err());
    }

    #[test]
    fn closed_form_norms() {
        let id = LinearMap::identity(5).op_norm_sq().unwrap();
        assert_eq!(id, NORM_SAFETY);
        let d = LinearMap::dense(Matrix::diag(&[1.0, 2.0, 3.0])).op_norm_sq().unwrap();
        assert!((d - 9.0 * NORM_SAFETY).abs() <= 1e-8 * 9.0);
        assert_eq!(LinearMap::dense(Matrix::zeros(3, 2)).op_norm_sq().unwrap(), 0.0);
    }

    #[test]
    fn power_iteration_matches_jacobi_oracle() {
        let m = seeded_dense(5, 4, 2024);
        let gram = m.transpose().matmul(&m).unwrap();
        let top = jacobi_eigenvalues(&gram)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let est = power_iteration(&LinearMap::dense(m)).unwrap().value;
        assert!((est - top).abs() <= 1e-7 * top, "{est} vs {top}");
    }

    #[test]
    fn stencil_norm_matches_power_iteration_and_bound() {
        for (h, w) in [(1, 1), (2, 3), (5, 4), (8, 8)] {
            let s = LinearMap::diff_stencil_2d(h, w);
            let closed = s.op_norm_sq().unwrap();
            assert!(closed <= 8.0);
            let generic = LinearMap::compose(LinearMap::identity(2 * h * w), s).unwrap();
            let est = power_iteration(&generic).unwrap().value * NORM_SAFETY;
            assert!((closed - est).abs() <= 1e-7 * closed.max(1.0), "{h}x{w}: {closed} vs {est}");
        }
    }

    #[test]
    fn scaled_folds_identity() {
        let m = LinearMap::identity(3).scaled(-1.0);
        assert_eq!(m.as_scaled_identity(), Some(-1.0));
        assert_eq!(LinearMap::negated(LinearMap::identity(2)).as_scaled_identity(), Some(-1.0));
        let d = LinearMap::dense(Matrix::identity(2)).scaled(3.0);
        assert_eq!(d.apply(&[1.0, 2.0]).unwrap(), vec![3.0, 6.0]);
    }
}
