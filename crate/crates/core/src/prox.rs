//! Convex terms with closed-form proximal operators.
//!
//! `prox(γ, x) = argmin_u f(u) + ‖u − x‖² / (2γ)`.

use alloc::format;
use alloc::vec::Vec;

use crate::dense::{Cholesky, Matrix};
use crate::error::{check_len, Error, Result};
use crate::set::ConvexSet;
use crate::vector::{dist, norm, norm_sq, sqrt, sub};

#[derive(Debug, Clone, PartialEq)]
pub enum ProxKind {
    Zero,
    /// `⟨q, u⟩`
    Linear(Vec<f64>),
    /// `(κ/2)‖u‖²`
    SquaredL2(f64),
    /// `κ‖u‖₁`
    L1(f64),
    /// `(κ₁/2)‖u‖² + κ₂‖u‖₁`
    Elastic { kappa1: f64, kappa2: f64 },
    /// `‖u‖₂`
    L2Norm,
    BoxIndicator { lo: Vec<f64>, hi: Vec<f64> },
    SetIndicator(ConvexSet),
    /// `½uᵀQu + qᵀu`, `Q` symmetric positive semidefinite.
    Quadratic { q_mat: Matrix, q: Vec<f64> },
}

/// A convex term `u ↦ φ(u − center)` with strong-convexity modulus `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxFunction {
    kind: ProxKind,
    center: Option<Vec<f64>>,
    mu: f64,
    lip: Option<f64>,
}

fn invalid(name: &'static str, reason: &str) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

fn nonneg(name: &'static str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(name, "must be finite and nonnegative"))
    }
}

impl ProxFunction {
    fn with_kind(kind: ProxKind, mu: f64) -> Self {
        ProxFunction {
            kind,
            center: None,
            mu,
            lip: None,
        }
    }

    pub fn zero() -> Self {
        Self::with_kind(ProxKind::Zero, 0.0)
    }

    pub fn linear(q: Vec<f64>) -> Self {
        Self::with_kind(ProxKind::Linear(q), 0.0)
    }

    pub fn squared_l2(kappa: f64) -> Result<Self> {
        let k = nonneg("kappa", kappa)?;
        Ok(Self::with_kind(ProxKind::SquaredL2(k), k))
    }

    pub fn l1(kappa: f64) -> Result<Self> {
        Ok(Self::with_kind(ProxKind::L1(nonneg("kappa", kappa)?), 0.0))
    }

    pub fn elastic(kappa1: f64, kappa2: f64) -> Result<Self> {
        let k1 = nonneg("kappa1", kappa1)?;
        let k2 = nonneg("kappa2", kappa2)?;
        Ok(Self::with_kind(ProxKind::Elastic { kappa1: k1, kappa2: k2 }, k1))
    }

    pub fn l2_norm() -> Self {
        Self::with_kind(ProxKind::L2Norm, 0.0)
    }

    pub fn box_indicator(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        // Reuse the set validation.
        match ConvexSet::new_box(lo, hi)? {
            ConvexSet::Box { lo, hi } => Ok(Self::with_kind(ProxKind::BoxIndicator { lo, hi }, 0.0)),
            _ => unreachable!(),
        }
    }

    pub fn set_indicator(set: ConvexSet) -> Self {
        Self::with_kind(ProxKind::SetIndicator(set), 0.0)
    }

    /// `mu` is the caller-supplied smallest eigenvalue of `Q` (zero when unknown).
    pub fn quadratic(q_mat: Matrix, q: Vec<f64>, mu: f64) -> Result<Self> {
        if !q_mat.is_square() {
            return Err(invalid("q_mat", "must be square"));
        }
        check_len("ProxFunction::quadratic", q_mat.rows(), q.len())?;
        if !q_mat.is_symmetric(1e-12 * (1.0 + q_mat.data().iter().fold(0.0, |m: f64, v| m.max(v.abs())))) {
            return Err(invalid("q_mat", "must be symmetric"));
        }
        Ok(Self::with_kind(ProxKind::Quadratic { q_mat, q }, nonneg("mu", mu)?))
    }

    /// Shifts the argument: the result evaluates `φ(u − center)`.
    pub fn centered(mut self, center: Vec<f64>) -> Self {
        self.center = Some(center);
        self
    }

    /// Overrides the Lipschitz constant of the function value.
    pub fn with_lipschitz(mut self, lip: f64) -> Self {
        self.lip = Some(lip);
        self
    }

    pub fn kind(&self) -> &ProxKind {
        &self.kind
    }

    pub fn center(&self) -> Option<&[f64]> {
        self.center.as_deref()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self.kind, ProxKind::BoxIndicator { .. } | ProxKind::SetIndicator(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ProxKind::Zero)
    }

    /// Lipschitz constant of the value on `ℝ^dim`, when finite and known.
    pub fn lipschitz(&self, dim: usize) -> Option<f64> {
        if self.lip.is_some() {
            return self.lip;
        }
        match &self.kind {
            ProxKind::Zero => Some(0.0),
            ProxKind::Linear(q) => Some(norm(q)),
            ProxKind::L1(k) => Some(k * sqrt(dim as f64)),
            ProxKind::L2Norm => Some(1.0),
            _ => None,
        }
    }

    /// Dimension fixed by the parameters, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match &self.kind {
            ProxKind::Linear(q) => Some(q.len()),
            ProxKind::BoxIndicator { lo, .. } => Some(lo.len()),
            ProxKind::SetIndicator(s) => Some(s.dim()),
            ProxKind::Quadratic { q, .. } => Some(q.len()),
            _ => self.center.as_ref().map(Vec::len),
        }
    }

    fn check_dim(&self, ctx: &'static str, n: usize) -> Result<()> {
        if let Some(d) = self.fixed_dim() {
            check_len(ctx, d, n)?;
        }
        if let Some(c) = &self.center {
            check_len(ctx, c.len(), n)?;
        }
        Ok(())
    }

    fn shifted<'a>(&self, u: &'a [f64]) -> alloc::borrow::Cow<'a, [f64]> {
        match &self.center {
            Some(c) => alloc::borrow::Cow::Owned(sub(u, c)),
            None => alloc::borrow::Cow::Borrowed(u),
        }
    }

    /// Function value; indicators return `+∞` outside their set (with a small
    /// absolute tolerance for rounding).
    pub fn value(&self, u: &[f64]) -> Result<f64> {
        self.check_dim("ProxFunction::value", u.len())?;
        let v = self.shifted(u);
        Ok(match &self.kind {
            ProxKind::BoxIndicator { lo, hi } => {
                let tol = 1e-12;
                if v.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| *x >= a - tol && *x <= b + tol) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxKind::SetIndicator(s) => {
                if s.dist(&v)? <= 1e-12 * (1.0 + norm(&v)) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            _ => self.smooth_value(&v),
        })
    }

    /// Like [`value`](Self::value) but indicators contribute zero. Used to
    /// report objectives of methods whose iterates are only asymptotically
    /// feasible; feasibility is then reported separately.
    pub fn value_relaxed(&self, u: &[f64]) -> Result<f64> {
        self.check_dim("ProxFunction::value_relaxed", u.len())?;
        let v = self.shifted(u);
        Ok(match &self.kind {
            ProxKind::BoxIndicator { .. } | ProxKind::SetIndicator(_) => 0.0,
            _ => self.smooth_value(&v),
        })
    }

    fn smooth_value(&self, v: &[f64]) -> f64 {
        let l1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
        match &self.kind {
            ProxKind::Zero => 0.0,
            ProxKind::Linear(q) => q.iter().zip(v).map(|(a, b)| a * b).sum(),
            ProxKind::SquaredL2(k) => 0.5 * k * norm_sq(v),
            ProxKind::L1(k) => k * l1(v),
            ProxKind::Elastic { kappa1, kappa2 } => 0.5 * kappa1 * norm_sq(v) + kappa2 * l1(v),
            ProxKind::L2Norm => norm(v),
            ProxKind::Quadratic { q_mat, q } => {
                0.5 * q_mat.quad_form(v) + q.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
            }
            ProxKind::BoxIndicator { .. } | ProxKind::SetIndicator(_) => 0.0,
        }
    }

    pub fn prox(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.prox_with(&mut ProxCache::default(), gamma, x)
    }

    /// `prox` that reuses `cache` for the quadratic kind's factorization.
    pub fn prox_with(&self, cache: &mut ProxCache, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("prox parameter must be positive and finite, got {gamma}"),
            });
        }
        self.check_dim("ProxFunction::prox", x.len())?;
        let v = self.shifted(x);
        let mut out = self.prox_base(cache, gamma, &v)?;
        if let Some(c) = &self.center {
            out.iter_mut().zip(c).for_each(|(o, ci)| *o += ci);
        }
        Ok(out)
    }

    fn prox_base(&self, cache: &mut ProxCache, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        Ok(match &self.kind {
            ProxKind::Zero => x.to_vec(),
            ProxKind::Linear(q) => x.iter().zip(q).map(|(a, b)| a - gamma * b).collect(),
            ProxKind::SquaredL2(k) => x.iter().map(|a| a / (1.0 + gamma * k)).collect(),
            ProxKind::L1(k) => x.iter().map(|a| soft_threshold(*a, gamma * k)).collect(),
            ProxKind::Elastic { kappa1, kappa2 } => x
                .iter()
                .map(|a| soft_threshold(*a, gamma * kappa2) / (1.0 + gamma * kappa1))
                .collect(),
            ProxKind::L2Norm => {
                let n = norm(x);
                if n <= gamma {
                    alloc::vec![0.0; x.len()]
                } else {
                    let s = 1.0 - gamma / n;
                    x.iter().map(|a| a * s).collect()
                }
            }
            ProxKind::BoxIndicator { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (a, b))| v.max(*a).min(*b))
                .collect(),
            ProxKind::SetIndicator(s) => s.project(x)?,
            ProxKind::Quadratic { q_mat, q } => {
                let rhs: Vec<f64> = x.iter().zip(q).map(|(a, b)| a - gamma * b).collect();
                cache.factor(q_mat, gamma)?.solve(&rhs)
            }
        })
    }

    /// Prox of `γ f*` through the Moreau identity `x − γ prox_{f/γ}(x/γ)`.
    pub fn conj_prox(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.conj_prox_with(&mut ProxCache::default(), gamma, x)
    }

    pub fn conj_prox_with(&self, cache: &mut ProxCache, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("prox parameter must be positive and finite, got {gamma}"),
            });
        }
        let xs: Vec<f64> = x.iter().map(|v| v / gamma).collect();
        let p = self.prox_with(cache, 1.0 / gamma, &xs)?;
        Ok(x.iter().zip(&p).map(|(a, b)| a - gamma * b).collect())
    }

    /// Distance of `u` to the prox fixed-point set: `‖u − prox_{f}(u + g)‖`
    /// for a candidate subgradient `g ∈ ∂f(u)`.
    pub fn subgradient_residual(&self, u: &[f64], g: &[f64]) -> Result<f64> {
        let shifted: Vec<f64> = u.iter().zip(g).map(|(a, b)| a + b).collect();
        Ok(dist(u, &self.prox(1.0, &shifted)?))
    }
}

#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Single-slot cache of the `(I + γQ)` Cholesky factor, keyed by `γ`.
/// Owned by one run, so no synchronization is needed.
#[derive(Debug, Default, Clone)]
pub struct ProxCache {
    slot: Option<(u64, Cholesky)>,
    factorizations: usize,
}

impl ProxCache {
    fn factor(&mut self, q_mat: &Matrix, gamma: f64) -> Result<&Cholesky> {
        let key = gamma.to_bits();
        let hit = matches!(&self.slot, Some((k, c)) if *k == key && c.dim() == q_mat.rows());
        if !hit {
            let m = q_mat.shifted(gamma, 1.0);
            self.slot = Some((key, Cholesky::factor(&m)?));
            self.factorizations += 1;
        }
        Ok(&self.slot.as_ref().expect("slot filled above").1)
    }

    pub fn factorizations(&self) -> usize {
        self.factorizations
    }
}
