//! Problem containers: the constrained template and the composite form
//! `min f(Ly) + g(y) + h(y)`.

use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::linop::LinearMap;
use crate::penalty::PenaltySpec;
use crate::prox::ProxFunction;
use crate::set::ConvexSet;
use crate::vector::{norm, norm_sq, sub};

/// Smooth term `h(y) = ½‖My − b‖²` with gradient Lipschitz constant `lip`
/// and strong-convexity modulus `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothTerm {
    op: LinearMap,
    b: Vec<f64>,
    lip: f64,
    mu: f64,
}

impl SmoothTerm {
    /// `lip` is taken from the operator norm estimate; `mu` must be supplied
    /// by the caller (zero when unknown).
    pub fn least_squares(op: LinearMap, b: Vec<f64>, mu: f64) -> Result<Self> {
        check_len("SmoothTerm::least_squares", op.rows(), b.len())?;
        let lip = op.op_norm_sq()?;
        Ok(SmoothTerm { op, b, lip, mu })
    }

    pub fn op(&self) -> &LinearMap {
        &self.op
    }

    pub fn data(&self) -> &[f64] {
        &self.b
    }

    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn value(&self, y: &[f64]) -> Result<f64> {
        Ok(0.5 * norm_sq(&sub(&self.op.apply(y)?, &self.b)))
    }

    pub fn grad(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.op.adjoint_apply(&sub(&self.op.apply(y)?, &self.b))
    }
}

/// Closed-form solvers for the x-subproblem
/// `argmin_x f(x) + ρ ψ(x, ŷ; λ⁰) + (γ/2)‖x − x̂‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XSolver {
    /// `A = αI`, `K = {0}`: a single prox of `f`.
    ScaledIdentity { alpha: f64 },
}

/// Reference solution. `lambda_norm` may be an upper bound when the exact
/// multiplier is unavailable; `f_star_err` is the error bar on `f_star`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub f_star: f64,
    pub f_star_err: f64,
    pub x_star: Option<Vec<f64>>,
    pub y_star: Option<Vec<f64>>,
    pub lambda_star: Option<Vec<f64>>,
    pub lambda_norm: f64,
    pub exact: bool,
}

impl Reference {
    pub fn exact(f_star: f64, x_star: Vec<f64>, y_star: Vec<f64>, lambda_star: Vec<f64>) -> Self {
        let lambda_norm = norm(&lambda_star);
        Reference {
            f_star,
            f_star_err: 0.0,
            x_star: Some(x_star),
            y_star: Some(y_star),
            lambda_star: Some(lambda_star),
            lambda_norm,
            exact: true,
        }
    }
}

/// How the benchmark reports constraint violation next to `dist_K`.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityMetric {
    /// `dist_K(Ax + By − c)`
    Distance,
    /// `(‖max(By − b, 0)‖ + ‖min(By − a, 0)‖) / max(‖a‖, ‖b‖)`
    RelativeBox { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub f: ProxFunction,
    pub g: ProxFunction,
    pub h: Option<SmoothTerm>,
    pub penalty: PenaltySpec,
    pub x_solver: Option<XSolver>,
    pub reference: Option<Reference>,
    pub feasibility: FeasibilityMetric,
    /// `‖A‖²`, `‖B‖²` as used by every step size.
    pub a_norm_sq: f64,
    pub b_norm_sq: f64,
    pub seed: u64,
}

impl ProblemInstance {
    pub fn new(f: ProxFunction, g: ProxFunction, penalty: PenaltySpec) -> Result<Self> {
        if let Some(d) = f.fixed_dim() {
            check_len("ProblemInstance: f dimension", penalty.dim_x(), d)?;
        }
        if let Some(d) = g.fixed_dim() {
            check_len("ProblemInstance: g dimension", penalty.dim_y(), d)?;
        }
        let a_norm_sq = penalty.a().op_norm_sq()?;
        let b_norm_sq = penalty.b().op_norm_sq()?;
        let x_solver = match (penalty.a().as_scaled_identity(), penalty.set()) {
            (Some(alpha), ConvexSet::SingletonZero(_)) if alpha != 0.0 => Some(XSolver::ScaledIdentity { alpha }),
            _ => None,
        };
        Ok(ProblemInstance {
            f,
            g,
            h: None,
            penalty,
            x_solver,
            reference: None,
            feasibility: FeasibilityMetric::Distance,
            a_norm_sq,
            b_norm_sq,
            seed: 0,
        })
    }

    pub fn with_smooth(mut self, h: SmoothTerm) -> Result<Self> {
        check_len("ProblemInstance: h dimension", self.penalty.dim_y(), h.op().cols())?;
        self.h = Some(h);
        Ok(self)
    }

    pub fn with_reference(mut self, r: Reference) -> Self {
        self.reference = Some(r);
        self
    }

    /// Replaces the `‖B‖²` estimate, e.g. with an exactly known value.
    pub fn with_b_norm_sq(mut self, v: f64) -> Self {
        self.b_norm_sq = v;
        self
    }

    pub fn dim_x(&self) -> usize {
        self.penalty.dim_x()
    }

    pub fn dim_y(&self) -> usize {
        self.penalty.dim_y()
    }

    /// `F(z) = f(x) + g(y) + h(y)`
    pub fn objective(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let mut v = self.f.value(x)? + self.g.value(y)?;
        if let Some(h) = &self.h {
            v += h.value(y)?;
        }
        Ok(v)
    }

    pub fn smooth_grad(&self, y: &[f64]) -> Result<Option<Vec<f64>>> {
        self.h.as_ref().map(|h| h.grad(y)).transpose()
    }

    pub fn reported_feasibility(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match &self.feasibility {
            FeasibilityMetric::Distance => self.penalty.dist(x, y),
            FeasibilityMetric::RelativeBox { lo, hi } => relative_box_violation(&self.penalty.b().apply(y)?, lo, hi),
        }
    }

    /// Exact x-step: `argmin_x f(x) + ρψ(x, ŷ; λ⁰) + (γ/2)‖x − x̂‖²`.
    pub fn solve_x(
        &self,
        x_hat: &[f64],
        y_hat: &[f64],
        rho: f64,
        gamma: f64,
        lambda0: Option<&[f64]>,
        cache: &mut crate::prox::ProxCache,
    ) -> Result<Vec<f64>> {
        let Some(solver) = self.x_solver else {
            return Err(Error::Config("exact x-step requested but the problem has no x-solver".into()));
        };
        match solver {
            XSolver::ScaledIdentity { alpha } => {
                // v = Bŷ − c + λ⁰/ρ; minimize f(x) + (ρ/2)‖αx + v‖² + (γ/2)‖x − x̂‖².
                let by = self.penalty.b().apply(y_hat)?;
                let mut v: Vec<f64> = by.iter().zip(self.penalty.c()).map(|(a, b)| a - b).collect();
                if let Some(l) = lambda0 {
                    v.iter_mut().zip(l).for_each(|(vi, li)| *vi += li / rho);
                }
                let denom = rho * alpha * alpha + gamma;
                let arg: Vec<f64> = x_hat
                    .iter()
                    .zip(&v)
                    .map(|(xh, vi)| (gamma * xh - rho * alpha * vi) / denom)
                    .collect();
                self.f.prox_with(cache, 1.0 / denom, &arg)
            }
        }
    }

    /// Composite view `min f(Ly) + g(y) + h(y)` for `A = αI`, `K = {0}`:
    /// `x = (c − By)/α`, so `L = −B/α` and `f` is recentred at `c/α`.
    pub fn as_composite(&self) -> Result<CompositeProblem> {
        let alpha = match (self.x_solver, self.penalty.set()) {
            (Some(XSolver::ScaledIdentity { alpha }), ConvexSet::SingletonZero(_)) => alpha,
            _ => return Err(Error::Config("composite view needs A = αI and K = {0}".into())),
        };
        let l = self.penalty.b().clone().scaled(-1.0 / alpha);
        let shift: Vec<f64> = self.penalty.c().iter().map(|v| v / alpha).collect();
        let f = compose_center(&self.f, &shift);
        let l_norm_sq = self.b_norm_sq / (alpha * alpha);
        Ok(CompositeProblem {
            f,
            g: self.g.clone(),
            h: self.h.clone(),
            l,
            l_norm_sq,
        })
    }
}

/// `u ↦ f(u + shift)` expressed through the centre field.
fn compose_center(f: &ProxFunction, shift: &[f64]) -> ProxFunction {
    if shift.iter().all(|v| *v == 0.0) {
        return f.clone();
    }
    let old = f.center().map(<[f64]>::to_vec).unwrap_or_else(|| alloc::vec![0.0; shift.len()]);
    let new: Vec<f64> = old.iter().zip(shift).map(|(a, s)| a - s).collect();
    f.clone().centered(new)
}

pub fn relative_box_violation(by: &[f64], lo: &[f64], hi: &[f64]) -> Result<f64> {
    check_len("relative_box_violation", lo.len(), by.len())?;
    let over: f64 = by.iter().zip(hi).map(|(v, b)| { let d = (v - b).max(0.0); d * d }).sum();
    let under: f64 = by.iter().zip(lo).map(|(v, a)| { let d = (v - a).min(0.0); d * d }).sum();
    let scale = norm(lo).max(norm(hi)).max(f64::MIN_POSITIVE);
    Ok((libm::sqrt(over) + libm::sqrt(under)) / scale)
}

/// `min f(Ly) + g(y) + h(y)`, the shape used by the composite schemes and the
/// baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeProblem {
    pub f: ProxFunction,
    pub g: ProxFunction,
    pub h: Option<SmoothTerm>,
    pub l: LinearMap,
    pub l_norm_sq: f64,
}

impl CompositeProblem {
    pub fn new(f: ProxFunction, g: ProxFunction, l: LinearMap) -> Result<Self> {
        let l_norm_sq = l.op_norm_sq()?;
        Ok(CompositeProblem {
            f,
            g,
            h: None,
            l,
            l_norm_sq,
        })
    }

    pub fn with_smooth(mut self, h: SmoothTerm) -> Self {
        self.h = Some(h);
        self
    }

    pub fn with_l_norm_sq(mut self, v: f64) -> Self {
        self.l_norm_sq = v;
        self
    }

    pub fn dim(&self) -> usize {
        self.l.cols()
    }

    /// `P(y) = f(Ly) + g(y) + h(y)`
    pub fn objective(&self, y: &[f64]) -> Result<f64> {
        let mut v = self.f.value(&self.l.apply(y)?)? + self.g.value(y)?;
        if let Some(h) = &self.h {
            v += h.value(y)?;
        }
        Ok(v)
    }

    /// Objective with indicator terms dropped.
    pub fn objective_relaxed(&self, y: &[f64]) -> Result<f64> {
        let mut v = self.f.value_relaxed(&self.l.apply(y)?)? + self.g.value_relaxed(y)?;
        if let Some(h) = &self.h {
            v += h.value(y)?;
        }
        Ok(v)
    }

    /// Template form with `x = Ly`: `A = −I`, `B = L`, `c = 0`, `K = {0}`.
    pub fn to_template(&self) -> Result<ProblemInstance> {
        let n = self.l.rows();
        let spec = PenaltySpec::new(
            LinearMap::identity(n).scaled(-1.0),
            self.l.clone(),
            alloc::vec![0.0; n],
            ConvexSet::SingletonZero(n),
        )?;
        let mut p = ProblemInstance::new(self.f.clone(), self.g.clone(), spec)?;
        p.h = self.h.clone();
        p.a_norm_sq = 1.0;
        p.b_norm_sq = self.l_norm_sq;
        Ok(p)
    }
}
