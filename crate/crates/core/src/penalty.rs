//! Quadratic penalty `ψ(x, y) = ½ dist_K(Ax + By − c)²`, its gradients, the
//! shifted variant used by restarting, and the penalty certificate bounds.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::linop::LinearMap;
use crate::set::ConvexSet;
use crate::vector::{norm, norm_sq, sqrt, sub};

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    a: LinearMap,
    b: LinearMap,
    c: Vec<f64>,
    k: ConvexSet,
}

/// Value and gradients of the (possibly shifted) penalty at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiEval {
    pub value: f64,
    /// `s = w − proj_K(w)` with `w = Ax + By − c + λ⁰/ρ`.
    pub s: Vec<f64>,
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
}

/// Two-sided bounds on `F(z) − F*` and an upper bound on `dist_K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub obj_lower: f64,
    pub obj_upper: f64,
    pub feas_upper: f64,
    pub dist: f64,
    pub radicand: f64,
}

impl PenaltySpec {
    pub fn new(a: LinearMap, b: LinearMap, c: Vec<f64>, k: ConvexSet) -> Result<Self> {
        let n = c.len();
        check_len("PenaltySpec: rows of A", n, a.rows())?;
        check_len("PenaltySpec: rows of B", n, b.rows())?;
        check_len("PenaltySpec: dimension of K", n, k.dim())?;
        Ok(PenaltySpec { a, b, c, k })
    }

    pub fn a(&self) -> &LinearMap {
        &self.a
    }

    pub fn b(&self) -> &LinearMap {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn set(&self) -> &ConvexSet {
        &self.k
    }

    pub fn dim_x(&self) -> usize {
        self.a.cols()
    }

    pub fn dim_y(&self) -> usize {
        self.b.cols()
    }

    pub fn dim_constraint(&self) -> usize {
        self.c.len()
    }

    /// `Ax + By − c`
    pub fn residual(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let ax = self.a.apply(x)?;
        let by = self.b.apply(y)?;
        Ok(ax
            .iter()
            .zip(&by)
            .zip(&self.c)
            .map(|((p, q), r)| p + q - r)
            .collect())
    }

    /// `dist_K(Ax + By − c)`
    pub fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.k.dist(&self.residual(x, y)?)
    }

    /// Penalty evaluated from a precomputed residual `r`. Returns `(value, s)`.
    pub fn psi_at_residual(&self, r: &[f64], rho: f64, lambda0: Option<&[f64]>) -> Result<(f64, Vec<f64>)> {
        check_rho(rho)?;
        let w: Vec<f64> = match lambda0 {
            Some(l) => {
                check_len("PenaltySpec: shift length", self.c.len(), l.len())?;
                r.iter().zip(l).map(|(a, b)| a + b / rho).collect()
            }
            None => r.to_vec(),
        };
        let s = grad_phi(&self.k, &w)?;
        Ok((0.5 * norm_sq(&s), s))
    }

    /// Value and both partial gradients of `ψ` (shifted by `λ⁰/ρ` when given).
    pub fn psi_val_grad(&self, rho: f64, x: &[f64], y: &[f64], lambda0: Option<&[f64]>) -> Result<PsiEval> {
        let r = self.residual(x, y)?;
        let (value, s) = self.psi_at_residual(&r, rho, lambda0)?;
        let grad_x = self.a.adjoint_apply(&s)?;
        let grad_y = self.b.adjoint_apply(&s)?;
        Ok(PsiEval {
            value,
            s,
            grad_x,
            grad_y,
        })
    }

    /// Bounds from the unshifted penalty: with `S = F(z) + ρψ(z) − F*`,
    /// `−‖λ*‖ d ≤ F(z) − F* ≤ S − (ρ/2)d²` and
    /// `d ≤ (‖λ*‖ + √(‖λ*‖² + 2ρS)) / ρ`.
    pub fn certificate_bounds(
        &self,
        rho: f64,
        f_of_z: f64,
        f_star: f64,
        lambda_star_norm: f64,
        x: &[f64],
        y: &[f64],
    ) -> Result<Certificate> {
        check_rho(rho)?;
        let d = self.dist(x, y)?;
        certificate_from_dist(rho, f_of_z, f_star, lambda_star_norm, d)
    }
}

pub fn certificate_from_dist(rho: f64, f_of_z: f64, f_star: f64, lambda_star_norm: f64, d: f64) -> Result<Certificate> {
    check_rho(rho)?;
    let s_rho = f_of_z + 0.5 * rho * d * d - f_star;
    let radicand = lambda_star_norm * lambda_star_norm + 2.0 * rho * s_rho;
    if radicand < -1e-10 {
        return Err(Error::BrokenInvariant(format!(
            "negative certificate radicand {radicand}: F* or ‖λ*‖ inconsistent with the problem"
        )));
    }
    Ok(Certificate {
        obj_lower: -lambda_star_norm * d,
        obj_upper: s_rho - 0.5 * rho * d * d,
        feas_upper: (lambda_star_norm + sqrt(radicand.max(0.0))) / rho,
        dist: d,
        radicand,
    })
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "rho",
            reason: format!("penalty parameter must be positive and finite, got {rho}"),
        })
    }
}

/// `∇φ(u) = u − proj_K(u)` for `φ = ½ dist_K²`.
pub fn grad_phi(k: &ConvexSet, u: &[f64]) -> Result<Vec<f64>> {
    Ok(sub(u, &k.project(u)?))
}

/// `φ(u) = ½ dist_K(u)²`
pub fn phi(k: &ConvexSet, u: &[f64]) -> Result<f64> {
    Ok(0.5 * norm_sq(&grad_phi(k, u)?))
}

/// Convenience: `‖grad_phi(u)‖`.
pub fn dist_to(k: &ConvexSet, u: &[f64]) -> Result<f64> {
    Ok(norm(&grad_phi(k, u)?))
}
