//! Per-iteration checks of the descent inequalities behind the rate proofs.
//!
//! Every field is a slack `rhs − lhs`; a correct step keeps all of them
//! nonnegative up to rounding.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::step::StepInfo;
use super::{Resolved, SolverState, Variant};
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::vector::{dot, norm_sq, sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRecord {
    /// Index of the step, `z^k → z^{k+1}`.
    pub k: usize,
    /// `−½‖ŝ^{k+1}‖² − ℓ_k(z*)`
    pub ell_star: f64,
    /// `ψ(z^k) − ½‖s^k − ŝ^{k+1}‖² − ℓ_k(z^k)`
    pub ell_iterate: f64,
    /// `Q_k(y^{k+1}) − ψ(x^{k+1}, y^{k+1})`
    pub quad_upper: f64,
    /// Right side minus left side of the per-step energy estimate.
    pub key_estimate: f64,
    /// `1 + |F*|`, the scale for slack tolerances.
    pub scale: f64,
}

impl DiagnosticRecord {
    pub fn worst(&self) -> f64 {
        self.ell_star.min(self.ell_iterate).min(self.quad_upper).min(self.key_estimate)
    }

    /// Names of inequalities whose slack is below `−tol·scale`.
    pub fn violations(&self, tol: f64) -> Vec<String> {
        let lim = -tol * self.scale;
        let mut out = Vec::new();
        for (name, v) in [
            ("ell_star", self.ell_star),
            ("ell_iterate", self.ell_iterate),
            ("quad_upper", self.quad_upper),
            ("key_estimate", self.key_estimate),
        ] {
            if !(v >= lim) {
                out.push(format!("k={}: {name} slack {v:e}", self.k));
            }
        }
        out
    }
}

/// `ℓ_k(z) = ψ(x^{k+1}, ŷ) + ⟨Aᵀŝ, x − x^{k+1}⟩ + ⟨Bᵀŝ, y − ŷ⟩`
fn ell(problem: &ProblemInstance, s_hat: &[f64], x_new: &[f64], y_hat: &[f64], x: &[f64], y: &[f64]) -> Result<f64> {
    let gx = problem.penalty.a().adjoint_apply(s_hat)?;
    let gy = problem.penalty.b().adjoint_apply(s_hat)?;
    Ok(0.5 * norm_sq(s_hat) + dot(&gx, &sub(x, x_new)) + dot(&gy, &sub(y, y_hat)))
}

fn psi_and_s(problem: &ProblemInstance, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
    let r = problem.penalty.residual(x, y)?;
    problem.penalty.psi_at_residual(&r, 1.0, None)
}

/// Evaluates all inequalities for the step `prev → next`. `rho_prev` is
/// `ρ_{k−1}` (absent at the first step, where its coefficient vanishes).
pub fn evaluate(
    problem: &ProblemInstance,
    prev: &SolverState,
    next: &SolverState,
    info: &StepInfo,
    params: &Resolved,
    variant: Variant,
    rho_prev: Option<f64>,
) -> Result<DiagnosticRecord> {
    let reference = problem
        .reference
        .as_ref()
        .ok_or_else(|| Error::Config("diagnostics need a reference solution".into()))?;
    let (Some(xs), Some(ys)) = (reference.x_star.as_deref(), reference.y_star.as_deref()) else {
        return Err(Error::Config("diagnostics need x* and y*".into()));
    };
    let f_star = reference.f_star;
    let (tau, rho) = (info.tau_used, info.rho_used);
    let b2 = params.b_norm_sq;
    let s_hat = &info.s_hat;
    let y_hat = &info.y_hat_used;

    let (psi_k, s_k) = psi_and_s(problem, &prev.x, &prev.y)?;
    let ell_star = -0.5 * norm_sq(s_hat) - ell(problem, s_hat, &next.x, y_hat, xs, ys)?;
    let ell_iterate =
        psi_k - 0.5 * norm_sq(&sub(&s_k, s_hat)) - ell(problem, s_hat, &next.x, y_hat, &prev.x, &prev.y)?;

    let (psi_next, _) = psi_and_s(problem, &next.x, &next.y)?;
    let gy = problem.penalty.b().adjoint_apply(s_hat)?;
    let dy = sub(&next.y, y_hat);
    let q = 0.5 * norm_sq(s_hat) + dot(&gy, &dy) + 0.5 * b2 * norm_sq(&dy);
    let quad_upper = q - psi_next;

    let lhs = problem.objective(&next.x, &next.y)? + rho * psi_next;
    let (wx, mu) = match variant {
        Variant::NonStrong => (info.gamma_used * tau * tau, 0.0),
        Variant::SemiStrong => (params.gamma0 * tau * tau, problem.g.mu()),
    };
    let wy = rho * tau * tau * b2;
    let mut rhs = tau * f_star
        + 0.5 * wx * (norm_sq(&sub(&prev.x_tilde, xs)) - norm_sq(&sub(&next.x_tilde, xs)))
        + 0.5 * wy * norm_sq(&sub(&prev.y_tilde, ys))
        - 0.5 * (wy + mu * tau) * norm_sq(&sub(&next.y_tilde, ys));
    if let Some(rp) = rho_prev {
        let f_k = problem.objective(&prev.x, &prev.y)?;
        rhs += (1.0 - tau) * (f_k + rp * psi_k);
        rhs -= 0.5 * (1.0 - tau) * (rp - rho * (1.0 - tau)) * norm_sq(&s_k);
    }
    Ok(DiagnosticRecord {
        k: prev.k,
        ell_star,
        ell_iterate,
        quad_upper,
        key_estimate: rhs - lhs,
        scale: 1.0 + f_star.abs(),
    })
}
