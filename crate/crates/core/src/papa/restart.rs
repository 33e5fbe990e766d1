//! Restarting with a shifted penalty.

use serde::{Deserialize, Serialize};

use super::step::StepInfo;
use super::{Resolved, SolverState};
use crate::error::Result;
use crate::problem::ProblemInstance;

/// How the shift `λ⁰` moves at a restart. Both use
/// `w = Ax^{k+1} + Bŷ^k − c + λ⁰/ρ` and `s = w − proj_K(w)` at the last step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftUpdate {
    /// `λ⁰ ← ρs`, the method-of-multipliers estimate (`λ⁰ + ρr` for `K = {0}`).
    Replace,
    /// `λ⁰ ← λ⁰ + ρs` (`2λ⁰ + ρr` for `K = {0}`).
    Accumulate,
}

/// New shift from the last step's `ŝ` (shifted) and `ρ`.
pub fn shift_increment(lambda0: Option<&[f64]>, s_shifted: &[f64], rho: f64, mode: ShiftUpdate) -> alloc::vec::Vec<f64> {
    match (mode, lambda0) {
        (ShiftUpdate::Accumulate, Some(l)) => l.iter().zip(s_shifted).map(|(l, s)| l + rho * s).collect(),
        _ => s_shifted.iter().map(|s| rho * s).collect(),
    }
}

/// Updates `λ⁰` and resets `ρ ← ρ₀`, `τ ← 1`, `γ ← γ₀`, `ẑ ← z`, `z̃ ← z`.
pub fn restart(
    _problem: &ProblemInstance,
    state: &mut SolverState,
    info: &StepInfo,
    params: &Resolved,
    mode: ShiftUpdate,
) -> Result<()> {
    let lam = shift_increment(state.lambda0.as_deref(), &info.s_hat_shifted, info.rho_used, mode);
    state.lambda0 = Some(lam);
    state.rho = params.rho0;
    state.tau = 1.0;
    state.gamma = params.gamma0;
    state.j = 0;
    state.x_hat = state.x.clone();
    state.x_tilde = state.x.clone();
    state.y_hat = state.y.clone();
    state.y_tilde = state.y.clone();
    Ok(())
}
