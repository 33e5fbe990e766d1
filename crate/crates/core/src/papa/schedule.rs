//! Step-size schedules: `τ`, `ρ`, `γ` recurrences.

use alloc::format;

use crate::error::{Error, Result};
use crate::vector::sqrt;

/// `τ⁺ = (τ/2)(√(τ² + 4) − τ)`, the positive root of `τ⁺² = (1 − τ⁺)τ²`.
pub fn tau_next(tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: format!("expected 0 < tau <= 1, got {tau}"),
        });
    }
    Ok(0.5 * tau * (sqrt(tau * tau + 4.0) - tau))
}

/// Adaptive rule driven by `κ = μ_g/‖B‖²`: with
/// `s = √(τ_prev² + κ τ_prev / ρ_prev)`, returns `τ = s/(1+s)` and
/// `ρ = ρ_prev/(1 − τ)`, so that `ρτ²‖B‖²/(1−τ) = ρ_prev τ_prev² ‖B‖² + μ_g τ_prev`.
pub fn tighter_tau_rho_next(tau_prev: f64, rho_prev: f64, mu_g: f64, b_norm_sq: f64) -> Result<(f64, f64)> {
    if !(mu_g > 0.0) {
        return Err(Error::Config(format!(
            "the adaptive tau rule needs a positive strong-convexity modulus, got mu_g = {mu_g}"
        )));
    }
    if !(tau_prev > 0.0 && rho_prev > 0.0 && b_norm_sq > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tau_prev/rho_prev/b_norm_sq",
            reason: "must be positive".into(),
        });
    }
    let kappa = mu_g / b_norm_sq;
    let s = sqrt(tau_prev * tau_prev + kappa * tau_prev / rho_prev);
    let tau = s / (1.0 + s);
    Ok((tau, rho_prev / (1.0 - tau)))
}

/// Non-strongly convex schedule at inner index `j`:
/// `(τ, ρ, γ) = (1/(j+1), ρ₀(j+1), γ₀(j+1))`.
pub fn nonstrong_params(j: usize, rho0: f64, gamma0: f64) -> (f64, f64, f64) {
    let m = (j + 1) as f64;
    (1.0 / m, rho0 * m, gamma0 * m)
}
