//! Single iterations of the non-strong and semi-strong methods.

use alloc::vec::Vec;

use super::schedule::{nonstrong_params, tau_next, tighter_tau_rho_next};
use super::{Resolved, SmoothCase, SolverConfig, SolverState, TauRule, Variant, Workspace, XMode, YOption};
use crate::error::{Error, Result};
use crate::penalty::PsiEval;
use crate::problem::ProblemInstance;
use crate::prox::{ProxCache, ProxFunction};
use crate::vector::{extrapolate, lerp};

/// Quantities of one step that restarting and the diagnostics need.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub x_hat_used: Vec<f64>,
    pub y_hat_used: Vec<f64>,
    pub rho_used: f64,
    pub tau_used: f64,
    pub gamma_used: f64,
    /// `ŝ^{k+1}` of the unshifted penalty at `(x^{k+1}, ŷ^k)`.
    pub s_hat: Vec<f64>,
    /// Same with the shift `λ⁰/ρ` included.
    pub s_hat_shifted: Vec<f64>,
}

/// One step of the configured method; advances `state` in place.
pub fn iterate(
    problem: &ProblemInstance,
    state: &mut SolverState,
    cfg: &SolverConfig,
    params: &Resolved,
    ws: &mut Workspace,
) -> Result<StepInfo> {
    match cfg.variant {
        Variant::NonStrong => papa_iterate(problem, state, cfg, params, ws),
        Variant::SemiStrong => scvx_iterate(problem, state, cfg, params, ws),
    }
}

/// `prox_{g/β}(center − grad/β)`
fn prox_grad_step(g: &ProxFunction, cache: &mut ProxCache, center: &[f64], grad: &[f64], beta: f64) -> Result<Vec<f64>> {
    let arg: Vec<f64> = center.iter().zip(grad).map(|(c, d)| c - d / beta).collect();
    g.prox_with(cache, 1.0 / beta, &arg)
}

/// `∇h(at) + ρ∇_yψ`, or just `ρ∇_yψ` without a smooth term.
fn y_gradient(problem: &ProblemInstance, at: &[f64], rho: f64, grad_y: &[f64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = grad_y.iter().map(|v| rho * v).collect();
    if let Some(gh) = problem.smooth_grad(at)? {
        out.iter_mut().zip(&gh).for_each(|(o, h)| *o += h);
    }
    Ok(out)
}

fn unshifted_s(problem: &ProblemInstance, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let r = problem.penalty.residual(x, y)?;
    Ok(problem.penalty.psi_at_residual(&r, 1.0, None)?.1)
}

/// Exact x-step at `(x̂, ŷ)`; returns `x^{k+1}` and `ψ` data at `(x^{k+1}, ŷ)`.
fn exact_x(
    problem: &ProblemInstance,
    state: &SolverState,
    y_hat: &[f64],
    rho: f64,
    gamma: f64,
    ws: &mut Workspace,
) -> Result<(Vec<f64>, PsiEval)> {
    let lam = state.lambda0.as_deref();
    let x = problem.solve_x(&state.x_hat, y_hat, rho, gamma, lam, &mut ws.f_cache)?;
    let ev = problem.penalty.psi_val_grad(rho, &x, y_hat, lam)?;
    Ok((x, ev))
}

/// Non-strongly convex step at inner index `j`: alternating x/y updates with
/// momentum `j/(j+2)`, or the parallel linearized form.
pub fn papa_iterate(
    problem: &ProblemInstance,
    state: &mut SolverState,
    cfg: &SolverConfig,
    params: &Resolved,
    ws: &mut Workspace,
) -> Result<StepInfo> {
    let (tau, rho, gamma) = (state.tau, state.rho, state.gamma);
    let lam = state.lambda0.clone();
    let y_hat = state.y_hat.clone();
    let (x_new, grad_y, ev_new) = match cfg.x_mode {
        XMode::Exact => {
            let (x, ev) = exact_x(problem, state, &y_hat, rho, gamma, ws)?;
            (x, ev.grad_y.clone(), ev)
        }
        XMode::Linearized => {
            let ev0 = problem.penalty.psi_val_grad(rho, &state.x_hat, &y_hat, lam.as_deref())?;
            let gamma_hat = rho * params.a_norm_sq + gamma;
            let arg: Vec<f64> = state
                .x_hat
                .iter()
                .zip(&ev0.grad_x)
                .map(|(x, g)| x - rho / gamma_hat * g)
                .collect();
            let x = problem.f.prox_with(&mut ws.f_cache, 1.0 / gamma_hat, &arg)?;
            let ev = problem.penalty.psi_val_grad(rho, &x, &y_hat, lam.as_deref())?;
            (x, ev0.grad_y, ev)
        }
    };
    let beta = rho * params.b_norm_sq + params.l_h;
    let grad = y_gradient(problem, &y_hat, rho, &grad_y)?;
    let y_new = prox_grad_step(&problem.g, &mut ws.g_cache, &y_hat, &grad, beta)?;

    let info = StepInfo {
        x_hat_used: state.x_hat.clone(),
        s_hat: if lam.is_some() { unshifted_s(problem, &x_new, &y_hat)? } else { ev_new.s.clone() },
        s_hat_shifted: ev_new.s,
        y_hat_used: y_hat,
        rho_used: rho,
        tau_used: tau,
        gamma_used: gamma,
    };

    if cfg.accelerated {
        let j = state.j as f64;
        let m = j / (j + 2.0);
        state.x_tilde = extrapolate(&state.x_tilde, 1.0 / tau, &x_new, &state.x_hat);
        state.y_tilde = extrapolate(&state.y_tilde, 1.0 / tau, &y_new, &state.y_hat);
        state.x_hat = extrapolate(&x_new, m, &x_new, &state.x);
        state.y_hat = extrapolate(&y_new, m, &y_new, &state.y);
    } else {
        state.x_tilde = x_new.clone();
        state.y_tilde = y_new.clone();
        state.x_hat = x_new.clone();
        state.y_hat = y_new.clone();
    }
    state.x = x_new;
    state.y = y_new;
    state.j += 1;
    state.k += 1;
    let (t, r, g) = nonstrong_params(state.j, params.rho0, params.gamma0);
    state.tau = t;
    state.rho = r;
    state.gamma = g;
    Ok(info)
}

/// Semi-strongly convex step: `ŷ = (1−τ)y + τỹ`, exact x-step with `γ₀`,
/// prox step on `ỹ`, then averaging (Option 1) or a second prox step
/// (Option 2) for `y`.
pub fn scvx_iterate(
    problem: &ProblemInstance,
    state: &mut SolverState,
    cfg: &SolverConfig,
    params: &Resolved,
    ws: &mut Workspace,
) -> Result<StepInfo> {
    if cfg.x_mode != XMode::Exact {
        return Err(Error::Config("the semi-strong method needs the exact x-step".into()));
    }
    let (tau, rho) = (state.tau, state.rho);
    let gamma = params.gamma0;
    let b2 = params.b_norm_sq;
    let y_hat = lerp(tau, &state.y, &state.y_tilde);
    let (x_new, ev) = exact_x(problem, state, &y_hat, rho, gamma, ws)?;

    let (tau_new, rho_new) = match cfg.tau_rule {
        TauRule::Standard => {
            let t = tau_next(tau)?;
            (t, rho / (1.0 - t))
        }
        TauRule::Tighter => tighter_tau_rho_next(tau, rho, params.mu_g, b2)?,
    };

    let (beta_tilde, h_at) = match (&problem.h, cfg.smooth_case) {
        (None, _) => (rho * b2, &y_hat),
        (Some(_), SmoothCase::StrongG) => (rho * b2 + params.l_h, &y_hat),
        (Some(_), SmoothCase::StrongH) => (rho * b2 + params.l_h / tau, &state.y_tilde),
    };
    let grad_tilde = y_gradient(problem, h_at, rho, &ev.grad_y)?;
    let y_tilde_new = prox_grad_step(&problem.g, &mut ws.g_cache, &state.y_tilde, &grad_tilde, tau * beta_tilde)?;
    let y_new = match cfg.option {
        YOption::Averaging => lerp(tau, &state.y, &y_tilde_new),
        YOption::Proximal => {
            let beta = rho * b2 + params.l_h;
            let grad = y_gradient(problem, &y_hat, rho, &ev.grad_y)?;
            prox_grad_step(&problem.g, &mut ws.g_cache, &y_hat, &grad, beta)?
        }
    };

    let info = StepInfo {
        x_hat_used: state.x_hat.clone(),
        s_hat: if state.lambda0.is_some() { unshifted_s(problem, &x_new, &y_hat)? } else { ev.s.clone() },
        s_hat_shifted: ev.s,
        y_hat_used: y_hat.clone(),
        rho_used: rho,
        tau_used: tau,
        gamma_used: gamma,
    };

    state.x_tilde = extrapolate(&state.x_tilde, 1.0 / tau, &x_new, &state.x_hat);
    state.x_hat = extrapolate(&x_new, tau_new * (1.0 - tau) / tau, &x_new, &state.x);
    state.y_hat = y_hat;
    state.y_tilde = y_tilde_new;
    state.x = x_new;
    state.y = y_new;
    state.tau = tau_new;
    state.rho = rho_new;
    state.gamma = gamma;
    state.j += 1;
    state.k += 1;
    Ok(info)
}
