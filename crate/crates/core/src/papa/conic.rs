//! Conic programs `min ⟨q, y⟩ s.t. 𝓑y + x = c, x ∈ 𝒞` with the non-strong
//! method written out in closed form.

use alloc::vec::Vec;

use super::step::StepInfo;
use super::{drive, Clock, ConvergenceTrace, Resolved, SolverConfig, SolverState, Variant, Workspace};
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::prox::ProxKind;
use crate::set::ConvexSet;
use crate::vector::{extrapolate, zeros};

/// The cone and the linear cost extracted from a conic instance.
#[derive(Debug, Clone, Copy)]
pub struct ConicView<'a> {
    pub cone: &'a ConvexSet,
    /// `None` means `q = 0`.
    pub q: Option<&'a [f64]>,
}

/// Checks `f = δ_𝒞` (a cone), `g = ⟨q, ·⟩`, `A = I`, `K = {0}`.
pub fn conic_view(problem: &ProblemInstance) -> Result<ConicView<'_>> {
    let bad = |what: &str| Err(Error::Config(alloc::format!("conic driver: {what}")));
    if problem.penalty.a().as_scaled_identity() != Some(1.0) {
        return bad("A must be the identity");
    }
    if !matches!(problem.penalty.set(), ConvexSet::SingletonZero(_)) {
        return bad("K must be {0}");
    }
    if problem.h.is_some() {
        return bad("no smooth term allowed");
    }
    if problem.f.center().is_some() || problem.g.center().is_some() {
        return bad("f and g must not be recentred");
    }
    let cone = match problem.f.kind() {
        ProxKind::SetIndicator(s) if s.is_cone() => s,
        _ => return bad("f must be the indicator of a cone"),
    };
    let q = match problem.g.kind() {
        ProxKind::Linear(q) => Some(q.as_slice()),
        ProxKind::Zero => None,
        _ => return bad("g must be linear"),
    };
    Ok(ConicView { cone, q })
}

/// `x⁺ = proj_𝒞(c − 𝓑ŷ)` (minus `λ⁰/ρ` after a restart), `y⁺ = ŷ − (q + ρ𝓑*(x⁺ + 𝓑ŷ − c))/(ρ‖𝓑‖²)`,
/// then momentum `j/(j+2)` on both blocks.
pub fn conic_iterate(problem: &ProblemInstance, view: &ConicView<'_>, state: &mut SolverState, params: &Resolved) -> Result<StepInfo> {
    let b = problem.penalty.b();
    let c = problem.penalty.c();
    let rho = state.rho;
    let by = b.apply(&state.y_hat)?;
    let mut arg: Vec<f64> = c.iter().zip(&by).map(|(c, v)| c - v).collect();
    if let Some(l) = &state.lambda0 {
        arg.iter_mut().zip(l).for_each(|(a, l)| *a -= l / rho);
    }
    let x_new = view.cone.project(&arg)?;
    // Shifted residual; λ⁰ enters exactly as in the generic step.
    let mut w: Vec<f64> = x_new.iter().zip(&by).zip(c).map(|((x, v), c)| x + v - c).collect();
    let s_hat = w.clone();
    if let Some(l) = &state.lambda0 {
        w.iter_mut().zip(l).for_each(|(w, l)| *w += l / rho);
    }
    let bt = b.adjoint_apply(&w)?;
    let q = view.q.map_or_else(|| zeros(bt.len()), <[f64]>::to_vec);
    let denom = rho * params.b_norm_sq;
    let y_new: Vec<f64> = state
        .y_hat
        .iter()
        .zip(&q)
        .zip(&bt)
        .map(|((y, q), g)| y - (q + rho * g) / denom)
        .collect();

    let info = StepInfo {
        x_hat_used: state.x_hat.clone(),
        y_hat_used: state.y_hat.clone(),
        rho_used: rho,
        tau_used: state.tau,
        gamma_used: 0.0,
        s_hat,
        s_hat_shifted: w,
    };
    let tau = state.tau;
    let j = state.j as f64;
    let m = j / (j + 2.0);
    state.x_tilde = extrapolate(&state.x_tilde, 1.0 / tau, &x_new, &state.x_hat);
    state.y_tilde = extrapolate(&state.y_tilde, 1.0 / tau, &y_new, &state.y_hat);
    state.x_hat = extrapolate(&x_new, m, &x_new, &state.x);
    state.y_hat = extrapolate(&y_new, m, &y_new, &state.y);
    state.x = x_new;
    state.y = y_new;
    state.j += 1;
    state.k += 1;
    let (t, r, _) = super::schedule::nonstrong_params(state.j, params.rho0, 0.0);
    state.tau = t;
    state.rho = r;
    state.gamma = 0.0;
    Ok(info)
}

/// Runs the conic driver. Only `rho0`, `max_iters`, `restart_period` and
/// `shift_update` of `cfg` are used.
pub fn run(problem: &ProblemInstance, cfg: &SolverConfig, clock: &dyn Clock) -> Result<ConvergenceTrace> {
    let view = conic_view(problem)?;
    let cfg = SolverConfig {
        variant: Variant::NonStrong,
        gamma0: 0.0,
        record_diagnostics: false,
        ..cfg.clone()
    };
    let params = cfg.resolve(problem)?;
    let state = SolverState::zeros(problem, &params);
    drive(problem, &cfg, &params, state, clock, |st: &mut SolverState, _ws: &mut Workspace| {
        conic_iterate(problem, &view, st, &params)
    })
}
