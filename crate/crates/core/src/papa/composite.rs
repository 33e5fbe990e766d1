//! Schemes for `min f(By) + g(y)` obtained by eliminating `x = By` from the
//! penalty methods.
//!
//! | scheme        | x-part                         | schedule     |
//! |---------------|--------------------------------|--------------|
//! | `DrPlain`     | `prox_{f/ρ}(ŷ)`, `B = I`       | `ρ₀(k+1)`    |
//! | `DrScvx`      | `prox_{f/ρ}(ŷ)`, `B = I`       | `ρ₀/τ²`      |
//! | `LinopPlain`  | `prox_{f/ρ}(Bŷ)`               | `ρ₀(k+1)`    |
//! | `LinopScvx`   | `prox_{f/ρ}(Bŷ)`               | `ρ₀/τ²`      |
//! | `PdPlain`     | `prox_{ρf*}(ρBŷ)`              | `ρ₀(k+1)`    |
//! | `PdScvx`      | `prox_{ρf*}(ρBŷ)`              | `ρ₀/τ²`      |

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::schedule::{nonstrong_params, tau_next};
use super::{Clock, ConvergenceTrace, TraceRecord};
use crate::error::{Error, Result};
use crate::linop::MapKind;
use crate::problem::CompositeProblem;
use crate::prox::ProxCache;
use crate::vector::{extrapolate, lerp, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    DrPlain,
    DrScvx,
    LinopPlain,
    LinopScvx,
    PdPlain,
    PdScvx,
}

impl Scheme {
    pub fn is_scvx(self) -> bool {
        matches!(self, Scheme::DrScvx | Scheme::LinopScvx | Scheme::PdScvx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    pub k: usize,
    pub y: Vec<f64>,
    pub y_hat: Vec<f64>,
    pub y_tilde: Vec<f64>,
    pub tau: f64,
    pub rho: f64,
    /// Primal `x^{k}` of the last step (`prox_{f/ρ}` output, or its
    /// reconstruction `Bŷ − x̄/ρ` for the primal-dual forms).
    pub x: Vec<f64>,
    /// Dual `x̄^{k}` of the last step (primal-dual forms only).
    pub x_bar: Option<Vec<f64>>,
}

impl CompositeState {
    pub fn new(y0: Vec<f64>, x_dim: usize, rho0: f64) -> Self {
        CompositeState {
            k: 0,
            y_hat: y0.clone(),
            y_tilde: y0.clone(),
            y: y0,
            tau: 1.0,
            rho: rho0,
            x: alloc::vec![0.0; x_dim],
            x_bar: None,
        }
    }
}

#[derive(Debug, Default)]
pub struct CompositeWorkspace {
    f_cache: ProxCache,
    g_cache: ProxCache,
}

/// Default `ρ₀`: `1/‖B‖` for plain schemes, `μ_g/(2‖B‖²)` for the others.
pub fn default_rho0(problem: &CompositeProblem, scheme: Scheme) -> Result<f64> {
    if scheme.is_scvx() {
        let mu = problem.g.mu();
        if !(mu > 0.0) {
            return Err(Error::Config("accelerated composite schemes need a strongly convex g".into()));
        }
        Ok(mu / (2.0 * problem.l_norm_sq))
    } else {
        Ok(1.0 / sqrt(problem.l_norm_sq))
    }
}

fn check_shape(problem: &CompositeProblem, scheme: Scheme) -> Result<()> {
    if problem.h.is_some() {
        return Err(Error::Config("composite schemes do not take a smooth term".into()));
    }
    if matches!(scheme, Scheme::DrPlain | Scheme::DrScvx) && !matches!(problem.l.kind(), MapKind::Identity) {
        return Err(Error::Config("prox-prox schemes need L = I".into()));
    }
    if scheme.is_scvx() && !(problem.g.mu() > 0.0) {
        return Err(Error::Config("accelerated composite schemes need a strongly convex g".into()));
    }
    Ok(())
}

/// One step of `scheme`; advances `state` in place.
pub fn composite_step(
    problem: &CompositeProblem,
    scheme: Scheme,
    rho0: f64,
    state: &mut CompositeState,
    ws: &mut CompositeWorkspace,
) -> Result<()> {
    let (tau, rho) = (state.tau, state.rho);
    let b = &problem.l;
    let b2 = problem.l_norm_sq;
    let f = &problem.f;
    let g = &problem.g;
    match scheme {
        Scheme::DrPlain => {
            let x = f.prox_with(&mut ws.f_cache, 1.0 / rho, &state.y_hat)?;
            let y_new = g.prox_with(&mut ws.g_cache, 1.0 / rho, &x)?;
            state.x = x;
            plain_finish(state, y_new, rho0);
        }
        Scheme::LinopPlain => {
            let by = b.apply(&state.y_hat)?;
            let x = f.prox_with(&mut ws.f_cache, 1.0 / rho, &by)?;
            let btb = b.adjoint_apply(&by)?;
            let btx = b.adjoint_apply(&x)?;
            let arg: Vec<f64> = state
                .y_hat
                .iter()
                .zip(&btb)
                .zip(&btx)
                .map(|((y, a), p)| y - a / b2 + p / b2)
                .collect();
            let y_new = g.prox_with(&mut ws.g_cache, 1.0 / (b2 * rho), &arg)?;
            state.x = x;
            plain_finish(state, y_new, rho0);
        }
        Scheme::PdPlain => {
            let by = b.apply(&state.y_hat)?;
            let x_bar = f.conj_prox_with(&mut ws.f_cache, rho, &scaled(rho, &by))?;
            let btx = b.adjoint_apply(&x_bar)?;
            let arg: Vec<f64> = state.y_hat.iter().zip(&btx).map(|(y, p)| y - p / (rho * b2)).collect();
            let y_new = g.prox_with(&mut ws.g_cache, 1.0 / (rho * b2), &arg)?;
            state.x = by.iter().zip(&x_bar).map(|(v, xb)| v - xb / rho).collect();
            state.x_bar = Some(x_bar);
            plain_finish(state, y_new, rho0);
        }
        Scheme::DrScvx => {
            let y_hat = lerp(tau, &state.y, &state.y_tilde);
            let x = f.prox_with(&mut ws.f_cache, 1.0 / rho, &y_hat)?;
            let arg: Vec<f64> = x
                .iter()
                .zip(&state.y)
                .map(|(p, y)| p / tau - (1.0 - tau) / tau * y)
                .collect();
            let yt = g.prox_with(&mut ws.g_cache, 1.0 / (tau * rho), &arg)?;
            let y_new = lerp(tau, &state.y, &yt);
            state.x = x;
            state.y_hat = y_hat;
            state.y_tilde = yt;
            state.y = y_new;
            scvx_advance(state, rho0)?;
        }
        Scheme::LinopScvx => {
            let by = b.apply(&state.y_hat)?;
            let x = f.prox_with(&mut ws.f_cache, 1.0 / rho, &by)?;
            let d: Vec<f64> = by.iter().zip(&x).map(|(v, p)| v - p).collect();
            let btd = b.adjoint_apply(&d)?;
            let arg: Vec<f64> = state
                .y_tilde
                .iter()
                .zip(&btd)
                .map(|(y, p)| y - p / (tau * b2))
                .collect();
            let yt = g.prox_with(&mut ws.g_cache, 1.0 / (tau * rho * b2), &arg)?;
            state.x = x;
            scvx_finish(state, yt, rho0)?;
        }
        Scheme::PdScvx => {
            let by = b.apply(&state.y_hat)?;
            let x_bar = f.conj_prox_with(&mut ws.f_cache, rho, &scaled(rho, &by))?;
            let btx = b.adjoint_apply(&x_bar)?;
            let arg: Vec<f64> = state
                .y_tilde
                .iter()
                .zip(&btx)
                .map(|(y, p)| y - p / (tau * rho * b2))
                .collect();
            let yt = g.prox_with(&mut ws.g_cache, 1.0 / (tau * rho * b2), &arg)?;
            state.x = by.iter().zip(&x_bar).map(|(v, xb)| v - xb / rho).collect();
            state.x_bar = Some(x_bar);
            scvx_finish(state, yt, rho0)?;
        }
    }
    Ok(())
}

fn scaled(a: f64, v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| a * x).collect()
}

fn plain_finish(state: &mut CompositeState, y_new: Vec<f64>, rho0: f64) {
    let j = state.k as f64;
    state.y_hat = extrapolate(&y_new, j / (j + 2.0), &y_new, &state.y);
    state.y = y_new;
    state.k += 1;
    let (t, r, _) = nonstrong_params(state.k, rho0, 0.0);
    state.tau = t;
    state.rho = r;
}

/// Averaging and the `τ⁺(1−τ)/τ` extrapolation on `y`.
fn scvx_finish(state: &mut CompositeState, y_tilde_new: Vec<f64>, rho0: f64) -> Result<()> {
    let tau = state.tau;
    let t1 = tau_next(tau)?;
    let y_new = lerp(tau, &state.y, &y_tilde_new);
    state.y_hat = extrapolate(&y_new, t1 * (1.0 - tau) / tau, &y_new, &state.y);
    state.y_tilde = y_tilde_new;
    state.y = y_new;
    state.k += 1;
    state.tau = t1;
    state.rho = rho0 / (t1 * t1);
    Ok(())
}

fn scvx_advance(state: &mut CompositeState, rho0: f64) -> Result<()> {
    let t1 = tau_next(state.tau)?;
    state.k += 1;
    state.tau = t1;
    state.rho = rho0 / (t1 * t1);
    Ok(())
}

/// Runs `scheme` from `y⁰` for `max_iters` steps, recording `P(y^k)`.
pub fn run(
    problem: &CompositeProblem,
    scheme: Scheme,
    rho0: Option<f64>,
    y0: Vec<f64>,
    max_iters: usize,
    clock: &dyn Clock,
) -> Result<ConvergenceTrace> {
    check_shape(problem, scheme)?;
    let rho0 = match rho0 {
        Some(r) => r,
        None => default_rho0(problem, scheme)?,
    };
    if !(rho0 > 0.0 && rho0.is_finite()) {
        return Err(Error::Config(alloc::format!("rho0 must be positive and finite, got {rho0}")));
    }
    crate::error::check_len("composite run: y0", problem.dim(), y0.len())?;
    let mut state = CompositeState::new(y0, problem.l.rows(), rho0);
    let mut ws = CompositeWorkspace::default();
    let base = clock.elapsed_ms();
    let rec = |s: &CompositeState, t: f64| -> Result<TraceRecord> {
        Ok(TraceRecord {
            k: s.k,
            objective: problem.objective(&s.y)?,
            dist: 0.0,
            feasibility: 0.0,
            psi: 0.0,
            rho: s.rho,
            tau: s.tau,
            wall_ms: t,
        })
    };
    let mut trace = ConvergenceTrace::default();
    trace.records.push(rec(&state, 0.0)?);
    for _ in 0..max_iters {
        composite_step(problem, scheme, rho0, &mut state, &mut ws)?;
        trace.records.push(rec(&state, clock.elapsed_ms() - base)?);
    }
    trace.final_x = state.x;
    trace.final_y = state.y;
    Ok(trace)
}
