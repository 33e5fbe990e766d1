//! Chambolle-Pock primal-dual method for `min g(y) + f(Ly)`.
//!
//! Plain: fixed `σ, τ, θ`. Strongly convex: with `τ₀ = σ₀ = 1/‖L‖`,
//! after each step `θ = 1/√(1 + 2μτ)`, `τ ← θτ`, `σ ← σ/θ` and the
//! extrapolation uses the new `θ`.

use alloc::vec::Vec;

use super::{step_record, BaselineConfig, Method};
use crate::error::{Error, Result};
use crate::papa::{Clock, ConvergenceTrace};
use crate::problem::{CompositeProblem, FeasibilityMetric};
use crate::prox::ProxCache;
use crate::vector::{extrapolate, sqrt};

#[derive(Debug, Clone, PartialEq)]
pub struct CpState {
    pub k: usize,
    pub y: Vec<f64>,
    pub y_bar: Vec<f64>,
    pub u: Vec<f64>,
    pub tau: f64,
    pub sigma: f64,
    pub theta: f64,
}

struct Setup {
    sigma: f64,
    tau: f64,
    mu: f64,
}

fn setup(problem: &CompositeProblem, cfg: &BaselineConfig) -> Result<Setup> {
    if problem.h.is_some() {
        return Err(Error::Config("Chambolle-Pock takes no smooth term; use vu-condat".into()));
    }
    let l2 = problem.l_norm_sq;
    let scvx = cfg.method == Method::CpScvx;
    let default = if l2 == 0.0 {
        1.0
    } else if scvx {
        1.0 / sqrt(l2)
    } else {
        1.0 / (2.0 * l2)
    };
    let sigma = cfg.sigma.unwrap_or(default);
    let tau = cfg.tau.unwrap_or(default);
    if !(sigma > 0.0 && tau > 0.0 && sigma.is_finite() && tau.is_finite()) {
        return Err(Error::Config("step sizes must be positive and finite".into()));
    }
    if sigma * tau * l2 > 1.0 + 1e-12 {
        return Err(Error::Config(alloc::format!(
            "Chambolle-Pock needs sigma*tau*|L|^2 <= 1, got {}",
            sigma * tau * l2
        )));
    }
    let mu = if scvx {
        let mu = cfg.mu_g.unwrap_or_else(|| problem.g.mu());
        if !(mu > 0.0) {
            return Err(Error::Config("cp-scvx needs a positive strong-convexity modulus".into()));
        }
        mu
    } else {
        0.0
    };
    Ok(Setup { sigma, tau, mu })
}

pub(super) fn step(problem: &CompositeProblem, s: &mut CpState, mu: f64, fc: &mut ProxCache, gc: &mut ProxCache) -> Result<()> {
    let lyb = problem.l.apply(&s.y_bar)?;
    let w: Vec<f64> = s.u.iter().zip(&lyb).map(|(u, v)| u + s.sigma * v).collect();
    s.u = problem.f.conj_prox_with(fc, s.sigma, &w)?;
    let ltu = problem.l.adjoint_apply(&s.u)?;
    let arg: Vec<f64> = s.y.iter().zip(&ltu).map(|(y, g)| y - s.tau * g).collect();
    let y_new = problem.g.prox_with(gc, s.tau, &arg)?;
    if mu > 0.0 {
        s.theta = 1.0 / sqrt(1.0 + 2.0 * mu * s.tau);
        s.tau *= s.theta;
        s.sigma /= s.theta;
    }
    s.y_bar = extrapolate(&y_new, s.theta, &y_new, &s.y);
    s.y = y_new;
    s.k += 1;
    Ok(())
}

pub(super) fn run(
    problem: &CompositeProblem,
    cfg: &BaselineConfig,
    y0: Vec<f64>,
    metric: Option<&FeasibilityMetric>,
    clock: &dyn Clock,
) -> Result<ConvergenceTrace> {
    let st = setup(problem, cfg)?;
    let mut s = CpState {
        k: 0,
        y_bar: y0.clone(),
        y: y0,
        u: alloc::vec![0.0; problem.l.rows()],
        tau: st.tau,
        sigma: st.sigma,
        theta: cfg.theta,
    };
    let (mut fc, mut gc) = (ProxCache::default(), ProxCache::default());
    let base = clock.elapsed_ms();
    let mut trace = ConvergenceTrace::default();
    trace.records.push(step_record(problem, metric, 0, &s.y, s.tau, 0.0)?);
    for _ in 0..cfg.max_iters {
        step(problem, &mut s, st.mu, &mut fc, &mut gc)?;
        trace.records.push(step_record(problem, metric, s.k, &s.y, s.tau, clock.elapsed_ms() - base)?);
    }
    trace.final_x = problem.l.apply(&s.y)?;
    trace.final_y = s.y;
    Ok(trace)
}
