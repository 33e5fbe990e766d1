//! Accelerated proximal gradient (FISTA) on `h` with the prox of
//! `f∘L + g`, computed exactly when `f = 0` or `(L = I, g = 0)` and by a
//! fixed number of inner primal-dual iterations otherwise.

use alloc::vec::Vec;

use super::{step_record, BaselineConfig};
use crate::error::{Error, Result};
use crate::linop::MapKind;
use crate::papa::{Clock, ConvergenceTrace};
use crate::problem::{CompositeProblem, FeasibilityMetric};
use crate::prox::{ProxCache, ProxKind};
use crate::vector::{extrapolate, sqrt};

#[derive(Debug, Clone, PartialEq)]
pub struct ApgState {
    pub k: usize,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub t: f64,
    /// Warm start of the inner dual variable.
    pub p: Vec<f64>,
}

/// Approximates `argmin_u s·(f(Lu) + g(u)) + ½‖u − v‖²` with `iters`
/// Chambolle-Pock steps (`σ = τ = 1/‖L‖`), starting from the dual `p`.
/// Returns the primal point and the final dual.
pub fn tv_prox_inner(
    problem: &CompositeProblem,
    s: f64,
    v: &[f64],
    p: Vec<f64>,
    iters: usize,
    fc: &mut ProxCache,
    gc: &mut ProxCache,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let l = &problem.l;
    let step = 1.0 / sqrt(problem.l_norm_sq.max(f64::MIN_POSITIVE));
    let (sig, tau) = (step, step);
    let mut p = p;
    let mut u = v.to_vec();
    let mut u_bar = u.clone();
    for _ in 0..iters {
        let lu = l.apply(&u_bar)?;
        let w: Vec<f64> = p.iter().zip(&lu).map(|(p, a)| p + sig * a).collect();
        let ws: Vec<f64> = w.iter().map(|a| a / sig).collect();
        let pr = problem.f.prox_with(fc, s / sig, &ws)?;
        p = w.iter().zip(&pr).map(|(a, b)| a - sig * b).collect();
        let ltp = l.adjoint_apply(&p)?;
        let m: Vec<f64> = u
            .iter()
            .zip(&ltp)
            .zip(v)
            .map(|((u, g), v)| (u - tau * g + tau * v) / (1.0 + tau))
            .collect();
        let u_new = problem.g.prox_with(gc, s * tau / (1.0 + tau), &m)?;
        u_bar = u_new.iter().zip(&u).map(|(a, b)| 2.0 * a - b).collect();
        u = u_new;
    }
    Ok((u, p))
}

fn nonsmooth_prox(
    problem: &CompositeProblem,
    s: f64,
    v: &[f64],
    state_p: &mut Vec<f64>,
    iters: usize,
    fc: &mut ProxCache,
    gc: &mut ProxCache,
) -> Result<Vec<f64>> {
    if matches!(problem.f.kind(), ProxKind::Zero) {
        return problem.g.prox_with(gc, s, v);
    }
    if matches!(problem.l.kind(), MapKind::Identity) && matches!(problem.g.kind(), ProxKind::Zero) {
        return problem.f.prox_with(fc, s, v);
    }
    let (u, p) = tv_prox_inner(problem, s, v, core::mem::take(state_p), iters, fc, gc)?;
    *state_p = p;
    Ok(u)
}

pub(super) fn run(
    problem: &CompositeProblem,
    cfg: &BaselineConfig,
    y0: Vec<f64>,
    metric: Option<&FeasibilityMetric>,
    clock: &dyn Clock,
) -> Result<ConvergenceTrace> {
    let Some(h) = &problem.h else {
        return Err(Error::Config("accelerated proximal gradient needs a smooth term with known L_h".into()));
    };
    let lh = h.lip();
    if !(lh > 0.0 && lh.is_finite()) {
        return Err(Error::Config("accelerated proximal gradient needs 0 < L_h < inf".into()));
    }
    let mut s = ApgState {
        k: 0,
        z: y0.clone(),
        y: y0,
        t: 1.0,
        p: alloc::vec![0.0; problem.l.rows()],
    };
    let (mut fc, mut gc) = (ProxCache::default(), ProxCache::default());
    let base = clock.elapsed_ms();
    let mut trace = ConvergenceTrace::default();
    trace.records.push(step_record(problem, metric, 0, &s.y, 1.0 / lh, 0.0)?);
    for _ in 0..cfg.max_iters {
        let g = h.grad(&s.z)?;
        let v: Vec<f64> = s.z.iter().zip(&g).map(|(z, g)| z - g / lh).collect();
        let y_new = nonsmooth_prox(problem, 1.0 / lh, &v, &mut s.p, cfg.inner_iters, &mut fc, &mut gc)?;
        let t_new = 0.5 * (1.0 + sqrt(1.0 + 4.0 * s.t * s.t));
        s.z = extrapolate(&y_new, (s.t - 1.0) / t_new, &y_new, &s.y);
        s.y = y_new;
        s.t = t_new;
        s.k += 1;
        if let Some(per) = cfg.restart_period {
            if s.k.is_multiple_of(per) {
                s.t = 1.0;
                s.z = s.y.clone();
            }
        }
        trace.records.push(step_record(problem, metric, s.k, &s.y, 1.0 / lh, clock.elapsed_ms() - base)?);
    }
    trace.final_x = problem.l.apply(&s.y)?;
    trace.final_y = s.y;
    Ok(trace)
}
