//! Vu-Condat splitting for `min g(y) + h(y) + f(Ly)`:
//!
//! ```text
//! ỹ = prox_{τg}(y − τ(∇h(y) + Lᵀu))
//! ũ = prox_{σf*}(u + σL(2ỹ − y))
//! (y, u) ← (1 − θ)(y, u) + θ(ỹ, ũ)
//! ```
//!
//! valid when `1/τ − σ‖L‖² ≥ L_h/2`.

use alloc::vec::Vec;

use super::{step_record, BaselineConfig};
use crate::error::{Error, Result};
use crate::papa::{Clock, ConvergenceTrace};
use crate::problem::{CompositeProblem, FeasibilityMetric};
use crate::prox::ProxCache;
use crate::vector::{lerp, sqrt};

#[derive(Debug, Clone, PartialEq)]
pub struct VuCondatState {
    pub k: usize,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
}

/// `(τ, σ)`: defaults `τ = 0.089/L_h`, `σ = (1/τ − L_h/2)/‖L‖²`; without a
/// smooth term `τ = σ = 1/‖L‖`.
pub(super) fn steps(problem: &CompositeProblem, cfg: &BaselineConfig) -> Result<(f64, f64)> {
    let lh = problem.h.as_ref().map_or(0.0, |h| h.lip());
    let l2 = problem.l_norm_sq;
    let tau = match cfg.tau {
        Some(t) => t,
        None if lh > 0.0 => 0.089 / lh,
        None => 1.0 / sqrt(l2.max(f64::MIN_POSITIVE)),
    };
    let sigma = match cfg.sigma {
        Some(s) => s,
        None if lh > 0.0 => (1.0 / tau - lh / 2.0) / l2,
        None => 1.0 / sqrt(l2.max(f64::MIN_POSITIVE)),
    };
    if !(tau > 0.0 && sigma > 0.0 && tau.is_finite() && sigma.is_finite()) {
        return Err(Error::Config("vu-condat step sizes must be positive and finite".into()));
    }
    let slack = 1.0 / tau - sigma * l2 - lh / 2.0;
    if slack < -1e-9 * (1.0 / tau) {
        return Err(Error::Config(alloc::format!(
            "vu-condat needs 1/tau - sigma*|L|^2 >= L_h/2 (slack {slack:e})"
        )));
    }
    if !(cfg.theta > 0.0 && cfg.theta <= 1.0) {
        return Err(Error::Config("vu-condat relaxation must lie in (0, 1]".into()));
    }
    Ok((tau, sigma))
}

pub(super) fn step(
    problem: &CompositeProblem,
    s: &mut VuCondatState,
    tau: f64,
    sigma: f64,
    theta: f64,
    fc: &mut ProxCache,
    gc: &mut ProxCache,
) -> Result<()> {
    let mut grad = problem.l.adjoint_apply(&s.u)?;
    if let Some(h) = &problem.h {
        let gh = h.grad(&s.y)?;
        grad.iter_mut().zip(&gh).for_each(|(a, b)| *a += b);
    }
    let arg: Vec<f64> = s.y.iter().zip(&grad).map(|(y, g)| y - tau * g).collect();
    let y_t = problem.g.prox_with(gc, tau, &arg)?;
    let refl: Vec<f64> = y_t.iter().zip(&s.y).map(|(a, b)| 2.0 * a - b).collect();
    let lr = problem.l.apply(&refl)?;
    let w: Vec<f64> = s.u.iter().zip(&lr).map(|(u, v)| u + sigma * v).collect();
    let u_t = problem.f.conj_prox_with(fc, sigma, &w)?;
    if theta == 1.0 {
        s.y = y_t;
        s.u = u_t;
    } else {
        s.y = lerp(theta, &s.y, &y_t);
        s.u = lerp(theta, &s.u, &u_t);
    }
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
    let (tau, sigma) = steps(problem, cfg)?;
    let mut s = VuCondatState {
        k: 0,
        y: y0,
        u: alloc::vec![0.0; problem.l.rows()],
    };
    let (mut fc, mut gc) = (ProxCache::default(), ProxCache::default());
    let base = clock.elapsed_ms();
    let mut trace = ConvergenceTrace::default();
    trace.records.push(step_record(problem, metric, 0, &s.y, tau, 0.0)?);
    for _ in 0..cfg.max_iters {
        step(problem, &mut s, tau, sigma, cfg.theta, &mut fc, &mut gc)?;
        trace.records.push(step_record(problem, metric, s.k, &s.y, tau, clock.elapsed_ms() - base)?);
    }
    trace.final_x = problem.l.apply(&s.y)?;
    trace.final_y = s.y;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::super::cp::{step as cp_step, CpState};
    use super::*;
    use crate::linop::LinearMap;
    use crate::prox::ProxFunction;
    use alloc::vec;

    #[test]
    fn without_smooth_term_matches_chambolle_pock() {
        // CP's dual after its first step seeds the Vu-Condat dual; the primal
        // sequences then coincide.
        let p = CompositeProblem::new(
            ProxFunction::l1(0.7).unwrap().centered(vec![1.0, -2.0, 0.5]),
            ProxFunction::elastic(0.3, 0.1).unwrap(),
            LinearMap::identity(3),
        )
        .unwrap()
        .with_l_norm_sq(1.0);
        let (tau, sigma) = (0.6, 0.9);
        let y0 = vec![0.3, -0.4, 2.0];
        let mut cp = CpState {
            k: 0,
            y: y0.clone(),
            y_bar: y0.clone(),
            u: vec![0.0; 3],
            tau,
            sigma,
            theta: 1.0,
        };
        let (mut a, mut b) = (ProxCache::default(), ProxCache::default());
        let (mut c, mut d) = (ProxCache::default(), ProxCache::default());
        let mut ys = Vec::new();
        for _ in 0..30 {
            cp_step(&p, &mut cp, 0.0, &mut a, &mut b).unwrap();
            ys.push((cp.y.clone(), cp.u.clone()));
        }
        let lyb = p.l.apply(&y0).unwrap();
        let u1 = p.f.conj_prox(sigma, &lyb.iter().map(|v| sigma * v).collect::<Vec<_>>()).unwrap();
        let mut vc = VuCondatState { k: 0, y: y0, u: u1 };
        for (i, (y_cp, _)) in ys.iter().enumerate() {
            step(&p, &mut vc, tau, sigma, 1.0, &mut c, &mut d).unwrap();
            for (a, b) in vc.y.iter().zip(y_cp) {
                assert!((a - b).abs() <= 1e-13, "iteration {i}");
            }
        }
    }

    #[test]
    fn tuned_defaults_satisfy_the_step_condition() {
        let m = crate::dense::Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let h = crate::problem::SmoothTerm::least_squares(LinearMap::dense(m), vec![1.0, 0.0], 0.0).unwrap();
        let p = CompositeProblem::new(ProxFunction::l1(0.1).unwrap(), ProxFunction::zero(), LinearMap::identity(2))
            .unwrap()
            .with_l_norm_sq(1.0)
            .with_smooth(h.clone());
        let (tau, sigma) = steps(&p, &BaselineConfig::new(super::super::Method::VuCondat, 1)).unwrap();
        assert_eq!(tau, 0.089 / h.lip());
        assert!((1.0 / tau - sigma - h.lip() / 2.0).abs() <= 1e-12 / tau);
    }
}
