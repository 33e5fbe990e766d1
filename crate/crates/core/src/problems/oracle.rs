//! Reference solutions, each verified against its optimality conditions
//! before being returned.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::gen::QpData;
use crate::dense::{solve_complete_pivot, Matrix};
use crate::error::{Error, Result};
use crate::problem::{CompositeProblem, ProblemInstance, Reference};
use serde::{Deserialize, Serialize};
use crate::prox::soft_threshold;
use crate::vector::{norm, norm_inf, sub};

/// KKT point of `min ½yᵀQy + qᵀy s.t. lo ≤ By ≤ hi`:
/// `Qy + q + Bᵀν = 0`, `ν ≥ 0` on active upper bounds, `ν ≤ 0` on active
/// lower bounds, `ν = 0` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub y: Vec<f64>,
    pub nu: Vec<f64>,
    pub f_star: f64,
    /// Scaled KKT residual, see [`qp_kkt_residual`].
    pub kkt_residual: f64,
    /// `false` when the reduced KKT system was rank deficient, i.e. `y*`
    /// is one of several minimizers.
    pub unique: bool,
}

impl QpSolution {
    /// Template reference for `A = −I`: `x* = By*` (clamped against
    /// rounding), `λ* = −ν`.
    pub fn reference(&self, data: &QpData) -> Reference {
        let x: Vec<f64> = data
            .b_mat
            .matvec(&self.y)
            .iter()
            .zip(data.lo.iter().zip(&data.hi))
            .map(|(v, (a, b))| v.clamp(*a, *b))
            .collect();
        let lambda: Vec<f64> = self.nu.iter().map(|v| -v).collect();
        Reference::exact(self.f_star, x, self.y.clone(), lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Activity {
    Free,
    Lower,
    Upper,
}

/// Largest of: stationarity `‖Qy + q + Bᵀν‖∞/(1 + ‖q‖∞)`, primal violation,
/// wrong-sign multipliers and complementarity `|ν_i|·gap_i`, the last three
/// relative to `1 + max|bound|`.
pub fn qp_kkt_residual(data: &QpData, y: &[f64], nu: &[f64]) -> f64 {
    let mut grad = data.q_mat.matvec(y);
    grad.iter_mut().zip(&data.q).for_each(|(g, q)| *g += q);
    let btnu = data.b_mat.matvec_t(nu);
    grad.iter_mut().zip(&btnu).for_each(|(g, v)| *g += v);
    let stat = norm_inf(&grad) / (1.0 + norm_inf(&data.q));
    let by = data.b_mat.matvec(y);
    let bscale = 1.0
        + data
            .lo
            .iter()
            .chain(&data.hi)
            .filter(|v| v.is_finite())
            .fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = stat;
    for i in 0..by.len() {
        let (v, a, b, m) = (by[i], data.lo[i], data.hi[i], nu[i]);
        let viol = (a - v).max(v - b).max(0.0);
        let comp = if m > 0.0 {
            if b.is_finite() { m * (b - v).abs() } else { m }
        } else if m < 0.0 {
            if a.is_finite() { -m * (v - a).abs() } else { -m }
        } else {
            0.0
        };
        worst = worst.max(viol / bscale).max(comp / bscale);
    }
    worst
}

/// Solves the equality-constrained stationarity system for one activity
/// pattern. Returns `(y, ν, full_rank)`.
fn solve_pattern(data: &QpData, pattern: &[Activity]) -> Option<(Vec<f64>, Vec<f64>, bool)> {
    let p = data.q.len();
    let active: Vec<usize> = (0..pattern.len()).filter(|&i| pattern[i] != Activity::Free).collect();
    let dim = p + active.len();
    let mut k = Matrix::zeros(dim, dim);
    let mut rhs = vec![0.0; dim];
    for i in 0..p {
        for j in 0..p {
            k.set(i, j, data.q_mat.get(i, j));
        }
        rhs[i] = -data.q[i];
    }
    for (a, &row) in active.iter().enumerate() {
        for j in 0..p {
            let v = data.b_mat.get(row, j);
            k.set(p + a, j, v);
            k.set(j, p + a, v);
        }
        rhs[p + a] = match pattern[row] {
            Activity::Lower => data.lo[row],
            Activity::Upper => data.hi[row],
            Activity::Free => unreachable!(),
        };
        if !rhs[p + a].is_finite() {
            return None;
        }
    }
    let sol = solve_complete_pivot(&k, &rhs, 1e-12).ok()?;
    let mut nu = vec![0.0; pattern.len()];
    for (a, &row) in active.iter().enumerate() {
        nu[row] = sol.x[p + a];
    }
    Some((sol.x[..p].to_vec(), nu, sol.rank == dim))
}

fn pattern_consistent(data: &QpData, y: &[f64], nu: &[f64], pattern: &[Activity], tol: f64) -> bool {
    let by = data.b_mat.matvec(y);
    by.iter().enumerate().all(|(i, v)| {
        let scale = 1.0 + v.abs();
        let feasible = *v >= data.lo[i] - tol * scale && *v <= data.hi[i] + tol * scale;
        let sign_ok = match pattern[i] {
            Activity::Free => true,
            Activity::Lower => nu[i] <= tol,
            Activity::Upper => nu[i] >= -tol,
        };
        feasible && sign_ok
    })
}

/// Enumerates all `3ⁿ` activity patterns (`n ≤ 12`) and returns the best
/// KKT-consistent candidate.
pub fn qp_active_set_oracle(data: &QpData) -> Result<QpSolution> {
    let n = data.lo.len();
    if n > 12 {
        return Err(Error::Config(format!("active-set enumeration needs n <= 12, got {n}")));
    }
    let total = 3usize.pow(n as u32);
    let mut pattern = vec![Activity::Free; n];
    let mut best: Option<QpSolution> = None;
    for code in 0..total {
        let mut c = code;
        for p in pattern.iter_mut() {
            *p = [Activity::Free, Activity::Lower, Activity::Upper][c % 3];
            c /= 3;
        }
        let Some((y, nu, unique)) = solve_pattern(data, &pattern) else {
            continue;
        };
        if !pattern_consistent(data, &y, &nu, &pattern, 1e-10) {
            continue;
        }
        let f = data.objective(&y);
        if best.as_ref().is_none_or(|b| f < b.f_star) {
            best = Some(QpSolution {
                kkt_residual: qp_kkt_residual(data, &y, &nu),
                y,
                nu,
                f_star: f,
                unique,
            });
        }
    }
    let sol = best.ok_or_else(|| Error::Oracle("no KKT-consistent activity pattern".into()))?;
    if sol.kkt_residual > 1e-10 {
        return Err(Error::Oracle(format!("enumerated optimum has KKT residual {:e}", sol.kkt_residual)));
    }
    Ok(sol)
}

/// Recovers the exact solution from an approximate one: guesses the active
/// set from the gaps `By − lo`, `hi − By` and repairs it by dropping
/// wrong-sign multipliers and adding violated constraints.
pub fn qp_polish_oracle(data: &QpData, y_approx: &[f64]) -> Result<QpSolution> {
    let by = data.b_mat.matvec(y_approx);
    let n = by.len();
    let mut best_res = f64::INFINITY;
    for delta in [1e-10, 1e-8, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1] {
        let mut pattern: Vec<Activity> = (0..n)
            .map(|i| {
                let (dl, du) = (by[i] - data.lo[i], data.hi[i] - by[i]);
                if du <= delta && du <= dl {
                    Activity::Upper
                } else if dl <= delta {
                    Activity::Lower
                } else {
                    Activity::Free
                }
            })
            .collect();
        for _ in 0..4 * n + 10 {
            let Some((y, nu, unique)) = solve_pattern(data, &pattern) else {
                break;
            };
            let res = qp_kkt_residual(data, &y, &nu);
            best_res = best_res.min(res);
            if res <= 1e-10 {
                return Ok(QpSolution {
                    f_star: data.objective(&y),
                    y,
                    nu,
                    kkt_residual: res,
                    unique,
                });
            }
            // Repair the single worst offender.
            let byn = data.b_mat.matvec(&y);
            let mut worst = (0.0, None);
            for i in 0..n {
                let wrong_sign = match pattern[i] {
                    Activity::Lower => nu[i].max(0.0),
                    Activity::Upper => (-nu[i]).max(0.0),
                    Activity::Free => 0.0,
                };
                if wrong_sign > worst.0 {
                    worst = (wrong_sign, Some((i, Activity::Free)));
                }
                if pattern[i] == Activity::Free {
                    if byn[i] - data.hi[i] > worst.0 {
                        worst = (byn[i] - data.hi[i], Some((i, Activity::Upper)));
                    }
                    if data.lo[i] - byn[i] > worst.0 {
                        worst = (data.lo[i] - byn[i], Some((i, Activity::Lower)));
                    }
                }
            }
            match worst.1 {
                Some((i, a)) => pattern[i] = a,
                None => break,
            }
        }
    }
    Err(Error::Oracle(format!("active-set polish failed, best KKT residual {best_res:e}")))
}

/// Exact QP reference: enumeration for `n ≤ 12`, otherwise a restarted
/// penalty run followed by [`qp_polish_oracle`], with growing budgets.
pub fn qp_reference(data: &QpData, problem: &ProblemInstance) -> Result<QpSolution> {
    if data.lo.len() <= 12 {
        return qp_active_set_oracle(data);
    }
    let mut last = Error::Oracle("no budget tried".into());
    for budget in [2_000, 10_000, 50_000] {
        let cfg = if data.mu > 0.0 {
            crate::papa::SolverConfig::semistrong(budget).with_restart(50)
        } else {
            crate::papa::SolverConfig::nonstrong(budget).with_restart(50)
        };
        let trace = crate::papa::run(problem, &cfg)?;
        match qp_polish_oracle(data, &trace.final_y) {
            Ok(s) => return Ok(s),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// `min ‖y − c‖ + (κ₁/2)‖y‖² + κ₂‖y‖₁`. Either `y* = c`, or `y* = y(t)`
/// with `y(t) = soft(c, tκ₂)/(1 + tκ₁)` and `‖y(t) − c‖ = t`; `t` is found
/// by bisection on the nonincreasing ratio `‖y(t) − c‖/t`.
pub fn sqrt_loss_oracle(c: &[f64], kappa1: f64, kappa2: f64) -> Result<(Vec<f64>, f64)> {
    let value = |y: &[f64]| {
        norm(&sub(y, c)) + 0.5 * kappa1 * crate::vector::norm_sq(y) + kappa2 * y.iter().map(|v| v.abs()).sum::<f64>()
    };
    let y_of = |t: f64| -> Vec<f64> { c.iter().map(|ci| soft_threshold(*ci, t * kappa2) / (1.0 + t * kappa1)).collect() };
    let ratio = |t: f64| norm(&sub(&y_of(t), c)) / t;
    let min_sub: Vec<f64> = c
        .iter()
        .map(|ci| if *ci == 0.0 { 0.0 } else { kappa1 * ci + kappa2 * ci.signum() })
        .collect();
    let y = if norm(&min_sub) <= 1.0 {
        c.to_vec()
    } else {
        let mut hi = 1.0;
        while ratio(hi) >= 1.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Oracle("square-root loss bracket diverged".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid) >= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        y_of(0.5 * (lo + hi))
    };
    // Subgradient check: −(y − c)/‖y − c‖ − κ₁y ∈ κ₂ ∂‖y‖₁.
    let r = sub(&y, c);
    let nr = norm(&r);
    let mut worst: f64 = 0.0;
    if nr > 0.0 {
        for (yi, ri) in y.iter().zip(&r) {
            let g = -ri / nr - kappa1 * yi;
            let e = if *yi != 0.0 { (g - kappa2 * yi.signum()).abs() } else { (g.abs() - kappa2).max(0.0) };
            worst = worst.max(e);
        }
    }
    if worst > 1e-9 {
        return Err(Error::Oracle(format!("square-root loss optimality residual {worst:e}")));
    }
    let f = value(&y);
    Ok((y, f))
}

/// Reference of the square-root-loss instance in template form (`x = y`,
/// `A = −I`, `B = I`): `λ* = (c − y*)/‖y* − c‖`, or the least-norm
/// subgradient of `g` at `y* = c`.
pub fn sqrt_loss_reference(c: &[f64], kappa1: f64, kappa2: f64) -> Result<Reference> {
    let (y, f) = sqrt_loss_oracle(c, kappa1, kappa2)?;
    let r = sub(c, &y);
    let nr = norm(&r);
    let lambda: Vec<f64> = if nr > 0.0 {
        r.iter().map(|v| v / nr).collect()
    } else {
        c.iter()
            .map(|ci| if *ci == 0.0 { 0.0 } else { kappa1 * ci + kappa2 * ci.signum() })
            .collect()
    };
    Ok(Reference::exact(f, y.clone(), y, lambda))
}

/// `F*` estimate from two structurally different methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub f_star: f64,
    /// Gap between the two methods' estimates.
    pub err: f64,
    /// Set when the gap exceeds `1e−6·max(1, |F*|)`.
    pub low_confidence: bool,
    pub penalty_estimate: f64,
    pub primal_dual_estimate: f64,
}

/// Runs the restarted penalty method on the template form and a primal-dual
/// baseline (Chambolle-Pock, or Vu-Condat when `h` is present) for `budget`
/// iterations each. With finite `f` each estimate is the best objective
/// along the run; with an indicator `f` it is the relaxed objective of the
/// final iterate.
pub fn fstar_crosscheck(problem: &CompositeProblem, budget: usize) -> Result<CrossCheck> {
    use crate::baselines::{self, BaselineConfig, Method};
    use crate::papa::{self, NoClock, SolverConfig};
    if budget == 0 {
        return Err(Error::Config("cross-check budget must be positive".into()));
    }
    let template = problem.to_template()?;
    let strong = problem.g.mu() > 0.0 && problem.h.is_none();
    let cfg = if strong {
        SolverConfig::semistrong(budget).with_restart(50)
    } else {
        SolverConfig::nonstrong(budget).with_restart(50)
    };
    let pen = papa::run(&template, &cfg)?;
    let method = if problem.h.is_some() {
        Method::VuCondat
    } else if problem.g.mu() > 0.0 {
        Method::CpScvx
    } else {
        Method::CpPlain
    };
    let pd = baselines::run(problem, &BaselineConfig::new(method, budget), vec![0.0; problem.dim()], None, &NoClock)?;
    let (a, b) = if problem.f.is_indicator() {
        (problem.objective_relaxed(&pen.final_y)?, pd.last().map_or(f64::INFINITY, |r| r.objective))
    } else {
        // The penalty trace scores F(x, y) with x ≠ Ly; P(y) of the final
        // iterate is a true upper bound.
        let pd_best = baselines::best_so_far(&pd).last().copied().unwrap_or(f64::INFINITY);
        (problem.objective(&pen.final_y)?, pd_best)
    };
    let f_star = a.min(b);
    let err = (a - b).abs();
    Ok(CrossCheck {
        f_star,
        err,
        low_confidence: err > 1e-6 * f_star.abs().max(1.0),
        penalty_estimate: a,
        primal_dual_estimate: b,
    })
}

/// Inexact reference from a restarted run of `budget` iterations. The error
/// bar on `F*` is the change of the objective over the second half of the
/// run. `lambda_norm` must be an upper bound on `‖λ*‖` known from the
/// problem structure.
pub fn long_run_reference(problem: &ProblemInstance, budget: usize, lambda_norm: f64) -> Result<Reference> {
    use crate::papa::{self, SolverConfig};
    if budget < 2 {
        return Err(Error::Config("long-run reference needs a budget of at least 2".into()));
    }
    if !(lambda_norm >= 0.0) {
        return Err(Error::Config("multiplier bound must be nonnegative".into()));
    }
    let strong = problem.g.mu() > 0.0 && problem.h.is_none();
    let cfg = if strong {
        SolverConfig::semistrong(budget).with_restart(50)
    } else {
        SolverConfig::nonstrong(budget).with_restart(50)
    };
    let trace = papa::run(problem, &cfg)?;
    let last = trace.last().map(|r| r.objective).unwrap_or(f64::NAN);
    let mid = trace.records[budget / 2].objective;
    if !last.is_finite() {
        return Err(Error::Oracle(format!("long-run reference ended at a non-finite objective {last}")));
    }
    Ok(Reference {
        f_star: last,
        f_star_err: (last - mid).abs(),
        x_star: Some(trace.final_x),
        y_star: Some(trace.final_y),
        lambda_star: None,
        lambda_norm,
        exact: false,
    })
}

/// KKT residual of a template reference, via prox fixed points:
/// `x* = prox_f(x* + Aᵀλ*)`, `y* = prox_g(y* + Bᵀλ* − ∇h(y*))`,
/// `r* = proj_K(r* − λ*)`, scaled by `1 + ‖z*‖ + ‖λ*‖`.
pub fn kkt_residual(problem: &ProblemInstance, reference: &Reference) -> Result<f64> {
    let (Some(x), Some(y), Some(l)) = (
        reference.x_star.as_deref(),
        reference.y_star.as_deref(),
        reference.lambda_star.as_deref(),
    ) else {
        return Err(Error::Config("KKT check needs x*, y* and λ*".into()));
    };
    let at_l = problem.penalty.a().adjoint_apply(l)?;
    let bt_l = problem.penalty.b().adjoint_apply(l)?;
    let ax: Vec<f64> = x.iter().zip(&at_l).map(|(a, b)| a + b).collect();
    let mut by: Vec<f64> = y.iter().zip(&bt_l).map(|(a, b)| a + b).collect();
    if let Some(gh) = problem.smooth_grad(y)? {
        by.iter_mut().zip(&gh).for_each(|(v, g)| *v -= g);
    }
    let ex = norm(&sub(x, &problem.f.prox(1.0, &ax)?));
    let ey = norm(&sub(y, &problem.g.prox(1.0, &by)?));
    let r = problem.penalty.residual(x, y)?;
    let shifted: Vec<f64> = r.iter().zip(l).map(|(a, b)| a - b).collect();
    let er = norm(&sub(&r, &problem.penalty.set().project(&shifted)?));
    let scale = 1.0 + norm(x) + norm(y) + norm(l);
    Ok(ex.max(ey).max(er) / scale)
}
