//! Worst-case convergence bounds and checks of recorded traces against them.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::papa::{SolverConfig, TraceRecord, Variant};
use crate::problem::ProblemInstance;
use crate::vector::{dist, ln, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// `O(1/k)` objective and feasibility bounds of the non-strong method.
    T1,
    /// `O(1/k²)` bounds of the semi-strong method.
    T2,
    /// Three-term variants: `T1`/`T2` forms with `L_h` added to the `y` weight.
    T3,
    /// Composite `P(y^k) − P*` bounds for the prox-prox schemes.
    C1,
}

/// Quantities the bounds depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub rho0: f64,
    pub gamma0: f64,
    pub b_norm_sq: f64,
    /// `L_h`, zero without a smooth term.
    pub l_h: f64,
    /// `‖x⁰ − x*‖`
    pub x0_dist: f64,
    /// `‖y⁰ − y*‖`
    pub y0_dist: f64,
    /// `‖λ*‖` (an upper bound suffices).
    pub lambda_norm: f64,
    /// Lipschitz constant of `f` (composite bounds only).
    pub l_f: f64,
    /// `true` selects the accelerated forms.
    pub accelerated: bool,
}

impl BoundInputs {
    /// `R_p² = γ₀‖x⁰ − x*‖² + (L_h + ρ₀‖B‖²)‖y⁰ − y*‖²`
    pub fn r_p_sq(&self) -> f64 {
        self.gamma0 * self.x0_dist * self.x0_dist + (self.l_h + self.rho0 * self.b_norm_sq) * self.y0_dist * self.y0_dist
    }

    /// `R_d = ‖λ*‖ + √(‖λ*‖² + ρ₀R_p²)`
    pub fn r_d(&self) -> f64 {
        let l = self.lambda_norm;
        l + sqrt(l * l + self.rho0 * self.r_p_sq())
    }

    /// `(objective bound, feasibility bound)` at iteration `k ≥ 1`.
    pub fn bounds(&self, theorem: Theorem, k: usize) -> (f64, Option<f64>) {
        let kf = k as f64;
        let rho0 = self.rho0;
        match theorem {
            Theorem::T1 | Theorem::T2 | Theorem::T3 => {
                let m = (rho0 * self.r_p_sq()).max(2.0 * self.lambda_norm * self.r_d());
                let accelerated = self.accelerated && theorem != Theorem::T1;
                if accelerated {
                    let d = rho0 * (kf + 1.0) * (kf + 1.0);
                    (2.0 * m / d, Some(4.0 * self.r_d() / d))
                } else {
                    (m / (2.0 * rho0 * kf), Some(self.r_d() / (rho0 * kf)))
                }
            }
            Theorem::C1 => {
                let (r, lf) = (self.y0_dist, self.l_f);
                if self.accelerated {
                    let k1 = (kf + 1.0) * (kf + 1.0);
                    (2.0 * rho0 * r * r / k1 + 8.0 * (lf * lf + lf * rho0 * r) / (rho0 * k1), None)
                } else {
                    ((rho0 * rho0 * r * r + 4.0 * lf * lf + 2.0 * lf * rho0 * r) / (2.0 * rho0 * kf), None)
                }
            }
        }
    }
}

/// Bound inputs for a template run of `cfg` from `(x⁰, y⁰)`, using the
/// problem's reference solution. Distances to an inexact reference are
/// inflated by 0.1%.
pub fn template_inputs(problem: &ProblemInstance, cfg: &SolverConfig, x0: &[f64], y0: &[f64]) -> Result<BoundInputs> {
    let params = cfg.resolve(problem)?;
    let reference = problem
        .reference
        .as_ref()
        .ok_or_else(|| Error::Config("bound checks need a reference solution".into()))?;
    let (Some(xs), Some(ys)) = (reference.x_star.as_deref(), reference.y_star.as_deref()) else {
        return Err(Error::Config("bound checks need x* and y*".into()));
    };
    let pad = if reference.exact { 1.0 } else { 1.001 };
    Ok(BoundInputs {
        rho0: params.rho0,
        gamma0: params.gamma0,
        b_norm_sq: params.b_norm_sq,
        l_h: params.l_h,
        x0_dist: pad * dist(x0, xs),
        y0_dist: pad * dist(y0, ys),
        lambda_norm: reference.lambda_norm,
        l_f: 0.0,
        accelerated: cfg.variant == Variant::SemiStrong,
    })
}

/// Result of comparing a trace with a bound family. Slacks are
/// `(bound − measured)/bound`; negative means violated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub checked: usize,
    pub violations: usize,
    /// `None` when nothing was checked.
    pub worst_objective_slack: Option<f64>,
    pub worst_objective_k: usize,
    /// `None` for bound families without a feasibility part.
    pub worst_feasibility_slack: Option<f64>,
    pub worst_feasibility_k: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks every record with `k ≥ 1`. The objective gap is `|F(z^k) − F*|`
/// (`P(y^k) − P*` for the composite bound), reduced by `f_star_err` so an
/// uncertain reference can only loosen the check. The feasibility column
/// used is `dist`.
pub fn check_trace(
    records: &[TraceRecord],
    theorem: Theorem,
    inputs: &BoundInputs,
    f_star: f64,
    f_star_err: f64,
    tol: f64,
) -> BoundReport {
    let mut rep = BoundReport {
        theorem,
        checked: 0,
        violations: 0,
        worst_objective_slack: None,
        worst_objective_k: 0,
        worst_feasibility_slack: None,
        worst_feasibility_k: 0,
        tolerance: tol,
        passed: true,
    };
    for r in records.iter().filter(|r| r.k >= 1) {
        let (ob, fb) = inputs.bounds(theorem, r.k);
        let gap = if theorem == Theorem::C1 { r.objective - f_star } else { (r.objective - f_star).abs() };
        let measured = gap - f_star_err;
        let os = relative_slack(ob, measured);
        let mut bad = !(os >= -tol);
        if worse(os, rep.worst_objective_slack) {
            rep.worst_objective_slack = Some(os);
            rep.worst_objective_k = r.k;
        }
        if let Some(fb) = fb {
            let fs = relative_slack(fb, r.dist);
            bad |= !(fs >= -tol);
            if worse(fs, rep.worst_feasibility_slack) {
                rep.worst_feasibility_slack = Some(fs);
                rep.worst_feasibility_k = r.k;
            }
        }
        rep.checked += 1;
        if bad {
            rep.violations += 1;
        }
    }
    rep.passed = rep.violations == 0;
    rep
}

fn worse(v: f64, current: Option<f64>) -> bool {
    match current {
        None => true,
        Some(c) => v < c || v.is_nan(),
    }
}

fn relative_slack(bound: f64, measured: f64) -> f64 {
    if bound > 0.0 {
        (bound - measured) / bound
    } else if measured <= 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

/// Least-squares fit of `log v` against `log k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    /// Points in the window dropped for a nonpositive value.
    pub skipped: usize,
}

/// Fits over the pairs with `from ≤ k ≤ to`; needs at least 10 usable
/// (positive) points.
pub fn rate_slope(ks: &[usize], values: &[f64], from: usize, to: usize) -> Result<SlopeFit> {
    if ks.len() != values.len() {
        return Err(Error::DimensionMismatch {
            context: "rate_slope",
            expected: ks.len(),
            actual: values.len(),
        });
    }
    let mut pts = Vec::new();
    let mut skipped = 0;
    for (k, v) in ks.iter().zip(values) {
        if *k < from || *k > to || *k == 0 {
            continue;
        }
        if *v > 0.0 && v.is_finite() {
            pts.push((ln(*k as f64), ln(*v)));
        } else {
            skipped += 1;
        }
    }
    if pts.len() < 10 {
        return Err(Error::Config(format!(
            "rate fit needs at least 10 positive points in [{from}, {to}], got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
        skipped,
    })
}
