//! Comparator first-order methods for `min f(Ly) + g(y) + h(y)`.

mod apg;
mod cp;
mod vu_condat;

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::papa::{Clock, ConvergenceTrace, TraceRecord};
use crate::problem::{relative_box_violation, CompositeProblem, FeasibilityMetric};
use crate::prox::ProxKind;

pub use apg::{tv_prox_inner, ApgState};
pub use cp::CpState;
pub use vu_condat::VuCondatState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CpPlain,
    CpScvx,
    VuCondat,
    AccProxGrad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub method: Method,
    /// Dual step. Defaults: `1/(2‖L‖²)` (cp-plain), `1/‖L‖` (cp-scvx),
    /// `(1/τ − L_h/2)/‖L‖²` (vu-condat).
    pub sigma: Option<f64>,
    /// Primal step. Defaults: `1/(2‖L‖²)`, `1/‖L‖`, `0.089/L_h`.
    pub tau: Option<f64>,
    pub theta: f64,
    /// Modulus driving cp-scvx; defaults to `μ_g` of the problem.
    pub mu_g: Option<f64>,
    /// Inner primal-dual iterations for the prox of `f∘L + g` (acc-prox-grad).
    pub inner_iters: usize,
    pub restart_period: Option<usize>,
    pub max_iters: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            method: Method::CpPlain,
            sigma: None,
            tau: None,
            theta: 1.0,
            mu_g: None,
            inner_iters: 25,
            restart_period: None,
            max_iters: 1000,
        }
    }
}

impl BaselineConfig {
    pub fn new(method: Method, max_iters: usize) -> Self {
        BaselineConfig {
            method,
            max_iters,
            ..Default::default()
        }
    }
}

/// Objective and feasibility of `y`. Indicator terms are dropped from the
/// objective; their violation goes to the feasibility columns.
pub(crate) fn measure(
    problem: &CompositeProblem,
    metric: Option<&FeasibilityMetric>,
    y: &[f64],
) -> Result<(f64, f64, f64)> {
    let obj = problem.objective_relaxed(y)?;
    let ly = problem.l.apply(y)?;
    let shifted = match problem.f.center() {
        Some(c) => crate::vector::sub(&ly, c),
        None => ly.clone(),
    };
    let dist = match problem.f.kind() {
        ProxKind::BoxIndicator { lo, hi } => {
            let set = crate::set::ConvexSet::new_box(lo.clone(), hi.clone())?;
            set.dist(&shifted)?
        }
        ProxKind::SetIndicator(s) => s.dist(&shifted)?,
        _ => 0.0,
    };
    let feas = match metric {
        Some(FeasibilityMetric::RelativeBox { lo, hi }) => relative_box_violation(&ly, lo, hi)?,
        _ => dist,
    };
    Ok((obj, dist, feas))
}

pub(crate) fn step_record(
    problem: &CompositeProblem,
    metric: Option<&FeasibilityMetric>,
    k: usize,
    y: &[f64],
    tau: f64,
    wall_ms: f64,
) -> Result<TraceRecord> {
    let (objective, dist, feasibility) = measure(problem, metric, y)?;
    Ok(TraceRecord {
        k,
        objective,
        dist,
        feasibility,
        psi: 0.5 * dist * dist,
        rho: 0.0,
        tau,
        wall_ms,
    })
}

/// Runs a baseline from `y⁰` (dual iterates start at zero).
pub fn run(
    problem: &CompositeProblem,
    cfg: &BaselineConfig,
    y0: Vec<f64>,
    metric: Option<&FeasibilityMetric>,
    clock: &dyn Clock,
) -> Result<ConvergenceTrace> {
    crate::error::check_len("baseline run: y0", problem.dim(), y0.len())?;
    if cfg.restart_period == Some(0) {
        return Err(Error::Config("restart period must be positive".into()));
    }
    match cfg.method {
        Method::CpPlain | Method::CpScvx => cp::run(problem, cfg, y0, metric, clock),
        Method::VuCondat => vu_condat::run(problem, cfg, y0, metric, clock),
        Method::AccProxGrad => apg::run(problem, cfg, y0, metric, clock),
    }
}

/// Running minimum of the objective column.
pub fn best_so_far(trace: &ConvergenceTrace) -> Vec<f64> {
    let mut best = f64::INFINITY;
    trace
        .records
        .iter()
        .map(|r| {
            if r.objective < best {
                best = r.objective;
            }
            best
        })
        .collect()
}
