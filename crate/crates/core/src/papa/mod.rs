//! Proximal alternating penalty solvers.
//!
//! Two base methods share one driver:
//!
//! - [`Variant::NonStrong`]: `ρ_k = ρ₀(k+1)`, momentum `k/(k+2)`, `O(1/k)`.
//! - [`Variant::SemiStrong`]: needs a strongly convex `g` (or `h`), uses the
//!   `τ_k` recurrence with `ρ_k = ρ₀/τ_k²`, `O(1/k²)`.
//!
//! Both accept an optional smooth term `h(y)`, a linearized x-step, periodic
//! restarting with a shifted penalty, and per-iteration inequality diagnostics.

pub mod composite;
pub mod conic;
pub mod diagnostics;
pub mod restart;
pub mod schedule;
pub mod step;

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::prox::ProxCache;
use crate::vector::sqrt;

pub use diagnostics::DiagnosticRecord;
pub use step::StepInfo;
pub use restart::ShiftUpdate;
pub use schedule::{tau_next, tighter_tau_rho_next};

/// Fallback strong-convexity modulus when none is declared.
pub const DEFAULT_MU_G: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    NonStrong,
    SemiStrong,
}

/// How the semi-strong method forms `y^{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YOption {
    /// `y⁺ = (1−τ)y + τỹ⁺`
    Averaging,
    /// An extra prox-gradient step from `ŷ`.
    Proximal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauRule {
    Standard,
    Tighter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XMode {
    Exact,
    Linearized,
}

/// Which term carries the strong convexity when the semi-strong method runs
/// with a smooth term `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothCase {
    /// `μ_g > 0`, gradient of `h` at `ŷ`, `β̂ = ρ‖B‖² + L_h`.
    StrongG,
    /// `L_h < 2μ_h`, gradient of `h` at `ỹ`, `β̂ = ρ‖B‖² + L_h/τ`.
    StrongH,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Defaults: `1/‖B‖` (non-strong), `μ_g/(2‖B‖²)` (semi-strong).
    pub rho0: Option<f64>,
    pub gamma0: f64,
    /// Overrides the modulus of `g`.
    pub mu_g: Option<f64>,
    pub option: YOption,
    pub tau_rule: TauRule,
    pub x_mode: XMode,
    pub smooth_case: SmoothCase,
    pub restart_period: Option<usize>,
    pub shift_update: ShiftUpdate,
    /// `false` keeps `ẑ = z̃ = z` (non-strong method only).
    pub accelerated: bool,
    pub max_iters: usize,
    pub record_diagnostics: bool,
    /// Lets `ρ₀` exceed the semi-strong safe bound; the run is annotated.
    pub allow_unsafe_rho0: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            variant: Variant::NonStrong,
            rho0: None,
            gamma0: 0.0,
            mu_g: None,
            option: YOption::Averaging,
            tau_rule: TauRule::Standard,
            x_mode: XMode::Exact,
            smooth_case: SmoothCase::StrongG,
            restart_period: None,
            shift_update: ShiftUpdate::Replace,
            accelerated: true,
            max_iters: 1000,
            record_diagnostics: false,
            allow_unsafe_rho0: false,
        }
    }
}

impl SolverConfig {
    pub fn nonstrong(max_iters: usize) -> Self {
        SolverConfig {
            max_iters,
            ..Default::default()
        }
    }

    pub fn semistrong(max_iters: usize) -> Self {
        SolverConfig {
            variant: Variant::SemiStrong,
            max_iters,
            ..Default::default()
        }
    }

    pub fn with_restart(mut self, period: usize) -> Self {
        self.restart_period = Some(period);
        self
    }

    /// Checks the configuration against `problem` and fills in defaults.
    pub fn resolve(&self, problem: &ProblemInstance) -> Result<Resolved> {
        let b2 = problem.b_norm_sq;
        if !(b2 > 0.0) {
            return Err(Error::Config("‖B‖² must be positive".into()));
        }
        if let Some(p) = self.restart_period {
            if p < 2 {
                return Err(Error::Config("restart period must be at least 2".into()));
            }
        }
        if !(self.gamma0 >= 0.0) {
            return Err(Error::Config("gamma0 must be nonnegative".into()));
        }
        if self.x_mode == XMode::Exact && problem.x_solver.is_none() {
            return Err(Error::Config(
                "exact x-step requested but the problem supplies no x-solver".into(),
            ));
        }
        if self.variant == Variant::SemiStrong && self.x_mode != XMode::Exact {
            return Err(Error::Config("the semi-strong method needs the exact x-step".into()));
        }
        if !self.accelerated && self.variant == Variant::SemiStrong {
            return Err(Error::Config("the non-accelerated mode applies to the non-strong method only".into()));
        }
        let declared = self.mu_g.unwrap_or(problem.g.mu());
        let mu_g = if declared > 0.0 { declared } else { DEFAULT_MU_G };
        let (l_h, mu_h) = problem.h.as_ref().map_or((0.0, 0.0), |h| (h.lip(), h.mu()));
        let mut notes = Vec::new();
        if declared <= 0.0 && self.variant == Variant::SemiStrong {
            notes.push(alloc::format!("no modulus declared for g; using mu_g = {DEFAULT_MU_G}"));
        }
        let safe_rho0 = match (self.variant, problem.h.is_some(), self.smooth_case) {
            (Variant::NonStrong, _, _) => f64::INFINITY,
            (Variant::SemiStrong, true, SmoothCase::StrongH) => {
                if !(l_h < 2.0 * mu_h) {
                    return Err(Error::Config(alloc::format!(
                        "smooth case StrongH needs L_h < 2 mu_h, got L_h = {l_h}, mu_h = {mu_h}"
                    )));
                }
                (declared.max(0.0) + 2.0 * mu_h - l_h) / (2.0 * b2)
            }
            (Variant::SemiStrong, true, SmoothCase::StrongG) => {
                if !(declared > 0.0) {
                    return Err(Error::Config("smooth case StrongG needs mu_g > 0".into()));
                }
                declared / (2.0 * b2)
            }
            (Variant::SemiStrong, false, _) => mu_g / (2.0 * b2),
        };
        let rho0 = match (self.rho0, self.variant) {
            (Some(r), _) => r,
            (None, Variant::NonStrong) => 1.0 / sqrt(b2),
            (None, Variant::SemiStrong) => safe_rho0,
        };
        if !(rho0 > 0.0 && rho0.is_finite()) {
            return Err(Error::Config(alloc::format!("rho0 must be positive and finite, got {rho0}")));
        }
        if self.variant == Variant::SemiStrong && self.tau_rule == TauRule::Standard && rho0 > safe_rho0 * (1.0 + 1e-12) {
            let msg = alloc::format!("rho0 = {rho0} exceeds the safe bound {safe_rho0}");
            if self.allow_unsafe_rho0 {
                notes.push(msg);
            } else {
                return Err(Error::Config(msg));
            }
        }
        if self.record_diagnostics {
            if self.restart_period.is_some() || self.x_mode != XMode::Exact || problem.h.is_some() || !self.accelerated {
                return Err(Error::Config(
                    "diagnostics need the exact x-step, no restart, no smooth term, and acceleration".into(),
                ));
            }
            if problem.reference.as_ref().and_then(|r| r.x_star.as_ref()).is_none() {
                return Err(Error::Config("diagnostics need a reference solution (x*, y*)".into()));
            }
        }
        Ok(Resolved {
            rho0,
            gamma0: self.gamma0,
            mu_g,
            b_norm_sq: b2,
            a_norm_sq: problem.a_norm_sq,
            l_h,
            mu_h,
            notes,
        })
    }
}

/// Parameters after defaults are filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub rho0: f64,
    pub gamma0: f64,
    pub mu_g: f64,
    pub b_norm_sq: f64,
    pub a_norm_sq: f64,
    pub l_h: f64,
    pub mu_h: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Global iteration counter.
    pub k: usize,
    /// Iterations since the last restart; schedules are indexed by it.
    pub j: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub y_hat: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub y_tilde: Vec<f64>,
    pub tau: f64,
    pub rho: f64,
    pub gamma: f64,
    pub lambda0: Option<Vec<f64>>,
}

impl SolverState {
    pub fn new(x0: Vec<f64>, y0: Vec<f64>, params: &Resolved) -> Self {
        SolverState {
            k: 0,
            j: 0,
            x_hat: x0.clone(),
            x_tilde: x0.clone(),
            x: x0,
            y_hat: y0.clone(),
            y_tilde: y0.clone(),
            y: y0,
            tau: 1.0,
            rho: params.rho0,
            gamma: params.gamma0,
            lambda0: None,
        }
    }

    /// Zero start.
    pub fn zeros(problem: &ProblemInstance, params: &Resolved) -> Self {
        Self::new(alloc::vec![0.0; problem.dim_x()], alloc::vec![0.0; problem.dim_y()], params)
    }
}

/// Source of wall-clock time; the core crate never reads a clock itself.
pub trait Clock {
    fn elapsed_ms(&self) -> f64;
}

/// Reports zero elapsed time, which keeps traces byte-reproducible.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_ms(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub objective: f64,
    /// `dist_K(Ax + By − c)`
    pub dist: f64,
    /// Benchmark-specific violation measure.
    pub feasibility: f64,
    /// Unshifted `ψ(z)`.
    pub psi: f64,
    pub rho: f64,
    pub tau: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
    pub diagnostics: Vec<DiagnosticRecord>,
    pub notes: Vec<String>,
    pub restarts: Vec<usize>,
    pub final_x: Vec<f64>,
    pub final_y: Vec<f64>,
}

impl ConvergenceTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

/// Per-run mutable helpers.
#[derive(Debug, Default)]
pub struct Workspace {
    pub f_cache: ProxCache,
    pub g_cache: ProxCache,
}

fn record(problem: &ProblemInstance, s: &SolverState, wall_ms: f64) -> Result<TraceRecord> {
    let r = problem.penalty.residual(&s.x, &s.y)?;
    let (psi, sv) = problem.penalty.psi_at_residual(&r, 1.0, None)?;
    Ok(TraceRecord {
        k: s.k,
        objective: problem.objective(&s.x, &s.y)?,
        dist: crate::vector::norm(&sv),
        feasibility: problem.reported_feasibility(&s.x, &s.y)?,
        psi,
        rho: s.rho,
        tau: s.tau,
        wall_ms,
    })
}

/// Runs the configured solver from `(x⁰, y⁰) = 0`.
pub fn run(problem: &ProblemInstance, cfg: &SolverConfig) -> Result<ConvergenceTrace> {
    run_from(problem, cfg, None, &NoClock)
}

/// Runs from an optional start `(x⁰, y⁰)` with a caller-provided clock.
pub fn run_from(
    problem: &ProblemInstance,
    cfg: &SolverConfig,
    start: Option<(Vec<f64>, Vec<f64>)>,
    clock: &dyn Clock,
) -> Result<ConvergenceTrace> {
    let params = cfg.resolve(problem)?;
    let state = match start {
        Some((x0, y0)) => {
            crate::error::check_len("run: x0", problem.dim_x(), x0.len())?;
            crate::error::check_len("run: y0", problem.dim_y(), y0.len())?;
            SolverState::new(x0, y0, &params)
        }
        None => SolverState::zeros(problem, &params),
    };
    drive(problem, cfg, &params, state, clock, |st: &mut SolverState, ws: &mut Workspace| {
        step::iterate(problem, st, cfg, &params, ws)
    })
}

/// Shared loop: steps, optional diagnostics, periodic restarts, records.
pub(crate) fn drive<F>(
    problem: &ProblemInstance,
    cfg: &SolverConfig,
    params: &Resolved,
    mut state: SolverState,
    clock: &dyn Clock,
    mut step_fn: F,
) -> Result<ConvergenceTrace>
where
    F: FnMut(&mut SolverState, &mut Workspace) -> Result<step::StepInfo>,
{
    let mut ws = Workspace::default();
    let mut trace = ConvergenceTrace {
        notes: params.notes.clone(),
        ..Default::default()
    };
    let base = clock.elapsed_ms();
    trace.records.push(record(problem, &state, 0.0)?);
    let mut rho_prev: Option<f64> = None;
    for _ in 0..cfg.max_iters {
        let prev = if cfg.record_diagnostics { Some(state.clone()) } else { None };
        let info = step_fn(&mut state, &mut ws)?;
        if let Some(prev) = prev {
            trace
                .diagnostics
                .push(diagnostics::evaluate(problem, &prev, &state, &info, params, cfg.variant, rho_prev)?);
        }
        rho_prev = Some(info.rho_used);
        if let Some(p) = cfg.restart_period {
            if state.k.is_multiple_of(p) {
                restart::restart(problem, &mut state, &info, params, cfg.shift_update)?;
                trace.restarts.push(state.k);
                rho_prev = None;
            }
        }
        trace.records.push(record(problem, &state, clock.elapsed_ms() - base)?);
    }
    trace.final_x = state.x;
    trace.final_y = state.y;
    Ok(trace)
}
