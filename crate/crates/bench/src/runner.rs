//! Runs every solver of an experiment on one prepared instance.

use std::path::Path;
use std::time::Instant;

use papa_core::baselines;
use papa_core::certify::{check_trace, rate_slope, template_inputs, BoundInputs};
use papa_core::papa::composite::{self, Scheme};
use papa_core::papa::{self, conic, Clock, ConvergenceTrace, NoClock, Variant};

use crate::config::{ExperimentConfig, SolverEntry, SolverMethod};
use crate::instance::{prepare, Prepared};
use crate::output::{
    csv_bytes, rows, summary_json, BoundOutcome, OracleFile, RateReport, ReferenceSummary, SolverSummary, Summary,
};
use crate::BenchError;

/// Bound checks tolerate this relative slack.
pub const BOUND_TOL: f64 = 1e-8;

struct WallClock(Instant);

impl Clock for WallClock {
    fn elapsed_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

/// One solver's output.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub entry: SolverEntry,
    pub trace: ConvergenceTrace,
    pub csv: Vec<u8>,
    pub oracle: Option<OracleFile>,
    pub summary: SolverSummary,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub prepared: Prepared,
    pub runs: Vec<SolverRun>,
    pub summary: Summary,
}

impl ExperimentOutput {
    pub fn run(&self, name: &str) -> Option<&SolverRun> {
        self.runs.iter().find(|r| r.entry.name == name)
    }

    /// Writes `<name>.csv`, `<name>.oracle.json` (when bound inputs exist)
    /// and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), BenchError> {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::Io(dir.to_path_buf(), e))?;
        let put = |name: String, bytes: &[u8]| -> Result<(), BenchError> {
            let p = dir.join(name);
            std::fs::write(&p, bytes).map_err(|e| BenchError::Io(p, e))
        };
        for r in &self.runs {
            put(format!("{}.csv", r.entry.name), &r.csv)?;
            if let Some(o) = &r.oracle {
                let mut text = serde_json::to_string_pretty(o).map_err(|e| BenchError::Config(e.to_string()))?;
                text.push('\n');
                put(format!("{}.oracle.json", r.entry.name), text.as_bytes())?;
            }
        }
        put("summary.json".into(), summary_json(&self.summary)?.as_bytes())
    }
}

/// Prepares the benchmark, then runs all solvers (in parallel threads).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, BenchError> {
    cfg.validate()?;
    let prepared = prepare(&cfg.instance_spec(), cfg.reference.budget)?;
    run_on(cfg, prepared)
}

/// Runs all solvers of `cfg` on an already prepared instance.
pub fn run_on(cfg: &ExperimentConfig, prepared: Prepared) -> Result<ExperimentOutput, BenchError> {
    cfg.validate()?;
    let results: Vec<Result<SolverRun, BenchError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .solvers
            .iter()
            .map(|entry| {
                let prepared = &prepared;
                scope.spawn(move || run_solver(cfg, prepared, entry))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(BenchError::Config("solver thread panicked".into()))))
            .collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary = Summary {
        experiment: cfg.name.clone(),
        benchmark: prepared.spec.clone(),
        budget: cfg.budget,
        reference: ReferenceSummary {
            kind: prepared.reference_kind,
            f_star: prepared.f_star,
            f_star_err: prepared.f_star_err,
        },
        solvers: runs.iter().map(|r| r.summary.clone()).collect(),
    };
    Ok(ExperimentOutput { prepared, runs, summary })
}

fn kebab<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn method_label(m: &SolverMethod) -> String {
    match m {
        SolverMethod::Papa { config } => match config.variant {
            Variant::NonStrong => "papa".into(),
            Variant::SemiStrong => "scvx-papa".into(),
        },
        SolverMethod::Conic { .. } => "conic".into(),
        SolverMethod::Composite { scheme, .. } => kebab(scheme),
        SolverMethod::Baseline { config } => kebab(&config.method),
    }
}

fn run_solver(cfg: &ExperimentConfig, p: &Prepared, entry: &SolverEntry) -> Result<SolverRun, BenchError> {
    let budget = cfg.budget;
    let clock: Box<dyn Clock + Sync> = if cfg.wall_clock {
        Box::new(WallClock(Instant::now()))
    } else {
        Box::new(NoClock)
    };
    let clock = clock.as_ref();
    let y0 = vec![0.0; p.composite.dim()];
    let mut notes = Vec::new();
    let (trace, inputs) = match &entry.method {
        SolverMethod::Papa { config } => {
            let c = papa::SolverConfig {
                max_iters: budget,
                ..config.clone()
            };
            let t = papa::run_from(&p.template, &c, None, clock)?;
            (t, template_bound_inputs(p, &c, &mut notes))
        }
        SolverMethod::Conic { config } => {
            let c = papa::SolverConfig {
                max_iters: budget,
                variant: Variant::NonStrong,
                ..config.clone()
            };
            let t = conic::run(&p.template, &c, clock)?;
            (t, template_bound_inputs(p, &c, &mut notes))
        }
        SolverMethod::Composite { scheme, rho0 } => {
            let t = composite::run(&p.composite, *scheme, *rho0, y0, budget, clock)?;
            (t, composite_bound_inputs(p, *scheme, *rho0, &mut notes))
        }
        SolverMethod::Baseline { config } => {
            let c = baselines::BaselineConfig {
                max_iters: budget,
                ..config.clone()
            };
            let t = baselines::run(&p.composite, &c, y0, Some(&p.template.feasibility), clock)?;
            (t, None)
        }
    };
    notes.extend(trace.notes.iter().cloned());

    let table = rows(&trace.records, p.f_star);
    let csv = csv_bytes(&table)?;
    let window = cfg.window();
    let ks: Vec<usize> = table.iter().map(|r| r.k).collect();
    let rel: Vec<f64> = table.iter().map(|r| r.rel_obj_residual).collect();
    let dist: Vec<f64> = table.iter().map(|r| r.dist_k).collect();
    let mut rate_notes = Vec::new();
    let mut fit = |vals: &[f64], what: &str| match rate_slope(&ks, vals, window.0, window.1) {
        Ok(f) => {
            if f.skipped > 0 {
                rate_notes.push(format!("{what}: skipped {} nonpositive points", f.skipped));
            }
            Some(f.slope)
        }
        Err(e) => {
            rate_notes.push(format!("{what}: {e}"));
            None
        }
    };
    let objective_slope = fit(&rel, "objective");
    let feasibility_slope = fit(&dist, "feasibility");

    let (bounds, oracle) = match (entry.theorem, inputs) {
        (None, inputs) => (
            BoundOutcome::NotRequested,
            inputs.map(|inputs| OracleFile {
                f_star: p.f_star,
                f_star_err: p.f_star_err,
                inputs,
                theorem: None,
            }),
        ),
        (Some(_), None) => (
            BoundOutcome::Skipped {
                reason: notes
                    .iter()
                    .find(|n| n.starts_with("bounds:"))
                    .cloned()
                    .unwrap_or_else(|| format!("no bound family applies to {}", method_label(&entry.method))),
            },
            None,
        ),
        (Some(th), Some(inputs)) => {
            let report = check_trace(&trace.records, th, &inputs, p.f_star, p.f_star_err, BOUND_TOL);
            (
                BoundOutcome::Checked { report },
                Some(OracleFile {
                    f_star: p.f_star,
                    f_star_err: p.f_star_err,
                    inputs,
                    theorem: Some(th),
                }),
            )
        }
    };
    let (bound_violations, worst_slack) = match &bounds {
        BoundOutcome::Checked { report } => {
            let worst = match (report.worst_objective_slack, report.worst_feasibility_slack) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            (Some(report.violations), worst)
        }
        _ => (None, None),
    };

    let last = table.last().copied().ok_or_else(|| BenchError::Config("empty trace".into()))?;
    let summary = SolverSummary {
        name: entry.name.clone(),
        method: method_label(&entry.method),
        trace_file: format!("{}.csv", entry.name),
        iterations: trace.iterations(),
        final_objective: last.objective,
        final_rel_obj_residual: last.rel_obj_residual,
        best_rel_obj_residual: rel.iter().copied().fold(f64::INFINITY, f64::min),
        final_feasibility: last.feasibility,
        final_dist: last.dist_k,
        hit_1e_8: table.iter().find(|r| r.rel_obj_residual < 1e-8).map(|r| r.k),
        restarts: trace.restarts.len(),
        rate: RateReport {
            window,
            objective_slope,
            feasibility_slope,
            bound_violations,
            worst_slack,
            notes: rate_notes,
        },
        bounds,
        notes: notes.into_iter().filter(|n| !n.starts_with("bounds:")).collect(),
    };
    Ok(SolverRun {
        entry: entry.clone(),
        trace,
        csv,
        oracle,
        summary,
    })
}

fn template_bound_inputs(p: &Prepared, c: &papa::SolverConfig, notes: &mut Vec<String>) -> Option<BoundInputs> {
    if p.template.reference.as_ref().and_then(|r| r.y_star.as_ref()).is_none() {
        notes.push("bounds: no reference solution available".into());
        return None;
    }
    if c.restart_period.is_some() {
        notes.push("bounds: restarted runs are not covered by the bounds".into());
        return None;
    }
    let x0 = vec![0.0; p.template.dim_x()];
    let y0 = vec![0.0; p.template.dim_y()];
    match template_inputs(&p.template, c, &x0, &y0) {
        Ok(i) => Some(i),
        Err(e) => {
            notes.push(format!("bounds: {e}"));
            None
        }
    }
}

fn composite_bound_inputs(p: &Prepared, scheme: Scheme, rho0: Option<f64>, notes: &mut Vec<String>) -> Option<BoundInputs> {
    let Some(ys) = p.template.reference.as_ref().and_then(|r| r.y_star.as_ref()) else {
        notes.push("bounds: no reference solution available".into());
        return None;
    };
    let Some(l_f) = p.composite.f.lipschitz(p.composite.l.rows()) else {
        notes.push("bounds: f is not Lipschitz continuous".into());
        return None;
    };
    let rho0 = match rho0.map(Ok).unwrap_or_else(|| composite::default_rho0(&p.composite, scheme)) {
        Ok(r) => r,
        Err(e) => {
            notes.push(format!("bounds: {e}"));
            return None;
        }
    };
    let pad = if p.template.reference.as_ref().is_some_and(|r| r.exact) { 1.0 } else { 1.001 };
    Some(BoundInputs {
        rho0,
        gamma0: 0.0,
        b_norm_sq: p.composite.l_norm_sq,
        l_h: 0.0,
        x0_dist: 0.0,
        y0_dist: pad * ys.iter().map(|v| v * v).sum::<f64>().sqrt(),
        lambda_norm: 0.0,
        l_f,
        accelerated: scheme.is_scvx(),
    })
}
