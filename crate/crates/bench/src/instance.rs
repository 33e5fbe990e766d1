//! Benchmark instances together with their reference values.

use papa_core::problems::{
    fstar_crosscheck, gen_conic_lp, gen_elastic_sqrt, gen_qp, gen_sqrt_loss_composite, gen_tv_recon,
    long_run_reference, qp_reference, sqrt_loss_reference, InstanceSpec,
};
use papa_core::{CompositeProblem, ProblemInstance};
use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// Closed form or verified KKT point.
    Exact,
    /// Agreement of two different methods; no solution vector.
    Crosscheck,
    /// Restarted long run; approximate solution vector.
    LongRun,
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub spec: InstanceSpec,
    /// Template form, with the reference attached when a solution vector is
    /// known.
    pub template: ProblemInstance,
    /// `min f(Ly) + g(y) [+ h(y)]` view used by the composite schemes and
    /// the baselines.
    pub composite: CompositeProblem,
    pub f_star: f64,
    pub f_star_err: f64,
    pub reference_kind: ReferenceKind,
}

/// Generates the instance and its reference. `reference_budget` is used
/// only for benchmarks without an exact oracle.
pub fn prepare(spec: &InstanceSpec, reference_budget: usize) -> Result<Prepared, BenchError> {
    let mut native = None;
    let (template, reference_kind) = match *spec {
        InstanceSpec::Qp {
            p2,
            n,
            strongly_convex,
            seed,
        } => {
            let inst = gen_qp(p2, n, strongly_convex, seed)?;
            let sol = qp_reference(&inst.data, &inst.problem)?;
            let r = sol.reference(&inst.data);
            (inst.problem.with_reference(r), ReferenceKind::Exact)
        }
        InstanceSpec::ElasticSqrt {
            p2,
            n,
            s,
            kappa1,
            kappa2,
            noise_sigma,
            seed,
        } => (
            gen_elastic_sqrt(p2, n, s, kappa1, kappa2, noise_sigma, seed)?.problem,
            ReferenceKind::Crosscheck,
        ),
        InstanceSpec::TvRecon {
            height,
            width,
            sample_rate,
            kappa,
            noise_sigma,
            seed,
        } => {
            let inst = gen_tv_recon(height, width, sample_rate, kappa, noise_sigma, seed)?;
            // |λ*_i| ≤ κ from the optimality condition of κ‖·‖₁.
            let lam = kappa * (inst.problem.dim_x() as f64).sqrt();
            let r = long_run_reference(&inst.problem, reference_budget, lam)?;
            (inst.problem.with_reference(r), ReferenceKind::LongRun)
        }
        InstanceSpec::SqrtLoss { p, kappa1, kappa2, seed } => {
            let inst = gen_sqrt_loss_composite(p, kappa1, kappa2, seed)?;
            let r = sqrt_loss_reference(&inst.c, kappa1, kappa2)?;
            let t = inst.problem.to_template()?.with_reference(r);
            // keep L = I literally so the prox-prox schemes apply
            native = Some(inst.problem);
            (t, ReferenceKind::Exact)
        }
        InstanceSpec::ConicLp => (gen_conic_lp()?.problem, ReferenceKind::Exact),
    };
    let composite = match native {
        Some(c) => c,
        None => template.as_composite()?,
    };
    let (f_star, f_star_err) = match &template.reference {
        Some(r) => (r.f_star, r.f_star_err),
        None => {
            let cc = fstar_crosscheck(&composite, reference_budget)?;
            (cc.f_star, cc.err)
        }
    };
    Ok(Prepared {
        spec: spec.clone(),
        template,
        composite,
        f_star,
        f_star_err,
        reference_kind,
    })
}

/// `|F − F*| / max(1, |F*|)`
pub fn relative_residual(objective: f64, f_star: f64) -> f64 {
    (objective - f_star).abs() / f_star.abs().max(1.0)
}
