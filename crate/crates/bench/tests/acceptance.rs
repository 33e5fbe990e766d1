//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use papa_bench::instance::{prepare, relative_residual, Prepared};
use papa_bench::output::BoundOutcome;
use papa_bench::runner::{run_on, ExperimentOutput};
use papa_bench::{run_experiment, ExperimentConfig};
use papa_core::certify::{check_trace, rate_slope, template_inputs, BoundInputs, BoundReport, Theorem};
use papa_core::dense::{solve_complete_pivot, Matrix};
use papa_core::papa::composite::{self, CompositeState, CompositeWorkspace, Scheme};
use papa_core::papa::{conic, run, step, ConvergenceTrace, NoClock, SolverConfig, SolverState, TauRule, Workspace, YOption};
use papa_core::penalty::{grad_phi, phi, PenaltySpec};
use papa_core::problems::{
    fstar_crosscheck, gen_conic_lp, gen_qp, gen_sqrt_loss_composite, qp_active_set_oracle, qp_reference,
    InstanceSpec,
};
use papa_core::{CompositeProblem, ConvexSet, LinearMap, ProblemInstance, ProxFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type Outcome = Result<String, String>;

const SLACK: f64 = 1e-8;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rvec(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-r..r)).collect()
}

fn qp_instance(n: usize, strong: bool, seed: u64, enumerate: bool) -> Result<ProblemInstance, String> {
    let inst = gen_qp(n, n, strong, seed).map_err(e2s)?;
    let sol = if enumerate {
        qp_active_set_oracle(&inst.data)
    } else {
        qp_reference(&inst.data, &inst.problem)
    }
    .map_err(e2s)?;
    ensure(sol.kkt_residual < 1e-9, || format!("reference KKT residual {:.2e}", sol.kkt_residual))?;
    Ok(inst.problem.clone().with_reference(sol.reference(&inst.data)))
}

fn certify_run(p: &ProblemInstance, cfg: &SolverConfig, theorem: Theorem) -> Result<(ConvergenceTrace, BoundReport), String> {
    let t = run(p, cfg).map_err(e2s)?;
    let r = p.reference.as_ref().ok_or("no reference")?;
    let inputs = template_inputs(p, cfg, &vec![0.0; p.dim_x()], &vec![0.0; p.dim_y()]).map_err(e2s)?;
    let rep = check_trace(&t.records, theorem, &inputs, r.f_star, r.f_star_err, SLACK);
    ensure(rep.checked == cfg.max_iters, || format!("checked {} of {} iterates", rep.checked, cfg.max_iters))?;
    Ok((t, rep))
}

fn slack_str(rep: &BoundReport) -> String {
    let f = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.3}"));
    format!("slack obj {} feas {}", f(rep.worst_objective_slack), f(rep.worst_feasibility_slack))
}

fn c1_nonstrong_bounds() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let small = qp_instance(10, false, 2024, true)?;
    let (_, rep) = certify_run(&small, &SolverConfig::nonstrong(2000), Theorem::T1)?;
    ensure(rep.passed, || format!("n=10: {rep:?}"))?;
    parts.push(format!("n=10 {}", slack_str(&rep)));

    let inst = gen_qp(60, 60, false, 2024).map_err(e2s)?;
    let sol = qp_reference(&inst.data, &inst.problem).map_err(e2s)?;
    let big = inst.problem.clone().with_reference(sol.reference(&inst.data));
    let cc = fstar_crosscheck(&big.as_composite().map_err(e2s)?, 5000).map_err(e2s)?;
    let agree = (cc.f_star - sol.f_star).abs();
    ensure(agree <= cc.err.max(1e-6 * sol.f_star.abs().max(1.0)), || {
        format!("n=60 oracle {} vs crosscheck {} ± {:.1e}", sol.f_star, cc.f_star, cc.err)
    })?;
    let (_, rep) = certify_run(&big, &SolverConfig::nonstrong(2000), Theorem::T1)?;
    ensure(rep.passed, || format!("n=60: {rep:?}"))?;
    parts.push(format!("n=60 {} (crosscheck gap {agree:.1e})", slack_str(&rep)));
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{}; {secs:.1} s", parts.join("; ")))
}

fn c2_semistrong_bounds() -> Outcome {
    let start = Instant::now();
    let p = qp_instance(60, true, 2024, false)?;
    let mut parts = Vec::new();
    for option in [YOption::Averaging, YOption::Proximal] {
        for tau_rule in [TauRule::Standard, TauRule::Tighter] {
            let cfg = SolverConfig {
                option,
                tau_rule,
                ..SolverConfig::semistrong(2000)
            };
            let (_, rep) = certify_run(&p, &cfg, Theorem::T2)?;
            ensure(rep.passed, || format!("{option:?}/{tau_rule:?}: {rep:?}"))?;
            parts.push(format!("{option:?}/{tau_rule:?} {}", slack_str(&rep)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{}; {secs:.1} s", parts.join("; ")))
}

fn slopes(t: &ConvergenceTrace, f_star: f64) -> Result<(f64, f64), String> {
    let ks: Vec<usize> = t.records.iter().map(|r| r.k).collect();
    let gap: Vec<f64> = t.records.iter().map(|r| (r.objective - f_star).abs()).collect();
    let dist: Vec<f64> = t.records.iter().map(|r| r.dist).collect();
    let a = rate_slope(&ks, &gap, 250, 1000).map_err(e2s)?;
    let b = rate_slope(&ks, &dist, 250, 1000).map_err(e2s)?;
    Ok((a.slope, b.slope))
}

fn c3_rates() -> Outcome {
    let p1 = qp_instance(60, false, 2024, false)?;
    let t1 = run(&p1, &SolverConfig::nonstrong(1000)).map_err(e2s)?;
    let (o1, d1) = slopes(&t1, p1.reference.as_ref().unwrap().f_star)?;
    let p2 = qp_instance(60, true, 2024, false)?;
    let t2 = run(&p2, &SolverConfig::semistrong(1000)).map_err(e2s)?;
    let (o2, d2) = slopes(&t2, p2.reference.as_ref().unwrap().f_star)?;
    let msg = format!("nonstrong obj {o1:.3} feas {d1:.3}; semistrong obj {o2:.3} feas {d2:.3}");
    ensure(o1 <= -0.8 && d1 <= -0.8 && o2 <= -1.6 && d2 <= -1.6, || msg.clone())?;
    Ok(msg)
}

fn c4_inequalities() -> Outcome {
    let mut points = 0;
    let qp = qp_instance(10, false, 4, true)?;
    let conic_lp = gen_conic_lp().map_err(e2s)?.problem;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for p in [&qp, &conic_lp] {
        let r = p.reference.as_ref().unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = match &p.f.kind() {
                papa_core::ProxKind::BoxIndicator { lo, hi } => {
                    lo.iter().zip(hi).map(|(a, b)| rng.random_range(*a..=*b)).collect()
                }
                _ => (0..p.dim_x()).map(|_| rng.random_range(0.0..5.0)).collect(),
            };
            let y = rvec(&mut rng, p.dim_y(), 4.0);
            let rho = 10f64.powf(rng.random_range(-2.0..3.0));
            let f = p.objective(&x, &y).map_err(e2s)?;
            ensure(f.is_finite(), || "sample outside dom F".into())?;
            let cert = p.penalty.certificate_bounds(rho, f, r.f_star, r.lambda_norm, &x, &y).map_err(e2s)?;
            let tol = SLACK * (1.0 + r.f_star.abs());
            let gap = f - r.f_star;
            ensure(
                gap >= cert.obj_lower - tol && gap <= cert.obj_upper + tol && cert.dist <= cert.feas_upper + tol,
                || format!("certificate violated at rho={rho}: {cert:?}, gap {gap}"),
            )?;
            points += 1;
        }
    }

    let mut runs = 0;
    let sc = qp_instance(10, true, 4, true)?;
    let mut cfgs = vec![(&qp, SolverConfig::nonstrong(200))];
    for option in [YOption::Averaging, YOption::Proximal] {
        for tau_rule in [TauRule::Standard, TauRule::Tighter] {
            cfgs.push((
                &sc,
                SolverConfig {
                    option,
                    tau_rule,
                    ..SolverConfig::semistrong(200)
                },
            ));
        }
    }
    let mut worst = f64::INFINITY;
    for (p, cfg) in cfgs {
        let cfg = SolverConfig {
            record_diagnostics: true,
            ..cfg
        };
        let t = run(p, &cfg).map_err(e2s)?;
        ensure(t.diagnostics.len() == 200, || format!("{} diagnostic records", t.diagnostics.len()))?;
        let bad: Vec<String> = t.diagnostics.iter().flat_map(|d| d.violations(SLACK)).collect();
        ensure(bad.is_empty(), || format!("{:?}/{:?}: {bad:?}", cfg.variant, cfg.option))?;
        worst = t.diagnostics.iter().map(|d| d.worst() / d.scale).fold(worst, f64::min);
        runs += 1;
    }
    Ok(format!("{points} certificate points; {runs}×200 diagnostic steps, worst scaled slack {worst:.2e}"))
}

/// `prox_{t f*}(v)` from hand-derived conjugates.
fn conj_prox_reference(f: &ProxFunction, t: f64, v: &[f64]) -> Result<Vec<f64>, String> {
    use papa_core::ProxKind as K;
    let v: Vec<f64> = match f.center() {
        Some(c) => v.iter().zip(c).map(|(a, b)| a - t * b).collect(),
        None => v.to_vec(),
    };
    let soc = |v: &[f64]| -> Vec<f64> {
        let (s, x) = (v[0], &v[1..]);
        let r = norm(x);
        if r <= s {
            v.to_vec()
        } else if r <= -s {
            vec![0.0; v.len()]
        } else {
            let a = 0.5 * (s + r);
            std::iter::once(a).chain(x.iter().map(|xi| a * xi / r)).collect()
        }
    };
    Ok(match f.kind() {
        K::Zero => vec![0.0; v.len()],
        K::Linear(q) => q.clone(),
        K::SquaredL2(k) => v.iter().map(|a| a / (1.0 + t / k)).collect(),
        K::L1(k) => v.iter().map(|a| a.clamp(-k, *k)).collect(),
        K::Elastic { kappa1, kappa2 } => v
            .iter()
            .map(|a| {
                if a.abs() <= *kappa2 {
                    *a
                } else {
                    a.signum() * (kappa2 * t + a.abs() * kappa1) / (t + kappa1)
                }
            })
            .collect(),
        K::L2Norm => {
            let r = norm(&v);
            v.iter().map(|a| a / r.max(1.0)).collect()
        }
        K::BoxIndicator { lo, hi } | K::SetIndicator(ConvexSet::Box { lo, hi }) => v
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(a, (l, h))| {
                if *a > t * h {
                    a - t * h
                } else if *a < t * l {
                    a - t * l
                } else {
                    0.0
                }
            })
            .collect(),
        K::SetIndicator(ConvexSet::SingletonZero(_)) => v,
        K::SetIndicator(ConvexSet::NonnegOrthant(_)) => v.iter().map(|a| a.min(0.0)).collect(),
        // polar of the second-order cone is its negative
        K::SetIndicator(ConvexSet::SecondOrderCone(_)) => {
            let neg: Vec<f64> = v.iter().map(|a| -a).collect();
            soc(&neg).iter().map(|a| -a).collect()
        }
        // (tI + Q) u = t q + Q v
        K::Quadratic { q_mat, q } => {
            let m = q_mat.shifted(1.0, t);
            let qv = q_mat.matvec(&v);
            let rhs: Vec<f64> = q.iter().zip(&qv).map(|(a, b)| t * a + b).collect();
            solve_complete_pivot(&m, &rhs, 1e-14).map_err(e2s)?.x
        }
    })
}

fn all_kinds(n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<ProxFunction>, String> {
    let m = Matrix::from_row_major(n, n, rvec(rng, n * n, 1.0)).map_err(e2s)?;
    let q_mat = m.transpose().matmul(&m).map_err(e2s)?.shifted(1.0, 0.1);
    let lo = rvec(rng, n, 1.0).iter().map(|a| a - 1.5).collect::<Vec<_>>();
    let hi = rvec(rng, n, 1.0).iter().map(|a| a + 1.5).collect::<Vec<_>>();
    let mut out = vec![
        ProxFunction::zero(),
        ProxFunction::linear(rvec(rng, n, 2.0)),
        ProxFunction::squared_l2(1.7).map_err(e2s)?,
        ProxFunction::l1(0.6).map_err(e2s)?,
        ProxFunction::elastic(0.3, 0.8).map_err(e2s)?,
        ProxFunction::l2_norm(),
        ProxFunction::box_indicator(lo.clone(), hi.clone()).map_err(e2s)?,
        ProxFunction::set_indicator(ConvexSet::new_box(lo, hi).map_err(e2s)?),
        ProxFunction::set_indicator(ConvexSet::SingletonZero(n)),
        ProxFunction::set_indicator(ConvexSet::NonnegOrthant(n)),
        ProxFunction::quadratic(q_mat, rvec(rng, n, 1.0), 0.0).map_err(e2s)?,
        ProxFunction::l1(0.9).map_err(e2s)?.centered(rvec(rng, n, 1.0)),
        ProxFunction::l2_norm().centered(rvec(rng, n, 1.0)),
    ];
    if n >= 2 {
        out.push(ProxFunction::set_indicator(ConvexSet::SecondOrderCone(n)));
    }
    Ok(out)
}

fn sets(n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<ConvexSet>, String> {
    let lo: Vec<f64> = rvec(rng, n, 1.0).iter().map(|a| a - 1.0).collect();
    let hi: Vec<f64> = rvec(rng, n, 1.0).iter().map(|a| a + 1.0).collect();
    let mut out = vec![
        ConvexSet::SingletonZero(n),
        ConvexSet::NonnegOrthant(n),
        ConvexSet::new_box(lo, hi).map_err(e2s)?,
    ];
    if n >= 2 {
        out.push(ConvexSet::SecondOrderCone(n));
    }
    Ok(out)
}

fn fd_err(g: &[f64], fd: &[f64]) -> f64 {
    norm(&diff(g, fd)) / norm(g).max(1.0)
}

fn c5_prox_penalty_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut moreau, mut firm, mut idem, mut fd_phi, mut fd_psi, mut lip) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for trial in 0..200 {
        let n = 1 + trial % 7;
        let gamma = 10f64.powf(rng.random_range(-1.5..1.5));
        let x = rvec(&mut rng, n, 5.0);
        let y = rvec(&mut rng, n, 5.0);
        for f in all_kinds(n, &mut rng)? {
            let p = f.prox(gamma, &x).map_err(e2s)?;
            let xs: Vec<f64> = x.iter().map(|a| a / gamma).collect();
            let c = conj_prox_reference(&f, 1.0 / gamma, &xs)?;
            let back: Vec<f64> = p.iter().zip(&c).map(|(a, b)| a + gamma * b).collect();
            moreau = moreau.max(norm(&diff(&back, &x)) / (1.0 + norm(&x)));
            let py = f.prox(gamma, &y).map_err(e2s)?;
            let d = diff(&p, &py);
            firm = firm.max(dot(&d, &d) - dot(&d, &diff(&x, &y)));
        }
        for k in sets(n, &mut rng)? {
            let px = k.project(&x).map_err(e2s)?;
            ensure(k.contains(&px, 1e-12).map_err(e2s)?, || format!("projection left {k:?}"))?;
            idem = idem.max(norm(&diff(&k.project(&px).map_err(e2s)?, &px)));
            let py = k.project(&y).map_err(e2s)?;
            let d = diff(&px, &py);
            firm = firm.max(dot(&d, &d) - dot(&d, &diff(&x, &y)));

            let h = 1e-6;
            let g = grad_phi(&k, &x).map_err(e2s)?;
            let fd: Vec<f64> = (0..n)
                .map(|i| {
                    let (mut a, mut b) = (x.clone(), x.clone());
                    a[i] += h;
                    b[i] -= h;
                    Ok((phi(&k, &a).map_err(e2s)? - phi(&k, &b).map_err(e2s)?) / (2.0 * h))
                })
                .collect::<Result<_, String>>()?;
            fd_phi = fd_phi.max(fd_err(&g, &fd));
            if trial < 100 {
                let gy = grad_phi(&k, &y).map_err(e2s)?;
                lip = lip.max(norm(&diff(&g, &gy)) - norm(&diff(&x, &y)));
            }

            let m = 2 + trial % 4;
            let a = LinearMap::dense(Matrix::from_row_major(n, m, rvec(&mut rng, n * m, 1.0)).map_err(e2s)?);
            let b = LinearMap::dense(Matrix::from_row_major(n, n, rvec(&mut rng, n * n, 1.0)).map_err(e2s)?);
            let spec = PenaltySpec::new(a, b, rvec(&mut rng, n, 1.0), k.clone()).map_err(e2s)?;
            let xv = rvec(&mut rng, m, 2.0);
            let lam = rvec(&mut rng, n, 1.0);
            let lam = (trial % 2 == 0).then_some(lam.as_slice());
            let rho = 10f64.powf(rng.random_range(-1.0..1.0));
            let ev = spec.psi_val_grad(rho, &xv, &y, lam).map_err(e2s)?;
            let psi = |xv: &[f64], yv: &[f64]| spec.psi_val_grad(rho, xv, yv, lam).map(|e| e.value).map_err(e2s);
            let mut fx = Vec::new();
            for i in 0..m {
                let (mut a, mut b) = (xv.clone(), xv.clone());
                a[i] += h;
                b[i] -= h;
                fx.push((psi(&a, &y)? - psi(&b, &y)?) / (2.0 * h));
            }
            let mut fy = Vec::new();
            for i in 0..n {
                let (mut a, mut b) = (y.clone(), y.clone());
                a[i] += h;
                b[i] -= h;
                fy.push((psi(&xv, &a)? - psi(&xv, &b)?) / (2.0 * h));
            }
            fd_psi = fd_psi.max(fd_err(&ev.grad_x, &fx)).max(fd_err(&ev.grad_y, &fy));
        }
    }
    let msg = format!(
        "Moreau {moreau:.1e}, firm excess {firm:.1e}, idempotence {idem:.1e}, FD ∇φ {fd_phi:.1e}, FD ∇ψ {fd_psi:.1e}, Lipschitz excess {lip:.1e}"
    );
    ensure(
        moreau <= 1e-10 && firm <= 1e-10 && idem <= 1e-12 && fd_phi <= 1e-6 && fd_psi <= 1e-6 && lip <= 1e-12,
        || msg.clone(),
    )?;
    Ok(msg)
}

fn c6_equivalences() -> Outcome {
    let n = 9;
    let c: Vec<f64> = (0..n).map(|i| 3.0 * (i as f64).sin()).collect();
    let cp = CompositeProblem::new(
        ProxFunction::l2_norm().centered(c),
        ProxFunction::elastic(0.4, 0.2).map_err(e2s)?,
        LinearMap::identity(n),
    )
    .map_err(e2s)?
    .with_l_norm_sq(1.0);
    let tp = cp.to_template().map_err(e2s)?;
    let mut prox_prox = 0.0f64;
    for (scheme, mut cfg) in [
        (Scheme::DrPlain, SolverConfig::nonstrong(100)),
        (Scheme::DrScvx, SolverConfig::semistrong(100)),
    ] {
        let rho0 = composite::default_rho0(&cp, scheme).map_err(e2s)?;
        cfg.rho0 = Some(rho0);
        let params = cfg.resolve(&tp).map_err(e2s)?;
        let mut st = SolverState::zeros(&tp, &params);
        let mut ws = Workspace::default();
        let mut cs = CompositeState::new(vec![0.0; n], n, rho0);
        let mut cws = CompositeWorkspace::default();
        for _ in 0..100 {
            step::iterate(&tp, &mut st, &cfg, &params, &mut ws).map_err(e2s)?;
            composite::composite_step(&cp, scheme, rho0, &mut cs, &mut cws).map_err(e2s)?;
            let scale = 1.0 + norm(&st.y);
            prox_prox = prox_prox.max(max_diff(&st.y, &cs.y) / scale).max(max_diff(&st.x, &cs.x) / scale);
        }
    }

    let m = Matrix::from_row_major(5, n, (0..5 * n).map(|i| (1.7 * i as f64).cos()).collect()).map_err(e2s)?;
    let lp = CompositeProblem::new(
        ProxFunction::l1(0.8).map_err(e2s)?.centered(vec![1.0, -2.0, 0.5, 0.0, 0.7]),
        ProxFunction::elastic(0.5, 0.1).map_err(e2s)?,
        LinearMap::dense(m),
    )
    .map_err(e2s)?;
    let mut pd = 0.0f64;
    for (a, b) in [(Scheme::LinopPlain, Scheme::PdPlain), (Scheme::LinopScvx, Scheme::PdScvx)] {
        let rho0 = composite::default_rho0(&lp, a).map_err(e2s)?;
        let mut sa = CompositeState::new(vec![0.3; n], 5, rho0);
        let mut sb = CompositeState::new(vec![0.3; n], 5, rho0);
        let (mut wa, mut wb) = (CompositeWorkspace::default(), CompositeWorkspace::default());
        for _ in 0..100 {
            composite::composite_step(&lp, a, rho0, &mut sa, &mut wa).map_err(e2s)?;
            composite::composite_step(&lp, b, rho0, &mut sb, &mut wb).map_err(e2s)?;
            pd = pd.max(max_diff(&sa.y, &sb.y)).max(max_diff(&sa.x, &sb.x));
        }
    }

    let conic_lp = gen_conic_lp().map_err(e2s)?.problem;
    let mut cone = 0.0f64;
    for restart in [None, Some(7)] {
        let cfg = SolverConfig {
            restart_period: restart,
            ..SolverConfig::nonstrong(100)
        };
        let a = conic::run(&conic_lp, &cfg, &NoClock).map_err(e2s)?;
        let b = run(&conic_lp, &cfg).map_err(e2s)?;
        cone = cone.max(max_diff(&a.final_x, &b.final_x)).max(max_diff(&a.final_y, &b.final_y));
        for (ra, rb) in a.records.iter().zip(&b.records) {
            cone = cone.max((ra.objective - rb.objective).abs() / (1.0 + rb.objective.abs()));
        }
    }
    let msg = format!("prox-prox {prox_prox:.1e}, primal-dual {pd:.1e}, conic {cone:.1e}");
    ensure(prox_prox <= 1e-12 && pd <= 1e-10 && cone <= 1e-12, || msg.clone())?;
    Ok(msg)
}

fn c7_composite_bounds() -> Outcome {
    let inst = gen_sqrt_loss_composite(50, 0.5, 0.3, 3).map_err(e2s)?;
    let cc = fstar_crosscheck(&inst.problem, 5000).map_err(e2s)?;
    ensure(!cc.low_confidence, || format!("crosscheck disagrees: {cc:?}"))?;
    let (ys, _) = papa_core::problems::sqrt_loss_oracle(&inst.c, 0.5, 0.3).map_err(e2s)?;
    let l_f = inst.problem.f.lipschitz(50).ok_or("f not Lipschitz")?;
    let mut parts = Vec::new();
    for scheme in [Scheme::DrPlain, Scheme::DrScvx, Scheme::LinopPlain, Scheme::LinopScvx, Scheme::PdPlain, Scheme::PdScvx] {
        let rho0 = composite::default_rho0(&inst.problem, scheme).map_err(e2s)?;
        let t = composite::run(&inst.problem, scheme, None, vec![0.0; 50], 2000, &NoClock).map_err(e2s)?;
        let inputs = BoundInputs {
            rho0,
            gamma0: 0.0,
            b_norm_sq: inst.problem.l_norm_sq,
            l_h: 0.0,
            x0_dist: 0.0,
            y0_dist: norm(&ys),
            lambda_norm: 0.0,
            l_f,
            accelerated: scheme.is_scvx(),
        };
        let rep = check_trace(&t.records, Theorem::C1, &inputs, cc.f_star, cc.err, SLACK);
        ensure(rep.passed && rep.checked == 2000, || format!("{scheme:?}: {rep:?}"))?;
        parts.push(format!("{scheme:?} {:.3}", rep.worst_objective_slack.unwrap_or(f64::NAN)));
    }
    Ok(format!("F* = {:.6} ± {:.1e}; objective slack {}", cc.f_star, cc.err, parts.join(", ")))
}

fn tv_spec() -> InstanceSpec {
    InstanceSpec::TvRecon {
        height: 32,
        width: 32,
        sample_rate: 0.2,
        kappa: 4.0912e-4,
        noise_sigma: 0.0,
        seed: 7,
    }
}

fn restart_solvers(strong: bool) -> serde_json::Value {
    let mut v = vec![
        json!({"name": "papa", "method": {"solver": "papa"}}),
        json!({"name": "papa-rs50", "method": {"solver": "papa", "config": {"restart_period": 50}}}),
        json!({"name": "papa-rs100", "method": {"solver": "papa", "config": {"restart_period": 100}}}),
    ];
    if strong {
        v.push(json!({"name": "scvx", "method": {"solver": "papa", "config": {"variant": "semi-strong"}}}));
        v.push(json!({"name": "scvx-rs50", "method": {"solver": "papa", "config": {"variant": "semi-strong", "restart_period": 50}}}));
        v.push(json!({"name": "scvx-rs100", "method": {"solver": "papa", "config": {"variant": "semi-strong", "restart_period": 100}}}));
    }
    serde_json::Value::Array(v)
}

fn tv_config() -> Result<ExperimentConfig, String> {
    let mut solvers = restart_solvers(false);
    solvers[0]["theorem"] = json!("t3");
    serde_json::from_value(json!({
        "name": "tv",
        "benchmark": tv_spec(),
        "budget": 2000,
        "reference": {"budget": 30000},
        "solvers": solvers,
    }))
    .map_err(e2s)
}

fn c8_three_term_bounds(tv: &mut Option<ExperimentOutput>) -> Outcome {
    let start = Instant::now();
    let cfg = tv_config()?;
    let prepared: Prepared = prepare(&cfg.instance_spec(), cfg.reference.budget).map_err(e2s)?;
    let out = run_on(&cfg, prepared).map_err(e2s)?;
    let secs = start.elapsed().as_secs_f64();
    let run = out.run("papa").ok_or("missing run")?;
    let msg = match &run.summary.bounds {
        BoundOutcome::Checked { report } => {
            ensure(report.passed && report.checked == 2000, || format!("{report:?}"))?;
            let inputs = &run.oracle.as_ref().ok_or("missing oracle")?.inputs;
            ensure(inputs.l_h > 0.0, || "L_h missing from R_p".into())?;
            format!(
                "{}, F* ± {:.1e}, L_h {:.3}; {secs:.1} s",
                slack_str(report),
                out.prepared.f_star_err,
                inputs.l_h
            )
        }
        other => return Err(format!("bounds not checked: {other:?}")),
    };
    *tv = Some(out);
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(msg)
}

fn experiment(name: &str, benchmark: InstanceSpec, strong: bool, budget: usize) -> Result<ExperimentConfig, String> {
    serde_json::from_value(json!({
        "name": name,
        "benchmark": benchmark,
        "budget": budget,
        "solvers": restart_solvers(strong),
    }))
    .map_err(e2s)
}

fn restart_configs() -> Result<Vec<ExperimentConfig>, String> {
    let qp = |sc| InstanceSpec::Qp {
        p2: 60,
        n: 60,
        strongly_convex: sc,
        seed: 2024,
    };
    Ok(vec![
        experiment("qp", qp(false), false, 1000)?,
        experiment("qp-scvx", qp(true), true, 2000)?,
        experiment(
            "elastic",
            InstanceSpec::ElasticSqrt {
                p2: 200,
                n: 70,
                s: 20,
                kappa1: 0.1,
                kappa2: 0.01,
                noise_sigma: 1e-3,
                seed: 7,
            },
            true,
            1000,
        )?,
        experiment(
            "sqrt-loss",
            InstanceSpec::SqrtLoss {
                p: 50,
                kappa1: 0.5,
                kappa2: 0.3,
                seed: 3,
            },
            true,
            1000,
        )?,
        experiment("conic", InstanceSpec::ConicLp, false, 1000)?,
    ])
}

fn residual_at(out: &ExperimentOutput, name: &str, k: usize) -> Option<f64> {
    let r = out.run(name)?;
    r.trace.records.iter().find(|t| t.k == k).map(|t| relative_residual(t.objective, out.prepared.f_star))
}

fn c9_ordering(tv: Option<&ExperimentOutput>) -> Outcome {
    let mut outs = Vec::new();
    for cfg in restart_configs()? {
        outs.push(run_experiment(&cfg).map_err(e2s)?);
    }
    let qp_sc = &outs[1];
    let hit = |name: &str| qp_sc.summary.solvers.iter().find(|s| s.name == name).and_then(|s| s.hit_1e_8);
    let (fast, plain) = (hit("scvx-rs50"), hit("papa"));
    ensure(fast.is_some_and(|f| plain.is_none_or(|p| f < p)), || {
        format!("scvx-rs50 hit 1e-8 at {fast:?}, plain at {plain:?}")
    })?;

    let mut worst = (0.0f64, String::new());
    let all: Vec<&ExperimentOutput> = outs.iter().chain(tv).collect();
    for out in &all {
        for (base, rs) in [
            ("papa", "papa-rs50"),
            ("papa", "papa-rs100"),
            ("scvx", "scvx-rs50"),
            ("scvx", "scvx-rs100"),
        ] {
            let (Some(a), Some(b)) = (residual_at(out, base, 1000), residual_at(out, rs, 1000)) else {
                continue;
            };
            let ratio = b / a.max(1e-14);
            if ratio > worst.0 {
                worst = (ratio, format!("{}:{rs}", out.summary.experiment));
            }
        }
    }
    ensure(worst.0 <= 10.0, || format!("restart worsened {} by {:.1}x", worst.1, worst.0))?;
    Ok(format!(
        "scvx-rs50 hits 1e-8 at k={}, plain {}; worst restart ratio at k=1000 {:.2e} ({}) over {} benchmarks",
        fast.unwrap(),
        plain.map_or("never".into(), |p| p.to_string()),
        worst.0,
        worst.1,
        all.len()
    ))
}

fn c10_determinism() -> Outcome {
    let mut cfgs = restart_configs()?;
    let mut tv_small = tv_config()?;
    tv_small.benchmark = InstanceSpec::TvRecon {
        height: 12,
        width: 12,
        sample_rate: 0.3,
        kappa: 1e-3,
        noise_sigma: 0.01,
        seed: 2,
    };
    tv_small.reference.budget = 2000;
    tv_small.budget = 300;
    cfgs.push(tv_small);
    cfgs.push(
        serde_json::from_value(json!({
            "name": "baselines",
            "benchmark": {"kind": "elastic-sqrt", "p2": 60, "n": 30, "s": 6, "kappa1": 0.1, "kappa2": 0.01, "noise_sigma": 0.01, "seed": 1},
            "budget": 300,
            "solvers": [
                {"name": "cp-plain", "method": {"solver": "baseline", "config": {"method": "cp-plain"}}},
                {"name": "cp-scvx", "method": {"solver": "baseline", "config": {"method": "cp-scvx"}}},
                {"name": "dr", "method": {"solver": "composite", "scheme": "linop-scvx"}},
            ],
        }))
        .map_err(e2s)?,
    );
    let mut files = 0;
    for cfg in &cfgs {
        let a = run_experiment(cfg).map_err(e2s)?;
        let b = run_experiment(cfg).map_err(e2s)?;
        for (ra, rb) in a.runs.iter().zip(&b.runs) {
            ensure(ra.csv == rb.csv, || format!("{}/{} differs", cfg.name, ra.entry.name))?;
            files += 1;
        }
        ensure(a.summary == b.summary, || format!("{} summary differs", cfg.name))?;
    }
    Ok(format!("{files} traces over {} experiments identical", cfgs.len()))
}

fn main() -> ExitCode {
    let mut tv = None;
    let mut results: Vec<(&str, Outcome, f64)> = Vec::new();
    let mut record = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match &r {
            Ok(m) => println!("{name} PASS  {m}"),
            Err(m) => println!("{name} FAIL  {m}"),
        }
        results.push((name, r, secs));
    };
    record("C1  nonstrong bounds   ", &mut c1_nonstrong_bounds);
    record("C2  semistrong bounds  ", &mut c2_semistrong_bounds);
    record("C3  empirical rates    ", &mut c3_rates);
    record("C4  inequality suite   ", &mut c4_inequalities);
    record("C5  prox/penalty suite ", &mut c5_prox_penalty_properties);
    record("C6  equivalences       ", &mut c6_equivalences);
    record("C7  composite bounds   ", &mut c7_composite_bounds);
    record("C8  three-term bounds  ", &mut || c8_three_term_bounds(&mut tv));
    record("C9  restart ordering   ", &mut || c9_ordering(tv.as_ref()));
    record("C10 determinism        ", &mut c10_determinism);
    let failed = results.iter().filter(|r| r.1.is_err()).count();
    let total: f64 = results.iter().map(|r| r.2).sum();
    println!("acceptance: {} passed, {failed} failed ({total:.1} s)", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
