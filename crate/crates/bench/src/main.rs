use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use papa_bench::output::{read_csv_path, to_records, OracleFile};
use papa_bench::{run_experiment, ExperimentConfig};
use papa_core::certify::{check_trace, rate_slope, Theorem};

#[derive(Parser)]
#[command(name = "papa", version, about = "Run and certify proximal alternating penalty experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment config and write traces plus summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's out_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the original experiment sizes.
        #[arg(long)]
        paper_scale: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a trace against a bound family.
    Check {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, value_enum)]
        theorem: TheoremArg,
        #[arg(long, default_value_t = papa_bench::runner::BOUND_TOL)]
        tol: f64,
    },
    /// Fit the log-log slope of a trace column over [from, to].
    Slope {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, value_enum, default_value_t = Column::RelObjResidual)]
        column: Column,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    T1,
    T2,
    T3,
    C1,
}

impl From<TheoremArg> for Theorem {
    fn from(t: TheoremArg) -> Self {
        match t {
            TheoremArg::T1 => Theorem::T1,
            TheoremArg::T2 => Theorem::T2,
            TheoremArg::T3 => Theorem::T3,
            TheoremArg::C1 => Theorem::C1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Column {
    RelObjResidual,
    Feasibility,
    DistK,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Run {
            config,
            out,
            paper_scale,
            seed,
        } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if paper_scale {
                cfg = cfg.paper_scale();
            }
            if let Some(s) = seed {
                cfg = cfg.with_seed(s);
            }
            let Some(dir) = out.or_else(|| cfg.out_dir.clone()) else {
                bail!("no output directory: pass --out or set out_dir in the config");
            };
            let res = run_experiment(&cfg)?;
            res.write(&dir)?;
            for s in &res.summary.solvers {
                println!(
                    "{:<20} rel_obj_residual {:.3e}  dist {:.3e}  slope {}",
                    s.name,
                    s.final_rel_obj_residual,
                    s.final_dist,
                    s.rate.objective_slope.map_or("-".to_string(), |v| format!("{v:.3}")),
                );
            }
            println!("wrote {}", dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Check {
            trace,
            oracle,
            theorem,
            tol,
        } => {
            let rows = read_csv_path(&trace)?;
            let text = std::fs::read_to_string(&oracle).with_context(|| format!("reading {}", oracle.display()))?;
            let o: OracleFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", oracle.display()))?;
            let rep = check_trace(&to_records(&rows), theorem.into(), &o.inputs, o.f_star, o.f_star_err, tol);
            println!("{}", serde_json::to_string_pretty(&rep)?);
            println!("{}", if rep.passed { "PASS" } else { "FAIL" });
            Ok(if rep.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Slope {
            trace,
            from,
            to,
            column,
        } => {
            let rows = read_csv_path(&trace)?;
            let ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
            let vals: Vec<f64> = rows
                .iter()
                .map(|r| match column {
                    Column::RelObjResidual => r.rel_obj_residual,
                    Column::Feasibility => r.feasibility,
                    Column::DistK => r.dist_k,
                })
                .collect();
            let fit = rate_slope(&ks, &vals, from, to)?;
            if fit.skipped > 0 {
                eprintln!("note: skipped {} nonpositive points", fit.skipped);
            }
            println!("{}", serde_json::to_string_pretty(&fit)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
