//! Experiment configuration files (JSON).

use std::path::{Path, PathBuf};

use papa_core::baselines::BaselineConfig;
use papa_core::certify::Theorem;
use papa_core::papa::composite::Scheme;
use papa_core::papa::SolverConfig;
use papa_core::problems::InstanceSpec;
use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub benchmark: InstanceSpec,
    /// Iterations per solver.
    pub budget: usize,
    /// Overrides the benchmark's own seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub solvers: Vec<SolverEntry>,
    #[serde(default)]
    pub reference: ReferenceConfig,
    /// Tail window for rate fits; defaults to `[budget/4, budget]`.
    #[serde(default)]
    pub rate_window: Option<(usize, usize)>,
    /// Record real elapsed time. Off by default so traces are reproducible.
    #[serde(default)]
    pub wall_clock: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverEntry {
    /// Label used for the trace file name.
    pub name: String,
    pub method: SolverMethod,
    /// Bound family to certify the trace against, if any.
    #[serde(default)]
    pub theorem: Option<Theorem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SolverMethod {
    /// The template solvers on the penalty form.
    Papa {
        #[serde(default)]
        config: SolverConfig,
    },
    /// Closed-form driver for conic programs.
    Conic {
        #[serde(default)]
        config: SolverConfig,
    },
    /// Schemes on the composite form `f(Ly) + g(y)`.
    Composite {
        scheme: Scheme,
        #[serde(default)]
        rho0: Option<f64>,
    },
    Baseline { config: BaselineConfig },
}

/// How the reference value `F*` is obtained when no exact oracle exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Iterations of each long run.
    pub budget: usize,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig { budget: 20_000 }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.to_path_buf(), e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked before any solver runs.
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.budget == 0 {
            return Err(BenchError::Config("budget must be at least 1".into()));
        }
        if self.solvers.is_empty() {
            return Err(BenchError::Config("no solvers listed".into()));
        }
        if self.reference.budget == 0 {
            return Err(BenchError::Config("reference budget must be at least 1".into()));
        }
        let mut names: Vec<&str> = self.solvers.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(BenchError::Config(format!("duplicate solver name {:?}", w[0])));
        }
        for s in &self.solvers {
            if s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(BenchError::Config(format!(
                    "solver name {:?} must be nonempty and use only [A-Za-z0-9_-]",
                    s.name
                )));
            }
        }
        if let Some((from, to)) = self.rate_window {
            if from > to || to > self.budget {
                return Err(BenchError::Config(format!(
                    "rate window [{from}, {to}] must lie inside [1, {}]",
                    self.budget
                )));
            }
        }
        Ok(())
    }

    pub fn window(&self) -> (usize, usize) {
        self.rate_window.unwrap_or((self.budget / 4, self.budget))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// The benchmark with the seed override applied.
    pub fn instance_spec(&self) -> InstanceSpec {
        let mut spec = self.benchmark.clone();
        if let Some(s) = self.seed {
            match &mut spec {
                InstanceSpec::Qp { seed, .. }
                | InstanceSpec::ElasticSqrt { seed, .. }
                | InstanceSpec::TvRecon { seed, .. }
                | InstanceSpec::SqrtLoss { seed, .. } => *seed = s,
                InstanceSpec::ConicLp => {}
            }
        }
        spec
    }

    /// Replaces the benchmark sizes with those of the original experiments.
    /// TV images stay at 64×64 because the measurement matrix is dense.
    pub fn paper_scale(mut self) -> Self {
        match &mut self.benchmark {
            InstanceSpec::Qp { p2, n, .. } => {
                *p2 = 2000;
                *n = 2000;
            }
            InstanceSpec::ElasticSqrt { p2, n, s, .. } => {
                *p2 = 5000;
                *n = 1750;
                *s = 500;
            }
            InstanceSpec::TvRecon { height, width, .. } => {
                *height = 64;
                *width = 64;
            }
            InstanceSpec::SqrtLoss { .. } | InstanceSpec::ConicLp => {}
        }
        self
    }
}
