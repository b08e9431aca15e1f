use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{
    make_combination_lock, make_grid_world, make_linear_mdp, make_random_mdp, ReplacementEnv,
};
use crate::error::{Error, Result};
use crate::fapprox::FaAlgorithm;
use crate::mdp::{InverseTemperature, TabularMdp};
use crate::rl::QlConfig;

/// Which MDP to build. `size` is the number of states, or the open side
/// length for the grid world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BenchmarkSpec {
    Linear { size: usize },
    Lock { size: usize },
    Grid { size: usize },
    Random { size: usize, actions: usize, mdp_seed: u64 },
    File { path: PathBuf },
}

impl BenchmarkSpec {
    pub fn parse(kind: &str, size: usize, actions: usize, mdp_seed: u64) -> Result<Self> {
        Ok(match kind {
            "linear" => Self::Linear { size },
            "lock" | "combination-lock" => Self::Lock { size },
            "grid" | "grid-world" => Self::Grid { size },
            "random" => Self::Random { size, actions, mdp_seed },
            other => return Err(Error::config(format!("unknown benchmark {other:?}"))),
        })
    }

    pub fn name(&self) -> String {
        match self {
            Self::Linear { size } => format!("linear-{size}"),
            Self::Lock { size } => format!("lock-{size}"),
            Self::Grid { size } => format!("grid-{size}"),
            Self::Random { size, actions, mdp_seed } => format!("random-{size}x{actions}-{mdp_seed}"),
            Self::File { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into()),
        }
    }

    pub fn build(&self, gamma: f64) -> Result<TabularMdp> {
        match self {
            Self::Linear { size } => make_linear_mdp(*size, gamma),
            Self::Lock { size } => make_combination_lock(*size, gamma),
            Self::Grid { size } => make_grid_world(*size, gamma),
            Self::Random { size, actions, mdp_seed } => make_random_mdp(*size, *actions, gamma, *mdp_seed),
            Self::File { path } => TabularMdp::load(path)?.with_gamma(gamma),
        }
    }
}

/// Algorithm with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    /// Model-based DPP, one sweep per iteration.
    Dpp { eta: InverseTemperature },
    DppRl { eta: InverseTemperature },
    Ql { omega: f64 },
    /// Value iteration on the fitted model; `sweeps` defaults to the budget.
    Vi { sweeps: Option<usize> },
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Dpp { .. } => "dpp",
            Self::DppRl { .. } => "dpp-rl",
            Self::Ql { .. } => "ql",
            Self::Vi { .. } => "vi",
        }
    }

    pub fn params(&self) -> String {
        match self {
            Self::Dpp { eta } | Self::DppRl { eta } => format!("eta={eta}"),
            Self::Ql { omega } => format!("omega={omega}"),
            Self::Vi { sweeps: Some(s) } => format!("sweeps={s}"),
            Self::Vi { sweeps: None } => String::new(),
        }
    }

    pub fn uses_samples(&self) -> bool {
        !matches!(self, Self::Dpp { .. })
    }

    /// Expands `--algo` names; `ql` yields one entry per ω.
    pub fn expand(names: &[String], eta: InverseTemperature, omegas: &[f64], sweeps: Option<usize>) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for name in names {
            match name.as_str() {
                "dpp" => out.push(Self::Dpp { eta }),
                "dpp-rl" | "dpprl" => out.push(Self::DppRl { eta }),
                "ql" => out.extend(omegas.iter().map(|&omega| Self::Ql { omega })),
                "vi" => out.push(Self::Vi { sweeps }),
                other => return Err(Error::config(format!("unknown algorithm {other:?}"))),
            }
        }
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        if let Self::Ql { omega } = self {
            QlConfig::new(*omega)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    /// Elapsed solver time, excluding sampling and loss evaluation.
    #[default]
    Wall,
    /// cpu_seconds written as 0, for byte-reproducible output.
    Off,
}

impl Timing {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "wall" => Ok(Self::Wall),
            "off" => Ok(Self::Off),
            other => Err(Error::config(format!("unknown timing mode {other:?}"))),
        }
    }
}

fn default_gamma() -> f64 {
    0.995
}

fn default_runs() -> usize {
    1
}

/// A discrete-MDP experiment: every algorithm runs on every seed, and the
/// sample-based ones share that seed's sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkSpec,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Samples per pair for sample-based algorithms, iterations for DPP.
    pub budget: usize,
    /// Optional solver-time cap per algorithm and run; `budget` still bounds
    /// the number of iterations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_seconds: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Loss cadence in iterations; 0 means max(1, budget/200).
    #[serde(default)]
    pub eval_every: usize,
    #[serde(default)]
    pub timing: Timing,
    /// Worker threads for runs; 0 uses every core.
    #[serde(default)]
    pub jobs: usize,
    /// Re-derive sample columns from the seed instead of storing them.
    #[serde(default)]
    pub streaming: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::config("runs must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("no algorithms selected"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config(format!("discount {} outside [0, 1)", self.gamma)));
        }
        if let Some(t) = self.budget_seconds {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::config(format!("time budget must be positive, got {t}")));
            }
            if self.timing == Timing::Off {
                return Err(Error::config("a time budget needs wall timing"));
            }
        }
        self.algorithms.iter().try_for_each(AlgorithmSpec::validate)
    }

    pub fn cadence(&self) -> usize {
        if self.eval_every > 0 {
            self.eval_every
        } else {
            (self.budget / 200).max(1)
        }
    }
}

/// Grid searched for (η, α) before the evaluation runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneGrid {
    pub etas: Vec<InverseTemperature>,
    pub alphas: Vec<f64>,
    pub runs: usize,
}

impl Default for TuneGrid {
    fn default() -> Self {
        let f = |v| InverseTemperature::Finite(v);
        Self {
            etas: vec![f(0.1), f(1.0), f(10.0), InverseTemperature::Infinite],
            alphas: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            runs: 10,
        }
    }
}

fn default_bins() -> usize {
    100
}

fn default_centers() -> usize {
    10
}

/// A replacement-problem experiment for SADPP and/or RFQI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplacementConfig {
    #[serde(default)]
    pub env: ReplacementEnv,
    pub algorithms: Vec<FaAlgorithm>,
    pub n_samples: usize,
    pub iterations: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    pub eta: InverseTemperature,
    pub alpha: f64,
    #[serde(default = "default_bins")]
    pub n_bins: usize,
    #[serde(default = "default_centers")]
    pub n_centers: usize,
    /// Pick (η, α) per algorithm on separate seeds before the runs.
    #[serde(default)]
    pub tune: Option<TuneGrid>,
    #[serde(default)]
    pub timing: Timing,
    #[serde(default)]
    pub jobs: usize,
}

impl ReplacementConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if self.runs == 0 || self.n_samples == 0 || self.n_bins == 0 {
            return Err(Error::config("runs, samples and bins must be positive"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("no algorithms selected"));
        }
        if let Some(t) = &self.tune {
            if t.etas.is_empty() || t.alphas.is_empty() || t.runs == 0 {
                return Err(Error::config("tuning grid is empty"));
            }
        }
        Ok(())
    }
}
