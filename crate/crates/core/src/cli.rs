//! Command-line interface of the `dpp` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::benchmarks::ReplacementEnv;
use crate::error::{Error, Result};
use crate::exact::{dpp_run, theorem1_bound, LossMonitor};
use crate::fapprox::FaAlgorithm;
use crate::harness::{
    run_experiment, run_replacement, write_outputs, AlgorithmSpec, BenchmarkSpec,
    ExperimentConfig, ReplacementConfig, Timing, TuneGrid,
};
use crate::mdp::{optimal_q_policy_iteration, InverseTemperature, LossTracker, PolicyEvaluation, Preferences};
use crate::rng::{self, Purpose};

#[derive(Debug, Parser)]
#[command(name = "dpp", version, about = "Dynamic policy programming experiments")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a benchmark MDP as JSON.
    Generate(GenerateArgs),
    /// Exact (model-based) DPP on a benchmark or an MDP file.
    Solve(ExperimentArgs),
    /// Generative-model RL, DPP-RL by default.
    Rl(ExperimentArgs),
    /// DPP-RL against Q-learning and model-based VI on a shared sample budget.
    Bench(ExperimentArgs),
    /// SADPP on the optimal-replacement problem.
    Sadpp(ReplacementArgs),
    /// SADPP and/or RFQI on the optimal-replacement problem.
    Replacement(ReplacementArgs),
    /// Check the DPP loss bound on random MDPs; exits 0 iff it holds.
    BoundCheck(BoundArgs),
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    /// linear, lock, grid or random.
    #[arg(long, default_value = "linear")]
    benchmark: String,
    /// Number of states (open side length for grid).
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Actions of a random MDP.
    #[arg(long, default_value_t = 2)]
    actions: usize,
    /// Seed of a random MDP.
    #[arg(long, default_value_t = 0)]
    mdp_seed: u64,
    /// Discount factor.
    #[arg(long, default_value_t = 0.995)]
    gamma: f64,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    bench: BenchmarkArgs,
    /// Output JSON file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[command(flatten)]
    bench: BenchmarkArgs,
    /// Load the MDP from a JSON file instead of a generator.
    #[arg(long)]
    mdp: Option<PathBuf>,
    /// Algorithms: dpp, dpp-rl, ql, vi (comma separated).
    #[arg(long, value_delimiter = ',')]
    algo: Vec<String>,
    /// Inverse temperature for dpp / dpp-rl ("inf" for the hard max).
    #[arg(long, default_value = "inf")]
    eta: String,
    /// Learning-step exponents for ql.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.51, 0.75, 1.0])]
    omega: Vec<f64>,
    /// Value-iteration sweeps for vi (default: the budget).
    #[arg(long)]
    vi_sweeps: Option<usize>,
    /// Samples per state-action pair (iterations for dpp).
    #[arg(long, visible_alias = "budget-iterations", default_value_t = 10_000)]
    budget: usize,
    /// Also stop each algorithm after this much solver time (needs wall timing).
    #[arg(long)]
    budget_seconds: Option<f64>,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Base seed; run r uses seed ^ r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Loss evaluation cadence in iterations (0: budget/200).
    #[arg(long, default_value_t = 0)]
    eval_every: usize,
    /// Regenerate samples from the seed instead of storing them.
    #[arg(long)]
    streaming: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON config file; replaces every experiment flag except --out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for runs (0: all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// wall, or off to write cpu_seconds as 0.
    #[arg(long, default_value = "wall")]
    timing: String,
}

#[derive(Debug, Args)]
struct ReplacementArgs {
    /// sadpp, rfqi (comma separated).
    #[arg(long, value_delimiter = ',')]
    algo: Vec<String>,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Replacement cost C.
    #[arg(long, default_value_t = 30.0)]
    cost: f64,
    #[arg(long, default_value_t = 0.6)]
    gamma: f64,
    #[arg(long, default_value_t = 10.0)]
    xmax: f64,
    /// Samples per iteration.
    #[arg(long = "N", default_value_t = 500)]
    n_samples: usize,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1")]
    eta: String,
    /// Ridge coefficient.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Grid-search (eta, alpha) on separate seeds first.
    #[arg(long)]
    tune: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long = "S", default_value_t = 10)]
    states: usize,
    #[arg(long = "A", default_value_t = 3)]
    actions: usize,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value = "inf")]
    eta: String,
    /// Largest iteration checked.
    #[arg(long, default_value_t = 500)]
    k: usize,
    /// Number of random MDPs.
    #[arg(long, default_value_t = 10)]
    mdps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit status: 0 on success, 1 on failure, 2 on usage errors.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Generate(a) => {
            let spec = benchmark_spec(&a.bench, None)?;
            spec.build(a.bench.gamma)?.save(&a.out)?;
            println!("wrote {}", a.out.display());
            Ok(0)
        }
        Command::Solve(a) => experiment("solve", a, &["dpp"]),
        Command::Rl(a) => experiment("rl", a, &["dpp-rl"]),
        Command::Bench(a) => experiment("bench", a, &["dpp-rl", "ql", "vi"]),
        Command::Sadpp(a) => replacement("sadpp", a, &["sadpp"]),
        Command::Replacement(a) => replacement("replacement", a, &["sadpp", "rfqi"]),
        Command::BoundCheck(a) => bound_check(&a),
    }
}

fn benchmark_spec(b: &BenchmarkArgs, mdp: Option<&Path>) -> Result<BenchmarkSpec> {
    match mdp {
        Some(p) => Ok(BenchmarkSpec::File { path: p.to_path_buf() }),
        None => BenchmarkSpec::parse(&b.benchmark, b.n, b.actions, b.mdp_seed),
    }
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn experiment(command: &str, a: ExperimentArgs, default_algos: &[&str]) -> Result<i32> {
    let cfg: ExperimentConfig = match &a.common.config {
        Some(p) => read_config(p)?,
        None => {
            let names: Vec<String> = if a.algo.is_empty() {
                default_algos.iter().map(|s| s.to_string()).collect()
            } else {
                a.algo.clone()
            };
            let eta = InverseTemperature::parse(&a.eta)?;
            ExperimentConfig {
                benchmark: benchmark_spec(&a.bench, a.mdp.as_deref())?,
                algorithms: AlgorithmSpec::expand(&names, eta, &a.omega, a.vi_sweeps)?,
                gamma: a.bench.gamma,
                runs: a.runs,
                budget: a.budget,
                budget_seconds: a.budget_seconds,
                seed: a.seed,
                eval_every: a.eval_every,
                timing: Timing::parse(&a.common.timing)?,
                jobs: a.common.jobs,
                streaming: a.streaming,
            }
        }
    };
    let records = run_experiment(&cfg)?;
    for agg in write_outputs(&a.common.out, &records, command, serde_json::to_value(&cfg)?, None)? {
        println!(
            "{} {} {}: final loss {:.6} ({:.6}) over {} runs",
            agg.benchmark,
            agg.algorithm,
            agg.params,
            agg.final_mean(),
            agg.final_std(),
            agg.n_runs
        );
    }
    Ok(0)
}

fn replacement(command: &str, a: ReplacementArgs, default_algos: &[&str]) -> Result<i32> {
    let cfg: ReplacementConfig = match &a.common.config {
        Some(p) => read_config(p)?,
        None => {
            let names: Vec<String> = if a.algo.is_empty() {
                default_algos.iter().map(|s| s.to_string()).collect()
            } else {
                a.algo.clone()
            };
            let algorithms = names
                .iter()
                .map(|n| match n.as_str() {
                    "sadpp" => Ok(FaAlgorithm::Sadpp),
                    "rfqi" => Ok(FaAlgorithm::Rfqi),
                    other => Err(Error::config(format!("unknown algorithm {other:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            ReplacementConfig {
                env: ReplacementEnv::new(a.beta, a.cost, 4.0, a.gamma, a.xmax)?,
                algorithms,
                n_samples: a.n_samples,
                iterations: a.iters,
                runs: a.runs,
                seed: a.seed,
                eta: InverseTemperature::parse(&a.eta)?,
                alpha: a.alpha,
                n_bins: 100,
                n_centers: 10,
                tune: a.tune.then(TuneGrid::default),
                timing: Timing::parse(&a.common.timing)?,
                jobs: a.common.jobs,
            }
        }
    };
    let threshold = cfg.env.optimal_threshold()?;
    println!("optimal threshold {:.6}", threshold.x_bar);
    let out = run_replacement(&cfg)?;
    let tuned = (!out.tuned.is_empty()).then(|| serde_json::to_value(&out.tuned)).transpose()?;
    for t in &out.tuned {
        match t.algorithm {
            FaAlgorithm::Sadpp => println!("tuned sadpp: eta={} alpha={} (score {:.4})", t.eta, t.alpha, t.score),
            FaAlgorithm::Rfqi => println!("tuned rfqi: alpha={} (score {:.4})", t.alpha, t.score),
        }
    }
    for agg in write_outputs(&a.common.out, &out.records, command, serde_json::to_value(&cfg)?, tuned)? {
        let post = crate::harness::post_transient_stats(&agg, cfg.iterations / 2)?;
        println!(
            "{} {}: final error {:.4} ({:.4}), post-transient {:.4} ({:.4})",
            agg.algorithm,
            agg.params,
            agg.final_mean(),
            agg.final_std(),
            post.mean,
            post.std
        );
    }
    Ok(0)
}

fn bound_check(a: &BoundArgs) -> Result<i32> {
    let eta = InverseTemperature::parse(&a.eta)?;
    let mut violations = 0usize;
    let mut worst_ratio = 0.0f64;
    for i in 0..a.mdps {
        let mdp = crate::benchmarks::make_random_mdp(a.states, a.actions, a.gamma, a.seed ^ i as u64)?;
        let q_star = optimal_q_policy_iteration(&mdp)?;
        let mut tracker = LossTracker::new(q_star, PolicyEvaluation::Iterative { tol: 1e-9 });
        let mut psi0 = Preferences::zeros(a.states, a.actions);
        let mut r = rng::stream(a.seed ^ i as u64, Purpose::Init);
        rng::fill_uniform(&mut r, psi0.as_mut_slice(), mdp.v_max());
        let run = dpp_run(&mdp, &psi0, eta, a.k, Some(LossMonitor::new(&mut tracker, 1)))?;
        for (&k, &loss) in run.trajectory.iterations.iter().zip(&run.trajectory.losses) {
            let bound = theorem1_bound(mdp.v_max(), a.actions, eta, a.gamma, k)?;
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(loss / bound);
            }
            if loss > bound {
                violations += 1;
            }
        }
    }
    println!(
        "{} MDPs x {} iterations: {violations} violations, largest loss/bound {worst_ratio:.3e}",
        a.mdps,
        a.k + 1
    );
    Ok(i32::from(violations > 0))
}
