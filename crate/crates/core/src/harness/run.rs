use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{AlgorithmSpec, ExperimentConfig, Timing};
use crate::error::{Error, Result};
use crate::exact::{dpp_run, LossMonitor, LossTrajectory};
use crate::mdp::{
    optimal_q_policy_iteration, LossTracker, PolicyEvaluation, Preferences, QTable, TabularMdp,
};
use crate::par;
use crate::rl::{
    dpp_rl_run, model_based_vi_run, q_learning_sync_run, GenerativeSampleSet, QlConfig,
    SuccessorSampler,
};
use crate::rng::{self, Purpose};

/// One algorithm on one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub benchmark: String,
    pub algorithm: String,
    pub params: String,
    pub run: usize,
    pub seed: u64,
    pub iterations: Vec<usize>,
    pub cpu_seconds: Vec<f64>,
    pub losses: Vec<f64>,
}

impl RunRecord {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().expect("records hold at least the initial loss")
    }

    pub(crate) fn key(&self) -> (String, String, String) {
        (self.benchmark.clone(), self.algorithm.clone(), self.params.clone())
    }
}

/// Seed of run `r`.
pub fn run_seed(base: u64, run: usize) -> u64 {
    base ^ run as u64
}

/// Runs every algorithm on every seed. Records are ordered by run, then by
/// algorithm as configured, whatever order the workers finish in.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let mdp = cfg.benchmark.build(cfg.gamma)?;
    let q_star = optimal_q_policy_iteration(&mdp)?;
    let sampler = if cfg.algorithms.iter().any(AlgorithmSpec::uses_samples) && cfg.budget > 0 {
        Some(Arc::new(SuccessorSampler::new(&mdp)?))
    } else {
        None
    };
    let name = cfg.benchmark.name();
    let per_run = par::with_jobs(cfg.jobs, || {
        par::map_range(cfg.runs, true, |r| {
            let tracker = LossTracker::new(q_star.clone(), PolicyEvaluation::Direct);
            single_run(cfg, &mdp, &name, tracker, sampler.as_ref(), r)
        })
    });
    let mut out = Vec::with_capacity(cfg.runs * cfg.algorithms.len());
    for r in per_run {
        out.extend(r?);
    }
    Ok(out)
}

fn single_run(
    cfg: &ExperimentConfig,
    mdp: &TabularMdp,
    benchmark: &str,
    mut tracker: LossTracker,
    sampler: Option<&Arc<SuccessorSampler>>,
    run: usize,
) -> Result<Vec<RunRecord>> {
    let seed = run_seed(cfg.seed, run);
    let mut init = Preferences::zeros(mdp.n_states(), mdp.n_actions());
    rng::fill_uniform(&mut rng::stream(seed, Purpose::Init), init.as_mut_slice(), mdp.v_max());
    let q0 = QTable::from(init.clone().into_inner());
    // sampling happens before any solver clock starts
    let samples = match sampler {
        Some(s) if cfg.streaming => Some(GenerativeSampleSet::streaming(Arc::clone(s), cfg.budget, seed)?),
        Some(s) => Some(GenerativeSampleSet::generate_with(s, cfg.budget, seed)?),
        None => None,
    };
    let every = cfg.cadence();
    let mut records = Vec::with_capacity(cfg.algorithms.len());
    for alg in &cfg.algorithms {
        let mut monitor = LossMonitor::new(&mut tracker, every);
        if cfg.timing == Timing::Wall {
            monitor = monitor.timed();
        }
        if let Some(t) = cfg.budget_seconds {
            monitor = monitor.with_time_budget(t)?;
        }
        let trajectory = match (alg, &samples) {
            (AlgorithmSpec::Dpp { eta }, _) => dpp_run(mdp, &init, *eta, cfg.budget, Some(monitor))?.trajectory,
            (_, None) => initial_only(mdp, alg, &init, &q0, monitor)?,
            (AlgorithmSpec::DppRl { eta }, Some(s)) => dpp_rl_run(mdp, &init, *eta, s, Some(monitor))?.trajectory,
            (AlgorithmSpec::Ql { omega }, Some(s)) => {
                q_learning_sync_run(mdp, &q0, QlConfig::new(*omega)?, s, Some(monitor))?.2
            }
            (AlgorithmSpec::Vi { sweeps }, Some(s)) => {
                model_based_vi_run(mdp, &q0, s, sweeps.unwrap_or(cfg.budget), Some(monitor))?.2
            }
        };
        records.push(RunRecord {
            benchmark: benchmark.to_string(),
            algorithm: alg.name().to_string(),
            params: alg.params(),
            run,
            seed,
            iterations: trajectory.iterations,
            cpu_seconds: trajectory.seconds,
            losses: trajectory.losses,
        });
    }
    Ok(records)
}

/// Zero budget: only the loss of the initial table.
fn initial_only(
    mdp: &TabularMdp,
    alg: &AlgorithmSpec,
    init: &Preferences,
    q0: &QTable,
    mut monitor: LossMonitor<'_>,
) -> Result<LossTrajectory> {
    let mut t = LossTrajectory::default();
    let policy = match alg {
        AlgorithmSpec::DppRl { eta } => crate::mdp::softmax_policy(init, *eta),
        AlgorithmSpec::Ql { .. } | AlgorithmSpec::Vi { .. } => crate::rl::greedy_policy(q0),
        AlgorithmSpec::Dpp { .. } => return Err(Error::Runtime("exact DPP never needs samples".into())),
    };
    let _ = monitor.observe(&mut t, 0, 0, mdp, || policy)?;
    Ok(t)
}
