//! Reinforcement learning with a generative model: every algorithm reads the
//! same pre-drawn successor samples.

mod dpp_rl;
mod model_based;
mod qlearning;
mod samples;

pub use dpp_rl::{dpp_rl_run, dpp_rl_step, dpp_rl_step_traced, DppRlRun};
pub use model_based::{empirical_model, model_based_vi_run};
pub use qlearning::{q_learning_step, q_learning_sync_run, QlConfig};
pub use samples::{GenerativeSampleSet, SampleSetHeader, SuccessorSampler};

use crate::mdp::{greedy_index, ActionTable, StochasticPolicy};

/// Greedy deterministic policy of an action-value table.
pub(crate) fn greedy_policy(q: &ActionTable) -> StochasticPolicy {
    let acts: Vec<usize> = q.rows().map(greedy_index).collect();
    StochasticPolicy::deterministic(q.n_actions(), &acts).expect("greedy actions are in range")
}
