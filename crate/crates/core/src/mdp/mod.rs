//! Finite MDP data model and the Bellman / soft-max operators shared by all
//! solvers.

pub(crate) mod bellman;
mod eval;
mod softmax;
mod types;

pub use bellman::{
    bellman_optimality_backup, bellman_policy_backup, expected_next, greedy_values,
    policy_values,
};
pub use eval::{
    evaluate_policy, evaluate_policy_direct, linf_loss, optimal_q, optimal_q_policy_iteration,
    LossTracker, PolicyEvaluation,
};
pub use softmax::{
    boltzmann_softmax_backup, greedy_index, log_sum_exp_backup, softmax_policy, softmax_row,
};
pub use types::{
    ActionTable, InverseTemperature, MdpDocument, Preferences, QTable, StochasticPolicy,
    TabularMdp, PREFERENCE_CLAMP, PROBABILITY_TOLERANCE,
};
