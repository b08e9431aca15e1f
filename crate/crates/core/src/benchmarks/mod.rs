//! Benchmark problems: three discrete MDP families used for the RL
//! comparisons, a random-MDP generator for property tests, and the
//! continuous optimal-replacement problem.

mod replacement;
mod tabular;

pub use replacement::{bin_centers, policy_error, ReplacementEnv, ThresholdPolicy};
pub use tabular::{
    make_combination_lock, make_grid_world, make_linear_mdp, make_random_mdp, GridAction,
};
