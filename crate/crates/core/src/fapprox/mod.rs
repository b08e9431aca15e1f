//! Sampling-based approximate DPP and regularized fitted Q-iteration with a
//! linear model over state-action features.

mod features;
mod ridge;
mod sadpp;

pub use features::{rbf_features, FeatureKind, FeatureMap};
pub use ridge::{ridge_solve, LinearModel};
pub use sadpp::{
    empirical_dpp_target, fit_iteration, fitted_q_target, induced_action, induced_actions,
    rfqi_iteration, run_fapprox, sadpp_iteration, FaAlgorithm, FaRun, SadppConfig, SampleEnv,
    Transition,
};
