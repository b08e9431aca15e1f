//! Dynamic policy programming workbench.
//!
//! The crate is organised around the finite-MDP data model in [`mdp`]:
//!
//! * [`exact`]: model-based DPP, the KL-regularized backup, the auxiliary
//!   action-value recursion used to analyse DPP, performance-loss bound
//!   calculators and the noise-injection experiment against approximate
//!   value iteration.
//! * [`rl`]: generative-model reinforcement learning (DPP-RL, synchronous
//!   Q-learning, model-based Q-value iteration) over shared sample sets.
//! * [`fapprox`]: sampling-based approximate DPP and regularized fitted
//!   Q-iteration over a radial-basis feature map.
//! * [`benchmarks`]: the chain, combination-lock, grid-world and random MDP
//!   generators plus the continuous optimal-replacement environment.
//! * [`harness`]: seeded experiment orchestration, aggregation and CSV output.
//!
//! Inner loops run on rayon when the `parallel` feature is enabled (the
//! default) and fall back to plain iterators otherwise; see [`par`].

pub mod benchmarks;
pub mod cli;
pub mod error;
pub mod exact;
pub mod fapprox;
pub mod harness;
pub mod mdp;
pub mod par;
pub mod rl;
pub mod rng;

pub use error::{Error, Result};
pub use mdp::{
    ActionTable, InverseTemperature, Preferences, QTable, StochasticPolicy, TabularMdp,
};
