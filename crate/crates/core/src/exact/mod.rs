//! Model-based dynamic policy programming and the quantities used to analyse
//! it.

mod bounds;
mod dpp;
mod noisy;

pub use bounds::{auxiliary_bound, stability_bound, theorem1_bound, theorem3_bound};
pub(crate) use dpp::softmax_values;
pub use dpp::{
    auxiliary_q_step, dpp_operator, dpp_run, dpp_step, kl_regularized_backup, DppRun, DppState,
    KlBackupResult,
};
pub use noisy::{noisy_avi_run, noisy_dpp_run, NoiseKind, NoiseSpec, NoisyDppRun};

use std::time::{Duration, Instant};

use crate::error::Result;
use crate::mdp::{LossTracker, StochasticPolicy, TabularMdp};

/// Loss values recorded at selected iterations.
///
/// `seconds` is the solver time spent up to each checkpoint, excluding loss
/// evaluation; all zeros when timing is off.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrajectory {
    pub iterations: Vec<usize>,
    pub losses: Vec<f64>,
    pub seconds: Vec<f64>,
}

impl LossTrajectory {
    pub fn push(&mut self, k: usize, loss: f64, seconds: f64) {
        self.iterations.push(k);
        self.losses.push(loss);
        self.seconds.push(seconds);
    }

    pub fn last(&self) -> Option<f64> {
        self.losses.last().copied()
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }
}

/// Records ‖Q* − Q^π‖ every `every` iterations, plus the first and last.
pub struct LossMonitor<'a> {
    tracker: &'a mut LossTracker,
    every: usize,
    clock: Option<(Instant, Duration)>,
    budget: Option<Duration>,
}

impl<'a> LossMonitor<'a> {
    pub fn new(tracker: &'a mut LossTracker, every: usize) -> Self {
        Self {
            tracker,
            every: every.max(1),
            clock: None,
            budget: None,
        }
    }

    /// Also measure elapsed solver time, starting now.
    pub fn timed(mut self) -> Self {
        self.clock = Some((Instant::now(), Duration::ZERO));
        self
    }

    /// Stop the solver once its measured time reaches `seconds`. Implies
    /// [`timed`](Self::timed).
    pub fn with_time_budget(mut self, seconds: f64) -> Result<Self> {
        if !(seconds.is_finite() && seconds > 0.0) {
            return Err(crate::Error::config(format!("time budget must be positive, got {seconds}")));
        }
        if self.clock.is_none() {
            self = self.timed();
        }
        self.budget = Some(Duration::from_secs_f64(seconds));
        Ok(self)
    }

    pub(crate) fn due(&self, k: usize, last: usize) -> bool {
        k.is_multiple_of(self.every) || k == last
    }

    fn out_of_time(&self) -> bool {
        match (self.budget, self.clock) {
            (Some(b), Some((start, total))) => total + start.elapsed() >= b,
            _ => false,
        }
    }

    pub(crate) fn observe(
        &mut self,
        out: &mut LossTrajectory,
        k: usize,
        last: usize,
        mdp: &TabularMdp,
        pi: impl FnOnce() -> StochasticPolicy,
    ) -> Result<bool> {
        let stop = k < last && self.out_of_time();
        if !stop && !self.due(k, last) {
            return Ok(false);
        }
        let seconds = match self.clock.as_mut() {
            Some((start, total)) => {
                *total += start.elapsed();
                total.as_secs_f64()
            }
            None => 0.0,
        };
        let loss = self.tracker.loss(mdp, &pi())?;
        out.push(k, loss, seconds);
        if let Some((start, _)) = self.clock.as_mut() {
            *start = Instant::now();
        }
        Ok(stop)
    }
}
