use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dpp::{dpp_operator, DppState};
use super::{LossMonitor, LossTrajectory};
use crate::error::{Error, Result};
use crate::mdp::{
    bellman_optimality_backup, softmax_policy, InverseTemperature, Preferences, QTable,
    StochasticPolicy, TabularMdp,
};
use crate::mdp::greedy_index;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    UniformIid,
}

/// Additive error ε_k(x, a) injected after every exact update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub magnitude: f64,
    pub kind: NoiseKind,
}

impl NoiseSpec {
    pub const NONE: Self = Self {
        magnitude: 0.0,
        kind: NoiseKind::None,
    };

    pub fn uniform(magnitude: f64) -> Result<Self> {
        if !(magnitude >= 0.0 && magnitude.is_finite()) {
            return Err(Error::config(format!("noise magnitude must be nonnegative, got {magnitude}")));
        }
        Ok(Self {
            magnitude,
            kind: NoiseKind::UniformIid,
        })
    }

    fn is_active(&self) -> bool {
        self.kind == NoiseKind::UniformIid && self.magnitude > 0.0
    }

    /// Adds a fresh draw to `table` and to the running sum `acc` if given.
    fn perturb(&self, rng: &mut impl Rng, table: &mut [f64], acc: Option<&mut [f64]>) {
        if !self.is_active() {
            return;
        }
        let u = self.magnitude;
        match acc {
            Some(acc) => {
                for (v, e) in table.iter_mut().zip(acc) {
                    let eps = rng.random_range(-u..=u);
                    *v += eps;
                    *e += eps;
                }
            }
            None => {
                for v in table.iter_mut() {
                    *v += rng.random_range(-u..=u);
                }
            }
        }
    }
}

/// Output of [`noisy_dpp_run`].
#[derive(Debug, Clone)]
pub struct NoisyDppRun {
    pub state: DppState,
    pub trajectory: LossTrajectory,
    /// ‖E_k‖/(k+1) for k = 0..K−1, E_k = Σ_{j≤k} ε_j.
    pub averaged_error: Vec<f64>,
}

/// Ψ_{k+1} = OΨ_k + ε_k with ε_k drawn from `noise`.
pub fn noisy_dpp_run(
    mdp: &TabularMdp,
    psi0: &Preferences,
    eta: InverseTemperature,
    iterations: usize,
    noise: NoiseSpec,
    seed: u64,
    mut monitor: Option<LossMonitor<'_>>,
) -> Result<NoisyDppRun> {
    psi0.check_shape(mdp.n_states(), mdp.n_actions(), "initial preferences")?;
    let mut rng = rng::stream(seed, Purpose::Noise);
    let mut state = DppState::new(psi0.clone());
    let mut acc = vec![0.0; psi0.as_slice().len()];
    let mut averaged_error = Vec::with_capacity(iterations);
    let mut trajectory = LossTrajectory::default();
    for k in 0..=iterations {
        if k > 0 {
            let mut psi = dpp_operator(mdp, &state.psi, eta)?;
            noise.perturb(&mut rng, psi.as_mut_slice(), Some(&mut acc));
            psi.clamp_entries();
            state = DppState {
                psi,
                iteration: k,
            };
            let norm = acc.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            averaged_error.push(norm / k as f64);
        }
        if let Some(m) = monitor.as_mut() {
            if m.observe(&mut trajectory, k, iterations, mdp, || softmax_policy(&state.psi, eta))? {
                break;
            }
        }
    }
    Ok(NoisyDppRun {
        state,
        trajectory,
        averaged_error,
    })
}

/// Q_{k+1} = TQ_k + ε_k, recording the loss of the greedy policy.
pub fn noisy_avi_run(
    mdp: &TabularMdp,
    q0: &QTable,
    iterations: usize,
    noise: NoiseSpec,
    seed: u64,
    mut monitor: Option<LossMonitor<'_>>,
) -> Result<(QTable, LossTrajectory)> {
    q0.check_shape(mdp.n_states(), mdp.n_actions(), "initial action values")?;
    let mut rng = rng::stream(seed, Purpose::Noise);
    let mut q = q0.clone();
    let mut trajectory = LossTrajectory::default();
    let l = mdp.n_actions();
    for k in 0..=iterations {
        if k > 0 {
            q = bellman_optimality_backup(mdp, &q)?;
            noise.perturb(&mut rng, q.as_mut_slice(), None);
        }
        if let Some(m) = monitor.as_mut() {
            if m.observe(&mut trajectory, k, iterations, mdp, || {
                let acts: Vec<usize> = q.rows().map(greedy_index).collect();
                StochasticPolicy::deterministic(l, &acts).expect("greedy actions are in range")
            })? {
                break;
            }
        }
    }
    Ok((q, trajectory))
}
