use serde::{Deserialize, Serialize};

use super::greedy_policy;
use super::samples::GenerativeSampleSet;
use crate::error::{Error, Result};
use crate::exact::{LossMonitor, LossTrajectory};
use crate::mdp::{greedy_values, ActionTable, QTable, StochasticPolicy, TabularMdp};
use crate::par;

/// Polynomial learning step α_k = 1/(k+1)^ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QlConfig {
    omega: f64,
}

impl QlConfig {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega > 0.5 && omega <= 1.0) {
            return Err(Error::config(format!(
                "learning-step exponent must lie in (0.5, 1], got {omega}"
            )));
        }
        Ok(Self { omega })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn step_size(&self, k: usize) -> f64 {
        (k as f64 + 1.0).powf(-self.omega)
    }
}

/// (1−α)Q(x,a) + α(r(x,a) + γ max Q(y_k(x,a), ·)).
pub fn q_learning_step(rewards: &ActionTable, q: &QTable, column: &[u32], alpha: f64, gamma: f64) -> Result<QTable> {
    let (s, l) = rewards.shape();
    q.check_shape(s, l, "action-value table")?;
    if column.len() != s * l || column.iter().any(|&y| y as usize >= s) {
        return Err(Error::input("sample column does not match the table"));
    }
    let m = greedy_values(q);
    let mut out = q.clone().into_inner();
    par::for_each_chunk_mut(out.as_mut_slice(), l, |x, row| {
        for (a, v) in row.iter_mut().enumerate() {
            let target = rewards.get(x, a) + gamma * m[column[x * l + a] as usize];
            *v = (1.0 - alpha) * *v + alpha * target;
        }
    });
    Ok(QTable::from(out))
}

/// Synchronous Q-learning over the K sample columns; greedy final policy.
pub fn q_learning_sync_run(
    mdp: &TabularMdp,
    q0: &QTable,
    cfg: QlConfig,
    samples: &GenerativeSampleSet,
    mut monitor: Option<LossMonitor<'_>>,
) -> Result<(QTable, StochasticPolicy, LossTrajectory)> {
    samples.check_mdp(mdp)?;
    let k_max = samples.n_draws();
    let mut q = q0.clone();
    let mut column = vec![0u32; mdp.n_states() * mdp.n_actions()];
    let mut trajectory = LossTrajectory::default();
    for k in 0..=k_max {
        if k > 0 {
            samples.column(k - 1, &mut column);
            q = q_learning_step(mdp.rewards(), &q, &column, cfg.step_size(k - 1), mdp.gamma())?;
        }
        if let Some(m) = monitor.as_mut() {
            if m.observe(&mut trajectory, k, k_max, mdp, || greedy_policy(&q))? {
                break;
            }
        }
    }
    let policy = greedy_policy(&q);
    Ok((q, policy, trajectory))
}
