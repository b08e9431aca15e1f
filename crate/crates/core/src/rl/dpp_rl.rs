use super::samples::GenerativeSampleSet;
use crate::error::{Error, Result};
use crate::exact::{softmax_values, LossMonitor, LossTrajectory};
use crate::mdp::{softmax_policy, ActionTable, InverseTemperature, Preferences, StochasticPolicy, TabularMdp};
use crate::par;

fn check_column(psi: &Preferences, rewards: &ActionTable, column: &[u32]) -> Result<()> {
    let (s, l) = rewards.shape();
    psi.check_shape(s, l, "preferences")?;
    if column.len() != s * l {
        return Err(Error::input(format!(
            "sample column has {} entries, expected {}",
            column.len(),
            s * l
        )));
    }
    if let Some(y) = column.iter().find(|&&y| y as usize >= s) {
        return Err(Error::input(format!("sampled state {y} out of range")));
    }
    Ok(())
}

/// Ψ(x,a) + r(x,a) + γ MηΨ(y_k(x,a)) − MηΨ(x), clamped, together with
/// max |r + γ MηΨ(y_k)| over all pairs.
pub fn dpp_rl_step_traced(
    rewards: &ActionTable,
    psi: &Preferences,
    column: &[u32],
    eta: InverseTemperature,
    gamma: f64,
) -> Result<(Preferences, f64)> {
    check_column(psi, rewards, column)?;
    let l = rewards.n_actions();
    let m = softmax_values(psi, eta);
    let mut out = psi.clone().into_inner();
    par::for_each_chunk_mut(out.as_mut_slice(), l, |x, row| {
        for (a, v) in row.iter_mut().enumerate() {
            let target = rewards.get(x, a) + gamma * m[column[x * l + a] as usize];
            *v += target - m[x];
        }
    });
    let mut norm = 0.0f64;
    for (z, &y) in column.iter().enumerate() {
        let target = rewards.as_slice()[z] + gamma * m[y as usize];
        norm = norm.max(target.abs());
    }
    let mut psi = Preferences::from(out);
    psi.clamp_entries();
    Ok((psi, norm))
}

/// One DPP-RL update from the successor column y_k.
pub fn dpp_rl_step(
    rewards: &ActionTable,
    psi: &Preferences,
    column: &[u32],
    eta: InverseTemperature,
    gamma: f64,
) -> Result<Preferences> {
    dpp_rl_step_traced(rewards, psi, column, eta, gamma).map(|(p, _)| p)
}

#[derive(Debug, Clone)]
pub struct DppRlRun {
    pub psi: Preferences,
    pub policy: StochasticPolicy,
    pub trajectory: LossTrajectory,
    /// max |r + γMηΨ_k(y_k)| at every iteration k.
    pub target_norms: Vec<f64>,
}

/// K = n_draws DPP-RL iterations, one sample column per iteration.
pub fn dpp_rl_run(
    mdp: &TabularMdp,
    psi0: &Preferences,
    eta: InverseTemperature,
    samples: &GenerativeSampleSet,
    mut monitor: Option<LossMonitor<'_>>,
) -> Result<DppRlRun> {
    samples.check_mdp(mdp)?;
    psi0.check_shape(mdp.n_states(), mdp.n_actions(), "initial preferences")?;
    let k_max = samples.n_draws();
    let mut psi = psi0.clone();
    let mut column = vec![0u32; mdp.n_states() * mdp.n_actions()];
    let mut target_norms = Vec::with_capacity(k_max);
    let mut trajectory = LossTrajectory::default();
    for k in 0..=k_max {
        if k > 0 {
            samples.column(k - 1, &mut column);
            let (next, norm) = dpp_rl_step_traced(mdp.rewards(), &psi, &column, eta, mdp.gamma())?;
            psi = next;
            target_norms.push(norm);
        }
        if let Some(m) = monitor.as_mut() {
            if m.observe(&mut trajectory, k, k_max, mdp, || softmax_policy(&psi, eta))? {
                break;
            }
        }
    }
    let policy = softmax_policy(&psi, eta);
    Ok(DppRlRun {
        psi,
        policy,
        trajectory,
        target_norms,
    })
}
