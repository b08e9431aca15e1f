use super::{LossMonitor, LossTrajectory};
use crate::error::{Error, Result};
use crate::mdp::bellman::{backup_from_values, dot};
use crate::mdp::{
    boltzmann_softmax_backup, softmax_policy, ActionTable, InverseTemperature,
    Preferences, QTable, StochasticPolicy, TabularMdp,
};
use crate::par;

/// Ψ_k together with the number of completed DPP iterations k.
#[derive(Debug, Clone, PartialEq)]
pub struct DppState {
    pub psi: Preferences,
    pub iteration: usize,
}

impl DppState {
    pub fn new(psi: Preferences) -> Self {
        Self { psi, iteration: 0 }
    }

    pub fn policy(&self, eta: InverseTemperature) -> StochasticPolicy {
        softmax_policy(&self.psi, eta)
    }
}

/// Value and policy of the KL-regularized one-step problem.
#[derive(Debug, Clone, PartialEq)]
pub struct KlBackupResult {
    pub value: Vec<f64>,
    pub policy: StochasticPolicy,
}

/// Soft-max expectation MηΨ(x) for every state.
pub(crate) fn softmax_values(psi: &ActionTable, eta: InverseTemperature) -> Vec<f64> {
    par::map_range(psi.n_states(), false, |x| {
        boltzmann_softmax_backup(psi.row(x), eta)
    })
}

/// OΨ(x,a) = Ψ(x,a) + r(x,a) + γ(P MηΨ)(x,a) − MηΨ(x), without clamping.
pub fn dpp_operator(mdp: &TabularMdp, psi: &Preferences, eta: InverseTemperature) -> Result<Preferences> {
    psi.check_shape(mdp.n_states(), mdp.n_actions(), "preferences")?;
    let m = softmax_values(psi, eta);
    let mut out = backup_from_values(mdp, &m).into_inner();
    let l = mdp.n_actions();
    par::for_each_chunk_mut(out.as_mut_slice(), l, |x, row| {
        for (o, &p) in row.iter_mut().zip(psi.row(x)) {
            *o += p - m[x];
        }
    });
    Ok(Preferences::from(out))
}

/// One synchronous DPP sweep, entries clamped to ±PREFERENCE_CLAMP.
pub fn dpp_step(mdp: &TabularMdp, state: &DppState, eta: InverseTemperature) -> Result<DppState> {
    let mut psi = dpp_operator(mdp, &state.psi, eta)?;
    psi.clamp_entries();
    Ok(DppState {
        psi,
        iteration: state.iteration + 1,
    })
}

/// V(x) = (1/η) log Σ_a π̄(a|x) exp(η(r+γPV)(x,a)) and the reweighted
/// baseline.
pub fn kl_regularized_backup(
    mdp: &TabularMdp,
    baseline: &StochasticPolicy,
    v: &[f64],
    eta: InverseTemperature,
) -> Result<KlBackupResult> {
    let (s, l) = (mdp.n_states(), mdp.n_actions());
    baseline.table().check_shape(s, l, "baseline policy")?;
    if v.len() != s {
        return Err(Error::input(format!("value vector has {} entries, expected {s}", v.len())));
    }
    let eta = match eta {
        InverseTemperature::Finite(e) => e,
        InverseTemperature::Infinite => {
            return Err(Error::input("KL-regularized backup needs a finite eta"))
        }
    };
    let q = backup_from_values(mdp, v);
    let mut value = vec![0.0; s];
    let mut policy = ActionTable::zeros(s, l);
    for x in 0..s {
        let base = baseline.row(x);
        let qrow = q.row(x);
        let m = qrow
            .iter()
            .zip(base)
            .filter(|(_, &b)| b > 0.0)
            .map(|(&q, _)| q)
            .fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return Err(Error::input(format!("baseline policy row {x} is identically zero")));
        }
        let out = policy.row_mut(x);
        let mut z = 0.0;
        for a in 0..l {
            out[a] = if base[a] > 0.0 {
                base[a] * (eta * (qrow[a] - m)).exp()
            } else {
                0.0
            };
            z += out[a];
        }
        for o in out.iter_mut() {
            *o /= z;
        }
        value[x] = m + z.ln() / eta;
    }
    Ok(KlBackupResult {
        value,
        policy: StochasticPolicy::from_table_unchecked(policy),
    })
}

/// Q_k = ((k−1)/k)·T^{π_{k−1}}Q_{k−1} + (1/k)·T^{π_{k−1}}Q₀.
pub fn auxiliary_q_step(
    mdp: &TabularMdp,
    q_prev: &QTable,
    q0: &QTable,
    pi_prev: &StochasticPolicy,
    k: usize,
) -> Result<QTable> {
    if k == 0 {
        return Err(Error::input("auxiliary recursion starts at k = 1"));
    }
    let (s, l) = (mdp.n_states(), mdp.n_actions());
    q_prev.check_shape(s, l, "previous auxiliary table")?;
    q0.check_shape(s, l, "initial table")?;
    pi_prev.table().check_shape(s, l, "policy")?;
    let w = (k as f64 - 1.0) / k as f64;
    let mixed: Vec<f64> = (0..s)
        .map(|x| {
            let p = pi_prev.row(x);
            w * dot(p, q_prev.row(x)) + dot(p, q0.row(x)) / k as f64
        })
        .collect();
    // both backups share r; the weights sum to one
    Ok(backup_from_values(mdp, &mixed))
}

/// Output of [`dpp_run`].
#[derive(Debug, Clone)]
pub struct DppRun {
    pub state: DppState,
    pub policy: StochasticPolicy,
    pub trajectory: LossTrajectory,
}

/// Applies `iterations` DPP sweeps from Ψ₀, recording the loss of π_k =
/// softmax(ηΨ_k) when a monitor is supplied.
pub fn dpp_run(
    mdp: &TabularMdp,
    psi0: &Preferences,
    eta: InverseTemperature,
    iterations: usize,
    mut monitor: Option<LossMonitor<'_>>,
) -> Result<DppRun> {
    psi0.check_shape(mdp.n_states(), mdp.n_actions(), "initial preferences")?;
    let mut state = DppState::new(psi0.clone());
    let mut trajectory = LossTrajectory::default();
    for k in 0..=iterations {
        if k > 0 {
            state = dpp_step(mdp, &state, eta)?;
        }
        if let Some(m) = monitor.as_mut() {
            if m.observe(&mut trajectory, k, iterations, mdp, || state.policy(eta))? {
                break;
            }
        }
    }
    let policy = state.policy(eta);
    Ok(DppRun {
        state,
        policy,
        trajectory,
    })
}
