use super::types::{ActionTable, QTable, StochasticPolicy, TabularMdp};
use crate::error::{Error, Result};
use crate::par;

/// (PV)(x, a) = Σ_y P(y|x,a) V(y) for every pair.
pub fn expected_next(mdp: &TabularMdp, v: &[f64]) -> ActionTable {
    let (s, l) = (mdp.n_states(), mdp.n_actions());
    debug_assert_eq!(v.len(), s);
    let mut out = ActionTable::zeros(s, l);
    par::for_each_chunk_mut(out.as_mut_slice(), l, |x, row| {
        for (a, o) in row.iter_mut().enumerate() {
            *o = dot(mdp.transition_row(x, a), v);
        }
    });
    out
}

/// r + γ P V.
pub(crate) fn backup_from_values(mdp: &TabularMdp, v: &[f64]) -> QTable {
    let (s, l) = (mdp.n_states(), mdp.n_actions());
    let gamma = mdp.gamma();
    let mut out = ActionTable::zeros(s, l);
    par::for_each_chunk_mut(out.as_mut_slice(), l, |x, row| {
        for (a, o) in row.iter_mut().enumerate() {
            *o = mdp.reward(x, a) + gamma * dot(mdp.transition_row(x, a), v);
        }
    });
    QTable::from(out)
}

pub(crate) fn dot(p: &[f64], v: &[f64]) -> f64 {
    p.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// (πQ)(x) = Σ_a π(a|x) Q(x, a).
pub fn policy_values(pi: &StochasticPolicy, q: &ActionTable) -> Vec<f64> {
    (0..q.n_states()).map(|x| dot(pi.row(x), q.row(x))).collect()
}

/// (MQ)(x) = max_a Q(x, a).
pub fn greedy_values(q: &ActionTable) -> Vec<f64> {
    q.rows()
        .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// T^π Q = r + γ P^π Q.
pub fn bellman_policy_backup(
    mdp: &TabularMdp,
    q: &QTable,
    pi: &StochasticPolicy,
) -> Result<QTable> {
    q.check_shape(mdp.n_states(), mdp.n_actions(), "action-value table")?;
    pi.table()
        .check_shape(mdp.n_states(), mdp.n_actions(), "policy")?;
    Ok(backup_from_values(mdp, &policy_values(pi, q)))
}

/// T Q = r + γ P M Q.
pub fn bellman_optimality_backup(mdp: &TabularMdp, q: &QTable) -> Result<QTable> {
    q.check_shape(mdp.n_states(), mdp.n_actions(), "action-value table")?;
    if !q.is_finite() {
        return Err(Error::input("action-value table has non-finite entries"));
    }
    Ok(backup_from_values(mdp, &greedy_values(q)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::make_random_mdp;
    use crate::mdp::softmax_policy;
    use crate::mdp::{InverseTemperature, Preferences};
    use crate::rng;
    use proptest::prelude::*;

    fn random_table(s: usize, l: usize, seed: u64, scale: f64) -> ActionTable {
        let mut data = vec![0.0; s * l];
        rng::fill_uniform(&mut rng::seeded(seed), &mut data, scale);
        ActionTable::from_vec(s, l, data).unwrap()
    }

    fn single() -> TabularMdp {
        TabularMdp::new(1, 1, vec![1.0], ActionTable::filled(1, 1, 1.0), 0.5).unwrap()
    }

    #[test]
    fn single_state_backup() {
        let m = single();
        let q = QTable::zeros(1, 1);
        let pi = StochasticPolicy::uniform(1, 1);
        assert_eq!(bellman_policy_backup(&m, &q, &pi).unwrap().get(0, 0), 1.0);
        assert_eq!(bellman_optimality_backup(&m, &q).unwrap().get(0, 0), 1.0);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let m = single();
        let q = QTable::zeros(2, 1);
        assert!(bellman_optimality_backup(&m, &q).is_err());
        let pi = StochasticPolicy::uniform(1, 2);
        assert!(bellman_policy_backup(&m, &QTable::zeros(1, 1), &pi).is_err());
    }

    #[test]
    fn backups_match_triple_loop() {
        let m = make_random_mdp(4, 2, 0.8, 11).unwrap();
        let q = QTable::from(random_table(4, 2, 3, 5.0));
        let psi = Preferences::from(random_table(4, 2, 4, 1.0));
        let pi = softmax_policy(&psi, InverseTemperature::Finite(1.3));
        let tp = bellman_policy_backup(&m, &q, &pi).unwrap();
        let t = bellman_optimality_backup(&m, &q).unwrap();
        for x in 0..4 {
            for a in 0..2 {
                let mut sp = 0.0;
                let mut so = 0.0;
                for y in 0..4 {
                    let p = m.transition_row(x, a)[y];
                    let mut best = f64::NEG_INFINITY;
                    for b in 0..2 {
                        sp += p * pi.prob(y, b) * q.get(y, b);
                        best = best.max(q.get(y, b));
                    }
                    so += p * best;
                }
                assert!((tp.get(x, a) - (m.reward(x, a) + 0.8 * sp)).abs() < 1e-12);
                assert!((t.get(x, a) - (m.reward(x, a) + 0.8 * so)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_rewards_zero_q() {
        let m = make_random_mdp(5, 3, 0.9, 2).unwrap();
        let zero = TabularMdp::new(5, 3, m.transitions().to_vec(), ActionTable::zeros(5, 3), 0.9)
            .unwrap();
        let out = bellman_optimality_backup(&zero, &QTable::zeros(5, 3)).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn backups_are_gamma_contractions(seed in 0u64..10_000, s in 1usize..8, l in 1usize..4,
                                          gamma in 0.0f64..0.99) {
            let m = make_random_mdp(s, l, gamma, seed).unwrap();
            let q1 = QTable::from(random_table(s, l, seed ^ 1, 10.0));
            let q2 = QTable::from(random_table(s, l, seed ^ 2, 10.0));
            let d = q1.as_slice().iter().zip(q2.as_slice()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            let t1 = bellman_optimality_backup(&m, &q1).unwrap();
            let t2 = bellman_optimality_backup(&m, &q2).unwrap();
            let dt = t1.as_slice().iter().zip(t2.as_slice()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            prop_assert!(dt <= gamma * d + 1e-12);
            let pi = StochasticPolicy::uniform(s, l);
            let p1 = bellman_policy_backup(&m, &q1, &pi).unwrap();
            let p2 = bellman_policy_backup(&m, &q2, &pi).unwrap();
            let dp = p1.as_slice().iter().zip(p2.as_slice()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            prop_assert!(dp <= gamma * d + 1e-12);
        }
    }
}
