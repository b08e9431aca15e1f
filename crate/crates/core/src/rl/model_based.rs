use super::greedy_policy;
use super::samples::GenerativeSampleSet;
use crate::error::Result;
use crate::exact::{LossMonitor, LossTrajectory};
use crate::mdp::{bellman_optimality_backup, QTable, StochasticPolicy, TabularMdp};

/// (P̂, r, γ): successor frequencies of the sample set with the true rewards.
pub fn empirical_model(mdp: &TabularMdp, samples: &GenerativeSampleSet) -> Result<TabularMdp> {
    samples.check_mdp(mdp)?;
    let n = samples.n_draws() as f64;
    let p: Vec<f64> = samples.counts().into_iter().map(|c| c as f64 / n).collect();
    TabularMdp::new(mdp.n_states(), mdp.n_actions(), p, mdp.rewards().clone(), mdp.gamma())?
        .with_r_max(mdp.r_max())
}

/// Fits P̂ from all samples, then runs `vi_iterations` sweeps of value
/// iteration on the fitted model. Losses are measured on the true MDP.
pub fn model_based_vi_run(
    mdp: &TabularMdp,
    q0: &QTable,
    samples: &GenerativeSampleSet,
    vi_iterations: usize,
    mut monitor: Option<LossMonitor<'_>>,
) -> Result<(QTable, StochasticPolicy, LossTrajectory)> {
    let model = empirical_model(mdp, samples)?;
    let mut q = q0.clone();
    let mut trajectory = LossTrajectory::default();
    for k in 0..=vi_iterations {
        if k > 0 {
            q = bellman_optimality_backup(&model, &q)?;
        }
        if let Some(m) = monitor.as_mut() {
            if m.observe(&mut trajectory, k, vi_iterations, mdp, || greedy_policy(&q))? {
                break;
            }
        }
    }
    let policy = greedy_policy(&q);
    Ok((q, policy, trajectory))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::make_linear_mdp;
    use crate::mdp::{optimal_q, ActionTable, LossTracker, PolicyEvaluation};

    fn coin() -> TabularMdp {
        let p = vec![0.5, 0.5, 1.0, 0.0, 0.5, 0.5, 0.0, 1.0];
        let r = ActionTable::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.5]]).unwrap();
        TabularMdp::new(2, 2, p, r, 0.8).unwrap()
    }

    #[test]
    fn single_draw_gives_one_hot_rows() {
        let mdp = make_linear_mdp(8, 0.9).unwrap();
        let set = GenerativeSampleSet::generate(&mdp, 1, 5).unwrap();
        let model = empirical_model(&mdp, &set).unwrap();
        for x in 0..8 {
            for a in 0..2 {
                let row = model.transition_row(x, a);
                assert_eq!(row.iter().filter(|&&p| p == 1.0).count(), 1);
                assert_eq!(row[set.draws(x, a)[0] as usize], 1.0);
            }
        }
    }

    #[test]
    fn coin_model_concentrates() {
        let mdp = coin();
        let set = GenerativeSampleSet::generate(&mdp, 10_000, 77).unwrap();
        let model = empirical_model(&mdp, &set).unwrap();
        for x in 0..2 {
            for a in 0..2 {
                let l1: f64 = model
                    .transition_row(x, a)
                    .iter()
                    .zip(mdp.transition_row(x, a))
                    .map(|(p, q)| (p - q).abs())
                    .sum();
                assert!(l1 <= 0.05, "{l1}");
            }
        }
    }

    #[test]
    fn deterministic_mdp_is_solved() {
        let mut p = vec![0.0; 4 * 2 * 4];
        for x in 0..4 {
            p[(x * 2) * 4 + (x + 1) % 4] = 1.0;
            p[(x * 2 + 1) * 4 + x] = 1.0;
        }
        let r = ActionTable::from_rows(&[vec![0.0, 0.1], vec![0.0, -0.5], vec![1.0, 0.0], vec![0.0, 0.2]]).unwrap();
        let mdp = TabularMdp::new(4, 2, p, r, 0.9).unwrap();
        let set = GenerativeSampleSet::generate(&mdp, 3, 1).unwrap();
        let mut t = LossTracker::new(optimal_q(&mdp, 1e-12).unwrap(), PolicyEvaluation::Direct);
        let (_, _, traj) = model_based_vi_run(&mdp, &QTable::zeros(4, 2), &set, 400, Some(LossMonitor::new(&mut t, 100))).unwrap();
        assert!(traj.last().unwrap() < 1e-9);
    }
}
