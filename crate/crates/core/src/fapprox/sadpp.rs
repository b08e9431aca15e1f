use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::FeatureMap;
use super::ridge::{ridge_solve, LinearModel};
use crate::benchmarks::{bin_centers, policy_error, ReplacementEnv, ThresholdPolicy};
use crate::error::{Error, Result};
use crate::mdp::{boltzmann_softmax_backup, greedy_index, InverseTemperature};
use crate::rng::{self, Purpose, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaAlgorithm {
    Sadpp,
    Rfqi,
}

impl FaAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sadpp => "sadpp",
            Self::Rfqi => "rfqi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SadppConfig {
    pub eta: InverseTemperature,
    pub gamma: f64,
    pub alpha: f64,
    pub n_samples: usize,
    pub iterations: usize,
}

impl SadppConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config(format!("discount {} outside [0, 1)", self.gamma)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config(format!("ridge coefficient must be nonnegative, got {}", self.alpha)));
        }
        if self.n_samples == 0 {
            return Err(Error::config("need at least one sample per iteration"));
        }
        Ok(())
    }
}

/// One observed transition (X, A, r, X′).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub x: f64,
    pub a: usize,
    pub reward: f64,
    pub next: f64,
}

/// A simulator with a sampling distribution μ over state-action pairs.
pub trait SampleEnv {
    fn n_actions(&self) -> usize;
    fn draw_pair(&self, rng: &mut StreamRng) -> (f64, usize);
    fn step(&self, x: f64, a: usize, rng: &mut StreamRng) -> Result<(f64, f64)>;

    fn draw(&self, rng: &mut StreamRng) -> Result<Transition> {
        let (x, a) = self.draw_pair(rng);
        let (next, reward) = self.step(x, a, rng)?;
        Ok(Transition { x, a, reward, next })
    }
}

/// μ uniform over [0, x_max] × {keep, replace}.
impl SampleEnv for ReplacementEnv {
    fn n_actions(&self) -> usize {
        2
    }

    fn draw_pair(&self, rng: &mut StreamRng) -> (f64, usize) {
        (rng.random_range(0.0..=self.x_max), rng.random_range(0..2))
    }

    fn step(&self, x: f64, a: usize, rng: &mut StreamRng) -> Result<(f64, f64)> {
        self.sample(x, a, rng)
    }
}

fn soft_value(model: &LinearModel, map: &FeatureMap, x: f64, eta: InverseTemperature, row: &mut [f64]) -> f64 {
    map.evaluate_row(&model.theta, x, row);
    boltzmann_softmax_backup(row, eta)
}

/// Ψ(X,A) + r + γMηΨ(X′) − MηΨ(X).
pub fn empirical_dpp_target(
    model: &LinearModel,
    map: &FeatureMap,
    t: &Transition,
    eta: InverseTemperature,
    gamma: f64,
) -> f64 {
    let mut row = vec![0.0; map.n_actions];
    let here = soft_value(model, map, t.x, eta, &mut row);
    let psi = row[t.a];
    let there = soft_value(model, map, t.next, eta, &mut row);
    psi + t.reward + gamma * there - here
}

/// r + γ max_a′ θᵀΦ(X′, a′).
pub fn fitted_q_target(model: &LinearModel, map: &FeatureMap, t: &Transition, gamma: f64) -> f64 {
    let mut row = vec![0.0; map.n_actions];
    map.evaluate_row(&model.theta, t.next, &mut row);
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    t.reward + gamma * best
}

/// Regresses the algorithm's targets on a fixed batch of transitions.
pub fn fit_iteration(
    algorithm: FaAlgorithm,
    cfg: &SadppConfig,
    model: &LinearModel,
    map: &FeatureMap,
    batch: &[Transition],
) -> Result<LinearModel> {
    let m = map.dim();
    if model.theta.len() != m {
        return Err(Error::input(format!("model has {} weights, map has {m}", model.theta.len())));
    }
    let mut features = vec![0.0; batch.len() * m];
    let targets: Vec<f64> = batch
        .iter()
        .zip(features.chunks_exact_mut(m))
        .map(|(t, phi)| {
            map.write(t.x, t.a, phi);
            match algorithm {
                FaAlgorithm::Sadpp => empirical_dpp_target(model, map, t, cfg.eta, cfg.gamma),
                FaAlgorithm::Rfqi => fitted_q_target(model, map, t, cfg.gamma),
            }
        })
        .collect();
    ridge_solve(&features, &targets, m, cfg.alpha)
}

fn draw_batch(env: &dyn SampleEnv, n: usize, rng: &mut StreamRng) -> Result<Vec<Transition>> {
    (0..n).map(|_| env.draw(rng)).collect()
}

/// Draws N fresh transitions and fits the SADPP targets.
pub fn sadpp_iteration(
    cfg: &SadppConfig,
    model: &LinearModel,
    map: &FeatureMap,
    env: &dyn SampleEnv,
    rng: &mut StreamRng,
) -> Result<LinearModel> {
    let batch = draw_batch(env, cfg.n_samples, rng)?;
    fit_iteration(FaAlgorithm::Sadpp, cfg, model, map, &batch)
}

/// Draws N fresh transitions and fits the fitted-Q targets.
pub fn rfqi_iteration(
    cfg: &SadppConfig,
    model: &LinearModel,
    map: &FeatureMap,
    env: &dyn SampleEnv,
    rng: &mut StreamRng,
) -> Result<LinearModel> {
    let batch = draw_batch(env, cfg.n_samples, rng)?;
    fit_iteration(FaAlgorithm::Rfqi, cfg, model, map, &batch)
}

/// Greedy action of θᵀΦ(x, ·), lowest index on ties. For SADPP this is the
/// mode of the soft-max policy for every η.
pub fn induced_action(model: &LinearModel, map: &FeatureMap, x: f64) -> usize {
    let mut row = vec![0.0; map.n_actions];
    map.evaluate_row(&model.theta, x, &mut row);
    greedy_index(&row)
}

pub fn induced_actions(model: &LinearModel, map: &FeatureMap, xs: &[f64]) -> Vec<usize> {
    xs.iter().map(|&x| induced_action(model, map, x)).collect()
}

/// Output of [`run_fapprox`].
#[derive(Debug, Clone, PartialEq)]
pub struct FaRun {
    /// Policy error at k = 0..=K.
    pub errors: Vec<f64>,
    /// Solver seconds up to each k (sampling included, error evaluation
    /// excluded); zeros unless timed.
    pub seconds: Vec<f64>,
    pub model: LinearModel,
}

/// K iterations on the replacement problem from θ₀ ~ U[−1, 1]^m, scoring
/// the induced policy over `n_bins` bins after every iteration.
#[allow(clippy::too_many_arguments)]
pub fn run_fapprox(
    algorithm: FaAlgorithm,
    cfg: &SadppConfig,
    env: &ReplacementEnv,
    map: &FeatureMap,
    threshold: &ThresholdPolicy,
    n_bins: usize,
    seed: u64,
    timed: bool,
) -> Result<FaRun> {
    cfg.validate()?;
    let mut init = rng::stream(seed, Purpose::Init);
    let mut model = LinearModel::zeros(map.dim());
    rng::fill_uniform(&mut init, &mut model.theta, 1.0);
    let mut samples = rng::stream(seed, Purpose::Environment);
    let centers = bin_centers(n_bins, env.x_max);
    let error = |m: &LinearModel| policy_error(&induced_actions(m, map, &centers), env, threshold, n_bins);
    let mut errors = Vec::with_capacity(cfg.iterations + 1);
    let mut seconds = Vec::with_capacity(cfg.iterations + 1);
    let mut spent = Duration::ZERO;
    errors.push(error(&model)?);
    seconds.push(0.0);
    for _ in 0..cfg.iterations {
        let start = Instant::now();
        model = match algorithm {
            FaAlgorithm::Sadpp => sadpp_iteration(cfg, &model, map, env, &mut samples)?,
            FaAlgorithm::Rfqi => rfqi_iteration(cfg, &model, map, env, &mut samples)?,
        };
        if timed {
            spent += start.elapsed();
        }
        errors.push(error(&model)?);
        seconds.push(spent.as_secs_f64());
    }
    Ok(FaRun {
        errors,
        seconds,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::make_random_mdp;
    use crate::exact::{dpp_step, DppState};
    use crate::mdp::{ActionTable, Preferences, TabularMdp};
    use proptest::prelude::*;

    fn cfg(eta: InverseTemperature, gamma: f64, alpha: f64) -> SadppConfig {
        SadppConfig {
            eta,
            gamma,
            alpha,
            n_samples: 50,
            iterations: 5,
        }
    }

    #[test]
    fn target_special_cases() {
        let map = FeatureMap::evenly_spaced(10, 10.0, 2).unwrap();
        let t = Transition { x: 2.0, a: 1, reward: -3.0, next: 4.5 };
        let zero = LinearModel::zeros(20);
        let eta = InverseTemperature::finite(0.5).unwrap();
        assert_eq!(empirical_dpp_target(&zero, &map, &t, eta, 0.6), -3.0);
        assert_eq!(fitted_q_target(&zero, &map, &t, 0.6), -3.0);

        let theta: Vec<f64> = (0..20).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let model = LinearModel { theta };
        let inf = InverseTemperature::Infinite;
        let q0 = map.evaluate(&model.theta, 2.0, 0);
        let q1 = map.evaluate(&model.theta, 2.0, 1);
        let want = q1 - 3.0 - q0.max(q1);
        assert!((empirical_dpp_target(&model, &map, &t, inf, 0.0) - want).abs() < 1e-12);
    }

    #[test]
    fn target_by_hand_with_two_features() {
        // one centre per action block, σ = 1
        let map = FeatureMap::rbf(vec![1.0], vec![1.0], 2).unwrap();
        let model = LinearModel { theta: vec![0.8, -1.3] };
        let t = Transition { x: 0.5, a: 0, reward: 0.25, next: 2.0 };
        let eta = 2.0;
        let g = |x: f64| (-(x - 1.0) * (x - 1.0) / 2.0).exp();
        let soft = |x: f64| {
            let (p0, p1) = (0.8 * g(x), -1.3 * g(x));
            let (w0, w1) = ((eta * p0).exp(), (eta * p1).exp());
            (w0 * p0 + w1 * p1) / (w0 + w1)
        };
        let want = 0.8 * g(0.5) + 0.25 + 0.9 * soft(2.0) - soft(0.5);
        let got = empirical_dpp_target(&model, &map, &t, InverseTemperature::finite(eta).unwrap(), 0.9);
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn zero_reward_env_stays_at_zero() {
        let env = ReplacementEnv::default();
        let zero_env = ZeroReward(env);
        let map = FeatureMap::evenly_spaced(10, 10.0, 2).unwrap();
        let c = cfg(InverseTemperature::finite(1.0).unwrap(), 0.6, 0.1);
        let mut r = rng::seeded(3);
        let m0 = LinearModel::zeros(20);
        assert_eq!(sadpp_iteration(&c, &m0, &map, &zero_env, &mut r).unwrap(), m0);
        assert_eq!(rfqi_iteration(&c, &m0, &map, &zero_env, &mut r).unwrap(), m0);
    }

    struct ZeroReward(ReplacementEnv);

    impl SampleEnv for ZeroReward {
        fn n_actions(&self) -> usize {
            2
        }
        fn draw_pair(&self, rng: &mut StreamRng) -> (f64, usize) {
            self.0.draw_pair(rng)
        }
        fn step(&self, x: f64, a: usize, rng: &mut StreamRng) -> Result<(f64, f64)> {
            self.0.step(x, a, rng).map(|(y, _)| (y, 0.0))
        }
    }

    #[test]
    fn rfqi_with_no_discount_regresses_reward() {
        let env = ReplacementEnv::default();
        let map = FeatureMap::evenly_spaced(10, 10.0, 2).unwrap();
        let c = cfg(InverseTemperature::Infinite, 0.0, 0.01);
        let mut r = rng::seeded(5);
        let batch: Vec<Transition> = (0..200).map(|_| env.draw(&mut r).unwrap()).collect();
        let model = LinearModel { theta: vec![3.0; 20] };
        let fitted = fit_iteration(FaAlgorithm::Rfqi, &c, &model, &map, &batch).unwrap();
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for t in &batch {
            features.extend(map.features(t.x, t.a));
            targets.push(t.reward);
        }
        assert_eq!(fitted, ridge_solve(&features, &targets, 20, 0.01).unwrap());
    }

    #[test]
    fn indicator_features_reproduce_exact_dpp() {
        // deterministic successors so one sample per pair is exhaustive
        let base = make_random_mdp(10, 2, 0.9, 3).unwrap();
        let mut p = vec![0.0; 10 * 2 * 10];
        for x in 0..10 {
            p[(x * 2) * 10 + (x + 1) % 10] = 1.0;
            p[(x * 2 + 1) * 10 + (x + 7) % 10] = 1.0;
        }
        let mdp = TabularMdp::new(10, 2, p, base.rewards().clone(), 0.9).unwrap();
        let map = FeatureMap::indicator(10, 2).unwrap();
        let eta = InverseTemperature::finite(1.3).unwrap();
        let mut theta = vec![0.0; 20];
        rng::fill_uniform(&mut rng::seeded(1), &mut theta, 1.0);
        // feature layout is [a][x], tables are [x][a]
        let mut table = ActionTable::zeros(10, 2);
        for x in 0..10 {
            for a in 0..2 {
                table.set(x, a, theta[a * 10 + x]);
            }
        }
        let exact = dpp_step(&mdp, &DppState::new(Preferences::from(table)), eta).unwrap();
        let mut batch = Vec::new();
        for x in 0..10 {
            for a in 0..2 {
                let y = mdp.transition_row(x, a).iter().position(|&q| q == 1.0).unwrap();
                batch.push(Transition { x: x as f64, a, reward: mdp.reward(x, a), next: y as f64 });
            }
        }
        let c = SadppConfig { eta, gamma: 0.9, alpha: 1e-12, n_samples: 20, iterations: 1 };
        let fitted = fit_iteration(FaAlgorithm::Sadpp, &c, &LinearModel { theta }, &map, &batch).unwrap();
        for x in 0..10 {
            for a in 0..2 {
                assert!((fitted.theta[a * 10 + x] - exact.psi.get(x, a)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn seeded_runs_reproduce() {
        let env = ReplacementEnv::default();
        let t = env.optimal_threshold().unwrap();
        let map = FeatureMap::evenly_spaced(10, 10.0, 2).unwrap();
        let c = cfg(InverseTemperature::finite(1.0).unwrap(), 0.6, 0.1);
        let a = run_fapprox(FaAlgorithm::Sadpp, &c, &env, &map, &t, 100, 9, false).unwrap();
        let b = run_fapprox(FaAlgorithm::Sadpp, &c, &env, &map, &t, 100, 9, false).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.errors.len(), 6);
        assert!(a.seconds.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn induced_action_ties_and_order() {
        let map = FeatureMap::indicator(1, 2).unwrap();
        assert_eq!(induced_action(&LinearModel { theta: vec![2.0, 2.0] }, &map, 0.0), 0);
        assert_eq!(induced_action(&LinearModel { theta: vec![1.0, 3.0] }, &map, 0.0), 1);
    }

    proptest! {
        #[test]
        fn induced_action_invariances(seed in 0u64..10_000, scale in 0.01f64..100.0, shift in -50.0f64..50.0, x in 0.0f64..10.0) {
            let map = FeatureMap::evenly_spaced(10, 10.0, 2).unwrap();
            let mut theta = vec![0.0; 20];
            rng::fill_uniform(&mut rng::seeded(seed), &mut theta, 1.0);
            let base = induced_action(&LinearModel { theta: theta.clone() }, &map, x);
            let scaled = LinearModel { theta: theta.iter().map(|t| t * scale).collect() };
            prop_assert_eq!(induced_action(&scaled, &map, x), base);
            let mut row = vec![0.0; 2];
            map.evaluate_row(&theta, x, &mut row);
            let shifted: Vec<f64> = row.iter().map(|v| v + shift).collect();
            if (row[0] - row[1]).abs() > 1e-9 {
                prop_assert_eq!(greedy_index(&shifted), base);
            }
        }
    }
}
