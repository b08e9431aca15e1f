//! Continuous optimal-replacement problem.
//!
//! The state is the accumulated use x ∈ [0, x_max] of a product. Keeping it
//! (action 0) costs c(x) = slope·x and lets the use grow by an Exp(β)
//! increment; replacing it (action 1) costs C + c(0) and restarts the use
//! from an Exp(β) draw. A next state beyond x_max forces an immediate
//! replacement: the replacement cost is charged again and a fresh state is
//! drawn as if action 1 had been taken.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Out-of-domain redraws allowed per transition before giving up.
const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplacementEnv {
    pub beta: f64,
    pub cost: f64,
    pub slope: f64,
    pub gamma: f64,
    pub x_max: f64,
}

impl Default for ReplacementEnv {
    fn default() -> Self {
        Self {
            beta: 0.5,
            cost: 30.0,
            slope: 4.0,
            gamma: 0.6,
            x_max: 10.0,
        }
    }
}

impl ReplacementEnv {
    pub fn new(beta: f64, cost: f64, slope: f64, gamma: f64, x_max: f64) -> Result<Self> {
        let env = Self {
            beta,
            cost,
            slope,
            gamma,
            x_max,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.cost > 0.0 && self.cost.is_finite()) {
            return Err(Error::config(format!("cost must be positive, got {}", self.cost)));
        }
        if !(self.slope >= 0.0 && self.slope.is_finite()) {
            return Err(Error::config(format!("slope must be nonnegative, got {}", self.slope)));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config(format!("discount {} outside [0, 1)", self.gamma)));
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return Err(Error::config(format!("x_max must be positive, got {}", self.x_max)));
        }
        Ok(())
    }

    pub fn maintenance(&self, x: f64) -> f64 {
        self.slope * x
    }

    /// r(x, 0) = −c(x), r(x, 1) = −C − c(0).
    pub fn reward(&self, x: f64, a: usize) -> f64 {
        if a == 0 {
            -self.maintenance(x)
        } else {
            self.replace_reward()
        }
    }

    fn replace_reward(&self) -> f64 {
        -self.cost - self.maintenance(0.0)
    }

    fn check_state(&self, x: f64) -> Result<()> {
        if !(0.0..=self.x_max).contains(&x) {
            return Err(Error::input(format!("state {x} outside [0, {}]", self.x_max)));
        }
        Ok(())
    }

    /// Draws (next state, reward) for action `a` from state `x`.
    pub fn sample<R: Rng + ?Sized>(&self, x: f64, a: usize, rng: &mut R) -> Result<(f64, f64)> {
        self.check_state(x)?;
        if a > 1 {
            return Err(Error::input(format!("action {a} out of range")));
        }
        let exp = Exp::new(self.beta).map_err(|e| Error::config(e.to_string()))?;
        let mut reward = self.reward(x, a);
        let mut y = if a == 0 { x } else { 0.0 } + exp.sample(rng);
        let mut redraws = 0;
        while y > self.x_max {
            if redraws == MAX_REDRAWS {
                return Err(Error::Runtime(format!(
                    "replacement sampler exceeded {MAX_REDRAWS} redraws"
                )));
            }
            redraws += 1;
            reward += self.replace_reward();
            y = exp.sample(rng);
        }
        Ok((y, reward))
    }

    /// Density of the next state on [0, x_max], including the redraw rule.
    pub fn transition_density(&self, x: f64, a: usize, y: f64) -> f64 {
        if !(0.0..=self.x_max).contains(&y) {
            return 0.0;
        }
        let b = self.beta;
        let fresh = b * (-b * y).exp() / (1.0 - (-b * self.x_max).exp());
        if a == 1 {
            return fresh;
        }
        let direct = if y >= x { b * (-b * (y - x)).exp() } else { 0.0 };
        direct + (-b * (self.x_max - x)).exp() * fresh
    }

    /// ∫₀^x̄ c′(y)/(1−γ)·(1 − γ e^{−β(1−γ)y}) dy for linear c.
    pub fn threshold_integral(&self, x_bar: f64) -> f64 {
        let g = self.gamma;
        let k = self.beta * (1.0 - g);
        self.slope / (1.0 - g) * (x_bar - g * (1.0 - (-k * x_bar).exp()) / k)
    }

    /// Solves C = threshold_integral(x̄) for x̄ by bisection on [0, x_max].
    pub fn optimal_threshold(&self) -> Result<ThresholdPolicy> {
        self.validate()?;
        let f = |x: f64| self.threshold_integral(x) - self.cost;
        let (mut lo, mut hi) = (0.0, self.x_max);
        if f(hi) < 0.0 {
            return Err(Error::config(format!(
                "no replacement threshold in [0, {}]: keeping is always optimal",
                self.x_max
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = f(mid);
            if v.abs() <= 1e-10 {
                return Ok(ThresholdPolicy { x_bar: mid });
            }
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi.max(1.0) {
                break;
            }
        }
        Ok(ThresholdPolicy {
            x_bar: 0.5 * (lo + hi),
        })
    }
}

/// Keep while x ≤ x̄, replace above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub x_bar: f64,
}

impl ThresholdPolicy {
    pub fn action(&self, x: f64) -> usize {
        usize::from(x > self.x_bar)
    }
}

/// Centres (k + ½)·x_max/K of K uniform bins on [0, x_max].
pub fn bin_centers(n_bins: usize, x_max: f64) -> Vec<f64> {
    (0..n_bins)
        .map(|k| (k as f64 + 0.5) * x_max / n_bins as f64)
        .collect()
}

/// Fraction of the K bin centres where `actions` differs from the threshold
/// policy.
pub fn policy_error(
    actions: &[usize],
    env: &ReplacementEnv,
    threshold: &ThresholdPolicy,
    n_bins: usize,
) -> Result<f64> {
    if actions.len() != n_bins || n_bins == 0 {
        return Err(Error::input(format!(
            "{} actions supplied for {n_bins} bins",
            actions.len()
        )));
    }
    let wrong = bin_centers(n_bins, env.x_max)
        .iter()
        .zip(actions)
        .filter(|(&x, &a)| threshold.action(x) != a)
        .count();
    Ok(wrong as f64 / n_bins as f64)
}
