use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Gaussian bumps exp(−(x−c)²/(2σ²)).
    Rbf { centers: Vec<f64>, bandwidths: Vec<f64> },
    /// One-hot over integer states 0..n_states.
    Indicator { n_states: usize },
}

/// State features replicated in one block per action; Φ(x, a) is zero
/// outside the block of a.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub kind: FeatureKind,
    pub n_actions: usize,
}

impl FeatureMap {
    pub fn rbf(centers: Vec<f64>, bandwidths: Vec<f64>, n_actions: usize) -> Result<Self> {
        if centers.is_empty() || centers.len() != bandwidths.len() {
            return Err(Error::config(format!(
                "{} centers with {} bandwidths",
                centers.len(),
                bandwidths.len()
            )));
        }
        if bandwidths.iter().any(|&s| !(s > 0.0 && s.is_finite())) || centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("bandwidths must be positive and centers finite"));
        }
        if n_actions == 0 {
            return Err(Error::config("feature map needs at least one action"));
        }
        Ok(Self {
            kind: FeatureKind::Rbf { centers, bandwidths },
            n_actions,
        })
    }

    /// `n` centers evenly spaced on [0, x_max] with bandwidth equal to the
    /// spacing.
    pub fn evenly_spaced(n: usize, x_max: f64, n_actions: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::config("need at least two centers"));
        }
        let h = x_max / (n - 1) as f64;
        let centers = (0..n).map(|i| i as f64 * h).collect();
        Self::rbf(centers, vec![h; n], n_actions)
    }

    pub fn indicator(n_states: usize, n_actions: usize) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::config("indicator map needs states and actions"));
        }
        Ok(Self {
            kind: FeatureKind::Indicator { n_states },
            n_actions,
        })
    }

    pub fn block_len(&self) -> usize {
        match &self.kind {
            FeatureKind::Rbf { centers, .. } => centers.len(),
            FeatureKind::Indicator { n_states } => *n_states,
        }
    }

    /// Total number of basis functions m.
    pub fn dim(&self) -> usize {
        self.block_len() * self.n_actions
    }

    /// Writes Φ(x, a) into `out` (length m).
    pub fn write(&self, x: f64, a: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        debug_assert!(a < self.n_actions);
        out.fill(0.0);
        let b = self.block_len();
        let block = &mut out[a * b..(a + 1) * b];
        match &self.kind {
            FeatureKind::Rbf { centers, bandwidths } => {
                for ((o, c), s) in block.iter_mut().zip(centers).zip(bandwidths) {
                    let d = x - c;
                    *o = (-d * d / (2.0 * s * s)).exp();
                }
            }
            FeatureKind::Indicator { n_states } => {
                let i = x.round();
                if i >= 0.0 && (i as usize) < *n_states {
                    block[i as usize] = 1.0;
                }
            }
        }
    }

    pub fn features(&self, x: f64, a: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.write(x, a, &mut out);
        out
    }

    /// θᵀΦ(x, a) without materializing Φ.
    pub fn evaluate(&self, theta: &[f64], x: f64, a: usize) -> f64 {
        let b = self.block_len();
        let block = &theta[a * b..(a + 1) * b];
        match &self.kind {
            FeatureKind::Rbf { centers, bandwidths } => block
                .iter()
                .zip(centers)
                .zip(bandwidths)
                .map(|((t, c), s)| {
                    let d = x - c;
                    t * (-d * d / (2.0 * s * s)).exp()
                })
                .sum(),
            FeatureKind::Indicator { n_states } => {
                let i = x.round();
                if i >= 0.0 && (i as usize) < *n_states {
                    block[i as usize]
                } else {
                    0.0
                }
            }
        }
    }

    /// θᵀΦ(x, ·) for every action.
    pub fn evaluate_row(&self, theta: &[f64], x: f64, out: &mut [f64]) {
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.evaluate(theta, x, a);
        }
    }
}

/// Φ(x, a) for the given map.
pub fn rbf_features(x: f64, a: usize, map: &FeatureMap) -> Vec<f64> {
    map.features(x, a)
}
