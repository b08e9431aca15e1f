//! Log-partition and Boltzmann soft-max operators over one preference row.
//!
//! Every exponential is taken after shifting by the row maximum, so no
//! finite input can overflow.

use super::types::{ActionTable, InverseTemperature, Preferences, StochasticPolicy};

/// Index of the largest entry, lowest index on ties.
pub fn greedy_index(row: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = a;
        }
    }
    best
}

fn row_max(row: &[f64]) -> f64 {
    row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// (1/η) log Σ_a exp(η ψ_a). At η = ∞ this is the max.
pub fn log_sum_exp_backup(row: &[f64], eta: InverseTemperature) -> f64 {
    let m = row_max(row);
    match eta {
        InverseTemperature::Infinite => m,
        InverseTemperature::Finite(eta) => {
            let s: f64 = row.iter().map(|&v| (eta * (v - m)).exp()).sum();
            m + s.ln() / eta
        }
    }
}

/// Σ_a softmax(ηψ)_a ψ_a. At η = ∞ this is the max.
pub fn boltzmann_softmax_backup(row: &[f64], eta: InverseTemperature) -> f64 {
    let m = row_max(row);
    match eta {
        InverseTemperature::Infinite => m,
        InverseTemperature::Finite(eta) => {
            let mut z = 0.0;
            let mut acc = 0.0;
            for &v in row {
                let w = (eta * (v - m)).exp();
                z += w;
                acc += w * (v - m);
            }
            m + acc / z
        }
    }
}

/// Writes softmax(η ψ) into `out`; greedy one-hot at η = ∞.
pub fn softmax_row(row: &[f64], eta: InverseTemperature, out: &mut [f64]) {
    debug_assert_eq!(row.len(), out.len());
    match eta {
        InverseTemperature::Infinite => {
            out.fill(0.0);
            out[greedy_index(row)] = 1.0;
        }
        InverseTemperature::Finite(eta) => {
            let m = row_max(row);
            let mut z = 0.0;
            for (o, &v) in out.iter_mut().zip(row) {
                *o = (eta * (v - m)).exp();
                z += *o;
            }
            for o in out.iter_mut() {
                *o /= z;
            }
        }
    }
}

/// Soft-max policy of a preference table.
pub fn softmax_policy(psi: &Preferences, eta: InverseTemperature) -> StochasticPolicy {
    let (s, l) = psi.shape();
    let mut table = ActionTable::zeros(s, l);
    crate::par::for_each_chunk_mut(table.as_mut_slice(), l.max(1), |x, out| {
        softmax_row(psi.row(x), eta, out)
    });
    StochasticPolicy::from_table_unchecked(table)
}
