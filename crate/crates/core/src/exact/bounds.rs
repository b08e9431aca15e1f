use crate::error::{Error, Result};
use crate::mdp::InverseTemperature;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::input(format!("discount {gamma} outside [0, 1)")));
    }
    Ok(())
}

fn slack(v_max: f64, n_actions: usize, eta: InverseTemperature) -> f64 {
    4.0 * v_max + eta.entropy_slack(n_actions)
}

/// 2γ(4V_max + log L/η) / ((1−γ)²(k+1)).
pub fn theorem1_bound(
    v_max: f64,
    n_actions: usize,
    eta: InverseTemperature,
    gamma: f64,
    k: usize,
) -> Result<f64> {
    check_gamma(gamma)?;
    let g1 = 1.0 - gamma;
    Ok(2.0 * gamma * slack(v_max, n_actions, eta) / (g1 * g1 * (k as f64 + 1.0)))
}

/// γ(4V_max + log L/η) / ((1−γ)k), for the auxiliary sequence Q_k.
pub fn auxiliary_bound(
    v_max: f64,
    n_actions: usize,
    eta: InverseTemperature,
    gamma: f64,
    k: usize,
) -> Result<f64> {
    check_gamma(gamma)?;
    if k == 0 {
        return Err(Error::input("auxiliary bound needs k >= 1"));
    }
    Ok(gamma * slack(v_max, n_actions, eta) / ((1.0 - gamma) * k as f64))
}

/// Loss bound of approximate DPP given ‖E_j‖ for j = 0..=k.
pub fn theorem3_bound(
    v_max: f64,
    n_actions: usize,
    eta: InverseTemperature,
    gamma: f64,
    k: usize,
    accumulated_error_norms: &[f64],
) -> Result<f64> {
    check_gamma(gamma)?;
    if accumulated_error_norms.len() != k + 1 {
        return Err(Error::input(format!(
            "expected {} accumulated error norms, got {}",
            k + 1,
            accumulated_error_norms.len()
        )));
    }
    let g1 = 1.0 - gamma;
    // Σ_j γ^{k−j}‖E_j‖ by Horner
    let discounted = accumulated_error_norms
        .iter()
        .fold(0.0, |acc, &e| acc * gamma + e);
    let exact = 2.0 * gamma * slack(v_max, n_actions, eta) / g1;
    Ok((exact + discounted) / (g1 * (k as f64 + 1.0)))
}

/// Bound on ‖r + γπΨ(y)‖ along a DPP-RL run: V_max + 2γ log L/(η(1−γ)).
pub fn stability_bound(
    v_max: f64,
    n_actions: usize,
    eta: InverseTemperature,
    gamma: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(v_max + 2.0 * gamma * eta.entropy_slack(n_actions) / (1.0 - gamma))
}
