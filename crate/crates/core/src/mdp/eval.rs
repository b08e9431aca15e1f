use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::bellman::{backup_from_values, bellman_optimality_backup, policy_values};
use super::types::{ActionTable, QTable, StochasticPolicy, TabularMdp};
use crate::error::{Error, Result};

/// Q^π by fixed-point iteration of T^π from zero, stopping once
/// ‖Q − T^π Q‖∞ ≤ `tol` for the returned table.
pub fn evaluate_policy(mdp: &TabularMdp, pi: &StochasticPolicy, tol: f64) -> Result<QTable> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
    }
    pi.table()
        .check_shape(mdp.n_states(), mdp.n_actions(), "policy")?;
    let mut q = QTable::zeros(mdp.n_states(), mdp.n_actions());
    loop {
        let next = backup_from_values(mdp, &policy_values(pi, &q));
        let residual = sup_diff(&next, &q);
        q = next;
        // residual(next) <= γ · residual(q)
        if mdp.gamma() * residual <= tol {
            return Ok(q);
        }
    }
}

/// Q^π from a dense LU solve of (I − γP^π)V = r^π.
///
/// O(S³) once instead of O(S² A log(1/tol)/(1−γ)) sweeps; the better choice
/// whenever γ is close to one.
pub fn evaluate_policy_direct(mdp: &TabularMdp, pi: &StochasticPolicy) -> Result<QTable> {
    pi.table()
        .check_shape(mdp.n_states(), mdp.n_actions(), "policy")?;
    let (s, l) = (mdp.n_states(), mdp.n_actions());
    let gamma = mdp.gamma();
    let mut m = DMatrix::<f64>::identity(s, s);
    let mut b = DVector::<f64>::zeros(s);
    for x in 0..s {
        for a in 0..l {
            let p = pi.prob(x, a);
            if p == 0.0 {
                continue;
            }
            b[x] += p * mdp.reward(x, a);
            for (y, &pt) in mdp.transition_row(x, a).iter().enumerate() {
                if pt != 0.0 {
                    m[(x, y)] -= gamma * p * pt;
                }
            }
        }
    }
    let v = m
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::SingularSystem("policy evaluation matrix".into()))?;
    Ok(backup_from_values(mdp, v.as_slice()))
}

/// Q* by value iteration from zero until the successive change is at most
/// tol·(1−γ)/γ, which guarantees ‖Q − Q*‖∞ ≤ tol.
pub fn optimal_q(mdp: &TabularMdp, tol: f64) -> Result<QTable> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
    }
    let gamma = mdp.gamma();
    let mut q = QTable::zeros(mdp.n_states(), mdp.n_actions());
    loop {
        let next = bellman_optimality_backup(mdp, &q)?;
        let change = sup_diff(&next, &q);
        q = next;
        if gamma == 0.0 || change * gamma <= tol * (1.0 - gamma) {
            return Ok(q);
        }
    }
}

/// Q* by policy iteration with direct evaluation. An action is only
/// replaced when another beats it by more than a relative 1e-12, so the
/// loop cannot cycle between tied actions.
pub fn optimal_q_policy_iteration(mdp: &TabularMdp) -> Result<QTable> {
    let (s, l) = (mdp.n_states(), mdp.n_actions());
    let mut actions = vec![0usize; s];
    loop {
        let q = evaluate_policy_direct(mdp, &StochasticPolicy::deterministic(l, &actions)?)?;
        let mut changed = false;
        for (x, act) in actions.iter_mut().enumerate() {
            let row = q.row(x);
            let best = super::greedy_index(row);
            if row[best] - row[*act] > 1e-12 * row[*act].abs().max(1.0) {
                *act = best;
                changed = true;
            }
        }
        if !changed {
            return Ok(q);
        }
    }
}

/// max over (x, a) of |q_star − q_pi|.
pub fn linf_loss(q_star: &ActionTable, q_pi: &ActionTable) -> Result<f64> {
    if q_star.shape() != q_pi.shape() {
        return Err(Error::input(format!(
            "loss operands have shapes {:?} and {:?}",
            q_star.shape(),
            q_pi.shape()
        )));
    }
    Ok(sup_diff(q_star, q_pi))
}

fn sup_diff(a: &ActionTable, b: &ActionTable) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// How Q^π is computed when measuring performance loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyEvaluation {
    Iterative { tol: f64 },
    Direct,
}

impl PolicyEvaluation {
    pub fn evaluate(self, mdp: &TabularMdp, pi: &StochasticPolicy) -> Result<QTable> {
        match self {
            Self::Iterative { tol } => evaluate_policy(mdp, pi, tol),
            Self::Direct => evaluate_policy_direct(mdp, pi),
        }
    }
}

/// Measures ‖Q* − Q^π‖∞ against a fixed Q*, memoizing deterministic policies.
#[derive(Debug, Clone)]
pub struct LossTracker {
    q_star: QTable,
    evaluation: PolicyEvaluation,
    cache: HashMap<Vec<u32>, f64>,
}

impl LossTracker {
    pub fn new(q_star: QTable, evaluation: PolicyEvaluation) -> Self {
        Self {
            q_star,
            evaluation,
            cache: HashMap::new(),
        }
    }

    pub fn q_star(&self) -> &QTable {
        &self.q_star
    }

    pub fn loss(&mut self, mdp: &TabularMdp, pi: &StochasticPolicy) -> Result<f64> {
        let key: Option<Vec<u32>> = pi
            .deterministic_actions()
            .map(|acts| acts.into_iter().map(|a| a as u32).collect());
        if let Some(hit) = key.as_ref().and_then(|k| self.cache.get(k)) {
            return Ok(*hit);
        }
        let q_pi = self.evaluation.evaluate(mdp, pi)?;
        let loss = linf_loss(&self.q_star, &q_pi)?;
        if let Some(k) = key {
            self.cache.insert(k, loss);
        }
        Ok(loss)
    }
}
