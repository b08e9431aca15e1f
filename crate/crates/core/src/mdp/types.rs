use std::ops::{Deref, DerefMut};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows of probabilities must sum to one within this tolerance.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Preference entries are kept inside `[-PREFERENCE_CLAMP, PREFERENCE_CLAMP]`.
///
/// Suboptimal preferences drift towards minus infinity under DPP. At this
/// magnitude an entry is already `exp(-huge)` = 0 in every soft-max.
pub const PREFERENCE_CLAMP: f64 = 1e9;

/// Dense state-by-action table of reals, row-major by state.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionTable {
    n_states: usize,
    n_actions: usize,
    data: Vec<f64>,
}

impl ActionTable {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self::filled(n_states, n_actions, 0.0)
    }

    pub fn filled(n_states: usize, n_actions: usize, value: f64) -> Self {
        Self {
            n_states,
            n_actions,
            data: vec![value; n_states * n_actions],
        }
    }

    pub fn from_vec(n_states: usize, n_actions: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_states * n_actions {
            return Err(Error::input(format!(
                "table data has {} entries, expected {}x{}",
                data.len(),
                n_states,
                n_actions
            )));
        }
        Ok(Self {
            n_states,
            n_actions,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_actions = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_actions) {
            return Err(Error::input("ragged table rows"));
        }
        Ok(Self {
            n_states: rows.len(),
            n_actions,
            data: rows.concat(),
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_states, self.n_actions)
    }

    pub fn get(&self, x: usize, a: usize) -> f64 {
        self.data[x * self.n_actions + a]
    }

    pub fn set(&mut self, x: usize, a: usize, v: f64) {
        self.data[x * self.n_actions + a] = v;
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.n_actions..(x + 1) * self.n_actions]
    }

    pub fn row_mut(&mut self, x: usize) -> &mut [f64] {
        &mut self.data[x * self.n_actions..(x + 1) * self.n_actions]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n_actions.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Sup norm over all entries.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_shape(&self, n_states: usize, n_actions: usize, what: &str) -> Result<()> {
        if self.shape() != (n_states, n_actions) {
            return Err(Error::input(format!(
                "{what} has shape {:?}, expected ({n_states}, {n_actions})",
                self.shape()
            )));
        }
        Ok(())
    }
}

macro_rules! table_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(ActionTable);

        impl $name {
            pub fn zeros(n_states: usize, n_actions: usize) -> Self {
                Self(ActionTable::zeros(n_states, n_actions))
            }

            pub fn into_inner(self) -> ActionTable {
                self.0
            }
        }

        impl From<ActionTable> for $name {
            fn from(t: ActionTable) -> Self {
                Self(t)
            }
        }

        impl Deref for $name {
            type Target = ActionTable;
            fn deref(&self) -> &ActionTable {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut ActionTable {
                &mut self.0
            }
        }
    };
}

table_newtype!(
    /// Action-value function Q(x, a).
    QTable
);

table_newtype!(
    /// Action preferences Ψ(x, a); the policy is their soft-max.
    Preferences
);

impl Preferences {
    /// Clamps every entry into `[-PREFERENCE_CLAMP, PREFERENCE_CLAMP]`.
    pub fn clamp_entries(&mut self) {
        for v in self.as_mut_slice() {
            *v = v.clamp(-PREFERENCE_CLAMP, PREFERENCE_CLAMP);
        }
    }
}

/// Row-stochastic action distribution π(a|x).
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticPolicy(ActionTable);

impl StochasticPolicy {
    pub fn new(table: ActionTable) -> Result<Self> {
        for (x, row) in table.rows().enumerate() {
            check_distribution(row).map_err(|e| Error::input(format!("policy row {x}: {e}")))?;
        }
        Ok(Self(table))
    }

    /// Uniform distribution over actions in every state.
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self(ActionTable::filled(
            n_states,
            n_actions,
            1.0 / n_actions as f64,
        ))
    }

    /// Deterministic policy playing `actions[x]` in state `x`.
    pub fn deterministic(n_actions: usize, actions: &[usize]) -> Result<Self> {
        let mut t = ActionTable::zeros(actions.len(), n_actions);
        for (x, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(Error::input(format!("action {a} out of range in state {x}")));
            }
            t.set(x, a, 1.0);
        }
        Ok(Self(t))
    }

    pub(crate) fn from_table_unchecked(table: ActionTable) -> Self {
        Self(table)
    }

    pub fn table(&self) -> &ActionTable {
        &self.0
    }

    pub fn n_states(&self) -> usize {
        self.0.n_states()
    }

    pub fn n_actions(&self) -> usize {
        self.0.n_actions()
    }

    pub fn prob(&self, x: usize, a: usize) -> f64 {
        self.0.get(x, a)
    }

    pub fn row(&self, x: usize) -> &[f64] {
        self.0.row(x)
    }

    /// Action chosen in every state if the policy is deterministic.
    pub fn deterministic_actions(&self) -> Option<Vec<usize>> {
        self.0
            .rows()
            .map(|row| {
                let a = row.iter().position(|&p| p == 1.0)?;
                row.iter()
                    .enumerate()
                    .all(|(b, &p)| b == a || p == 0.0)
                    .then_some(a)
            })
            .collect()
    }

    /// Most probable action per state, lowest index on ties.
    pub fn mode_actions(&self) -> Vec<usize> {
        self.0.rows().map(super::greedy_index).collect()
    }
}

fn check_distribution(row: &[f64]) -> std::result::Result<(), String> {
    if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(format!("entry {p} outside [0, 1]"));
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > PROBABILITY_TOLERANCE * row.len().max(1) as f64 {
        return Err(format!("sums to {s}"));
    }
    Ok(())
}

/// Inverse temperature η of the soft-max; `Infinite` is the hard max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseTemperature {
    Finite(f64),
    Infinite,
}

impl InverseTemperature {
    pub fn finite(eta: f64) -> Result<Self> {
        if eta.is_finite() && eta > 0.0 {
            Ok(Self::Finite(eta))
        } else if eta == f64::INFINITY {
            Ok(Self::Infinite)
        } else {
            Err(Error::input(format!("inverse temperature must be positive, got {eta}")))
        }
    }

    /// Parses `inf`/`infinity` or a positive real.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Self::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::input(format!("cannot parse inverse temperature {s:?}")))?;
                Self::finite(v)
            }
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Finite(v) => v,
            Self::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }

    /// log(L)/η, taken as 0 at η = ∞.
    pub fn entropy_slack(self, n_actions: usize) -> f64 {
        match self {
            Self::Finite(v) => (n_actions as f64).ln() / v,
            Self::Infinite => 0.0,
        }
    }
}

impl std::fmt::Display for InverseTemperature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

/// Serialized as a number, or the string "inf".
impl Serialize for InverseTemperature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(*v),
            Self::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for InverseTemperature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(v) => Self::finite(v),
            Raw::Text(t) => Self::parse(&t),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Finite discounted MDP with dense transition tensor `[state][action][next]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    r_max: f64,
    rewards: ActionTable,
    transitions: Vec<f64>,
}

impl TabularMdp {
    /// Validates and builds an MDP. `r_max` defaults to the largest |reward|.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transitions: Vec<f64>,
        rewards: ActionTable,
        gamma: f64,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::input("an MDP needs at least one state and one action"));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::input(format!("discount {gamma} outside [0, 1)")));
        }
        rewards.check_shape(n_states, n_actions, "reward table")?;
        if !rewards.is_finite() {
            return Err(Error::input("rewards must be finite"));
        }
        if transitions.len() != n_states * n_actions * n_states {
            return Err(Error::input(format!(
                "transition tensor has {} entries, expected {}",
                transitions.len(),
                n_states * n_actions * n_states
            )));
        }
        for (i, row) in transitions.chunks_exact(n_states).enumerate() {
            check_distribution(row).map_err(|e| {
                Error::input(format!(
                    "transition row (state {}, action {}): {e}",
                    i / n_actions,
                    i % n_actions
                ))
            })?;
        }
        let r_max = rewards.max_abs();
        Ok(Self {
            n_states,
            n_actions,
            gamma,
            r_max,
            rewards,
            transitions,
        })
    }

    /// Raises the declared reward bound; it may not go below the data.
    pub fn with_r_max(mut self, r_max: f64) -> Result<Self> {
        if r_max < self.rewards.max_abs() {
            return Err(Error::input(format!(
                "r_max {r_max} is below the largest reward magnitude {}",
                self.rewards.max_abs()
            )));
        }
        self.r_max = r_max;
        Ok(self)
    }

    /// Same dynamics and rewards with another discount.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::input(format!("discount {gamma} outside [0, 1)")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// R_max / (1 - γ).
    pub fn v_max(&self) -> f64 {
        self.r_max / (1.0 - self.gamma)
    }

    pub fn rewards(&self) -> &ActionTable {
        &self.rewards
    }

    pub fn reward(&self, x: usize, a: usize) -> f64 {
        self.rewards.get(x, a)
    }

    /// P(· | x, a).
    pub fn transition_row(&self, x: usize, a: usize) -> &[f64] {
        let start = (x * self.n_actions + a) * self.n_states;
        &self.transitions[start..start + self.n_states]
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn to_document(&self) -> MdpDocument {
        MdpDocument {
            n_states: self.n_states,
            n_actions: self.n_actions,
            gamma: self.gamma,
            rewards: self.rewards.to_rows(),
            transitions: self
                .transitions
                .chunks_exact(self.n_states * self.n_actions)
                .map(|block| block.chunks_exact(self.n_states).map(<[f64]>::to_vec).collect())
                .collect(),
        }
    }

    pub fn from_document(doc: MdpDocument) -> Result<Self> {
        let rewards = ActionTable::from_rows(&doc.rewards)?;
        if doc.transitions.len() != doc.n_states
            || doc
                .transitions
                .iter()
                .any(|b| b.len() != doc.n_actions || b.iter().any(|r| r.len() != doc.n_states))
        {
            return Err(Error::input("transition tensor shape does not match n_states/n_actions"));
        }
        let transitions: Vec<f64> = doc.transitions.into_iter().flatten().flatten().collect();
        Self::new(doc.n_states, doc.n_actions, transitions, rewards, doc.gamma)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

/// JSON layout of a [`TabularMdp`]: `rewards[x][a]`, `transitions[x][a][y]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpDocument {
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    pub rewards: Vec<Vec<f64>>,
    pub transitions: Vec<Vec<Vec<f64>>>,
}
