use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::run::RunRecord;
use crate::error::{Error, Result};

/// Mean and sample standard deviation per checkpoint for one
/// (benchmark, algorithm, params) group.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub benchmark: String,
    pub algorithm: String,
    pub params: String,
    pub iterations: Vec<usize>,
    pub mean: Vec<f64>,
    /// n−1 denominator; all zeros for a single run.
    pub std: Vec<f64>,
    pub n_runs: usize,
}

impl Aggregate {
    pub fn final_mean(&self) -> f64 {
        *self.mean.last().unwrap_or(&f64::NAN)
    }

    pub fn final_std(&self) -> f64 {
        *self.std.last().unwrap_or(&f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub benchmark: String,
    pub algorithm: String,
    pub params: String,
    pub mean_final: f64,
    pub std_final: f64,
    pub n_runs: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Groups records by (benchmark, algorithm, params) in order of first
/// appearance and aggregates each group checkpoint by checkpoint.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<Aggregate>> {
    if records.is_empty() {
        return Err(Error::Aggregation("no records to aggregate".into()));
    }
    let mut order = Vec::new();
    let mut groups: HashMap<(String, String, String), Vec<&RunRecord>> = HashMap::new();
    for r in records {
        let key = r.key();
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    let mut out = Vec::with_capacity(order.len());
    for key in order {
        let group = &groups[&key];
        let iterations = group[0].iterations.clone();
        for r in group {
            if r.iterations != iterations || r.losses.len() != iterations.len() {
                return Err(Error::Aggregation(format!(
                    "run {} of {}/{} has checkpoints that do not line up",
                    r.run, key.1, key.2
                )));
            }
        }
        if group.len() == 1 {
            log::warn!(
                "{} {} {}: single run, standard deviation reported as 0",
                key.0, key.1, key.2
            );
        }
        let (mut mean, mut std) = (Vec::new(), Vec::new());
        let mut column = Vec::with_capacity(group.len());
        for i in 0..iterations.len() {
            column.clear();
            column.extend(group.iter().map(|r| r.losses[i]));
            let (m, s) = mean_std(&column);
            mean.push(m);
            std.push(s);
        }
        out.push(Aggregate {
            benchmark: key.0,
            algorithm: key.1,
            params: key.2,
            iterations,
            mean,
            std,
            n_runs: group.len(),
        });
    }
    Ok(out)
}

pub fn summarize(aggregates: &[Aggregate]) -> Vec<SummaryRow> {
    aggregates
        .iter()
        .map(|a| SummaryRow {
            benchmark: a.benchmark.clone(),
            algorithm: a.algorithm.clone(),
            params: a.params.clone(),
            mean_final: a.final_mean(),
            std_final: a.final_std(),
            n_runs: a.n_runs,
        })
        .collect()
}

/// Averages over the checkpoints at or after `from_iteration`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostTransient {
    /// Mean over runs and checkpoints.
    pub mean: f64,
    /// Across-run standard deviation, averaged over checkpoints.
    pub std: f64,
    pub checkpoints: usize,
}

pub fn post_transient_stats(agg: &Aggregate, from_iteration: usize) -> Result<PostTransient> {
    let idx: Vec<usize> = (0..agg.iterations.len())
        .filter(|&i| agg.iterations[i] >= from_iteration)
        .collect();
    if idx.is_empty() {
        return Err(Error::Aggregation(format!("no checkpoint at or after {from_iteration}")));
    }
    let n = idx.len() as f64;
    Ok(PostTransient {
        mean: idx.iter().map(|&i| agg.mean[i]).sum::<f64>() / n,
        std: idx.iter().map(|&i| agg.std[i]).sum::<f64>() / n,
        checkpoints: idx.len(),
    })
}
