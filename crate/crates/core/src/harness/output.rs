use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate, summarize, Aggregate};
use super::run::RunRecord;
use crate::error::{Error, Result};

/// Bumped whenever a CSV column is added, removed or renamed.
pub const SCHEMA_VERSION: u32 = 1;

/// One row of results.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub benchmark: String,
    pub algorithm: String,
    pub params: String,
    pub run: usize,
    pub seed: u64,
    pub iteration: usize,
    pub cpu_seconds: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub config: serde_json::Value,
    /// Hyperparameters picked by a grid search, if one ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuned: Option<serde_json::Value>,
    pub files: Vec<String>,
}

fn rows(records: &[RunRecord]) -> impl Iterator<Item = ResultRow> + '_ {
    records.iter().flat_map(|r| {
        (0..r.iterations.len()).map(move |i| ResultRow {
            benchmark: r.benchmark.clone(),
            algorithm: r.algorithm.clone(),
            params: r.params.clone(),
            run: r.run,
            seed: r.seed,
            iteration: r.iterations[i],
            cpu_seconds: r.cpu_seconds[i],
            loss: r.losses[i],
        })
    })
}

/// Writes results.csv, summary.csv and manifest.json into `dir`.
pub fn write_outputs(
    dir: &Path,
    records: &[RunRecord],
    command: &str,
    config: serde_json::Value,
    tuned: Option<serde_json::Value>,
) -> Result<Vec<Aggregate>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let results = dir.join("results.csv");
    let mut w = csv::Writer::from_path(&results)?;
    for row in rows(records) {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(&results, e))?;

    let summary = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary)?;
    let aggregates = aggregate(records)?;
    for row in summarize(&aggregates) {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(&summary, e))?;

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        config,
        tuned,
        files: vec!["results.csv".into(), "summary.csv".into()],
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n").map_err(|e| Error::io(path, e))?;
    Ok(aggregates)
}

/// Reads results.csv back, checking the header.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let expected = ["benchmark", "algorithm", "params", "run", "seed", "iteration", "cpu_seconds", "loss"];
    let header = r.headers()?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::input(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(run: usize, seed: u64, cpu: f64, losses: [f64; 2]) -> RunRecord {
        RunRecord {
            benchmark: "linear-5".into(),
            algorithm: "ql".into(),
            params: "omega=0.51".into(),
            run,
            seed,
            iterations: vec![0, 5],
            cpu_seconds: vec![0.0, cpu],
            losses: losses.to_vec(),
        }
    }

    #[test]
    fn round_trip_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![record(0, 7, 0.25, [3.0, 1.0]), record(1, 6, 0.5, [3.0, 3.0])];
        write_outputs(dir.path(), &recs, "bench", serde_json::json!({"runs": 2}), None).unwrap();
        let rows = read_results(&dir.path().join("results.csv")).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].loss, 1.0);
        assert_eq!(rows[1].cpu_seconds, 0.25);
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        let mut lines = summary.lines();
        assert_eq!(lines.next().unwrap(), "benchmark,algorithm,params,mean_final,std_final,n_runs");
        assert_eq!(lines.next().unwrap(), "linear-5,ql,omega=0.51,2.0,1.4142135623730951,2");
        let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let m: Manifest = serde_json::from_str(&text).unwrap();
        assert_eq!(m.schema_version, SCHEMA_VERSION);
    }

    #[test]
    fn header_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("results.csv");
        fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(read_results(&p).is_err());
    }
}
