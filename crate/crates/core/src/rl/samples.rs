use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::distr::Distribution;
use rand_distr::weighted::WeightedAliasIndex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::rng;

/// Alias tables over the support of every P(·|x, a).
#[derive(Debug, Clone)]
pub struct SuccessorSampler {
    n_states: usize,
    n_actions: usize,
    rows: Vec<(Vec<u32>, WeightedAliasIndex<f64>)>,
}

impl SuccessorSampler {
    pub fn new(mdp: &TabularMdp) -> Result<Self> {
        let (s, l) = (mdp.n_states(), mdp.n_actions());
        let mut rows = Vec::with_capacity(s * l);
        for x in 0..s {
            for a in 0..l {
                let p = mdp.transition_row(x, a);
                let support: Vec<u32> = (0..s as u32).filter(|&y| p[y as usize] > 0.0).collect();
                let weights = support.iter().map(|&y| p[y as usize]).collect();
                let alias = WeightedAliasIndex::new(weights)
                    .map_err(|e| Error::input(format!("transition row ({x}, {a}): {e}")))?;
                rows.push((support, alias));
            }
        }
        Ok(Self {
            n_states: s,
            n_actions: l,
            rows,
        })
    }

    /// Draw `k` for every pair, written in [x][a] order.
    pub fn column(&self, seed: u64, k: u64, out: &mut [u32]) {
        debug_assert_eq!(out.len(), self.n_states * self.n_actions);
        let mut r = rng::sample_column(seed, k);
        for (o, (support, alias)) in out.iter_mut().zip(&self.rows) {
            *o = support[alias.sample(&mut r)];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSetHeader {
    pub n_states: usize,
    pub n_actions: usize,
    pub n_draws: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
enum Storage {
    /// [x][a][draw]
    Stored(Vec<u32>),
    Streaming(Arc<SuccessorSampler>),
}

/// K i.i.d. successors y ~ P(·|x, a) for every pair.
///
/// Draw k of every pair comes from its own counter-based stream, so the
/// stored and streaming forms hold identical samples.
#[derive(Debug, Clone)]
pub struct GenerativeSampleSet {
    header: SampleSetHeader,
    storage: Storage,
}

impl GenerativeSampleSet {
    /// Draws and stores all S·A·K indices (4 bytes each).
    pub fn generate(mdp: &TabularMdp, n_draws: usize, seed: u64) -> Result<Self> {
        let sampler = SuccessorSampler::new(mdp)?;
        Self::generate_with(&sampler, n_draws, seed)
    }

    pub fn generate_with(sampler: &SuccessorSampler, n_draws: usize, seed: u64) -> Result<Self> {
        let header = Self::header(sampler, n_draws, seed)?;
        let pairs = sampler.n_states * sampler.n_actions;
        let mut data = vec![0u32; pairs * n_draws];
        let mut col = vec![0u32; pairs];
        for k in 0..n_draws {
            sampler.column(seed, k as u64, &mut col);
            for (z, &y) in col.iter().enumerate() {
                data[z * n_draws + k] = y;
            }
        }
        Ok(Self {
            header,
            storage: Storage::Stored(data),
        })
    }

    /// Re-derives draw k from the seed on demand instead of storing it.
    pub fn streaming(sampler: Arc<SuccessorSampler>, n_draws: usize, seed: u64) -> Result<Self> {
        let header = Self::header(&sampler, n_draws, seed)?;
        Ok(Self {
            header,
            storage: Storage::Streaming(sampler),
        })
    }

    fn header(sampler: &SuccessorSampler, n_draws: usize, seed: u64) -> Result<SampleSetHeader> {
        if n_draws == 0 {
            return Err(Error::input("sample set needs at least one draw"));
        }
        Ok(SampleSetHeader {
            n_states: sampler.n_states,
            n_actions: sampler.n_actions,
            n_draws,
            seed,
        })
    }

    pub fn info(&self) -> SampleSetHeader {
        self.header
    }

    pub fn n_draws(&self) -> usize {
        self.header.n_draws
    }

    pub fn seed(&self) -> u64 {
        self.header.seed
    }

    pub fn is_stored(&self) -> bool {
        matches!(self.storage, Storage::Stored(_))
    }

    pub(crate) fn check_mdp(&self, mdp: &TabularMdp) -> Result<()> {
        if (self.header.n_states, self.header.n_actions) != (mdp.n_states(), mdp.n_actions()) {
            return Err(Error::input(format!(
                "sample set is {}x{}, mdp is {}x{}",
                self.header.n_states,
                self.header.n_actions,
                mdp.n_states(),
                mdp.n_actions()
            )));
        }
        Ok(())
    }

    /// Column k in [x][a] order.
    pub fn column(&self, k: usize, out: &mut [u32]) {
        assert!(k < self.header.n_draws, "draw {k} out of range");
        match &self.storage {
            Storage::Stored(data) => {
                let n = self.header.n_draws;
                for (z, o) in out.iter_mut().enumerate() {
                    *o = data[z * n + k];
                }
            }
            Storage::Streaming(s) => s.column(self.header.seed, k as u64, out),
        }
    }

    /// All draws of pair (x, a).
    pub fn draws(&self, x: usize, a: usize) -> Vec<u32> {
        let z = x * self.header.n_actions + a;
        let n = self.header.n_draws;
        match &self.storage {
            Storage::Stored(data) => data[z * n..(z + 1) * n].to_vec(),
            Storage::Streaming(_) => {
                let mut col = vec![0; self.header.n_states * self.header.n_actions];
                (0..n)
                    .map(|k| {
                        self.column(k, &mut col);
                        col[z]
                    })
                    .collect()
            }
        }
    }

    /// Successor counts per pair, [x][a][y].
    pub fn counts(&self) -> Vec<u32> {
        let (s, l, n) = (self.header.n_states, self.header.n_actions, self.header.n_draws);
        let mut counts = vec![0u32; s * l * s];
        match &self.storage {
            Storage::Stored(data) => {
                for (z, chunk) in data.chunks_exact(n).enumerate() {
                    for &y in chunk {
                        counts[z * s + y as usize] += 1;
                    }
                }
            }
            Storage::Streaming(_) => {
                let mut col = vec![0; s * l];
                for k in 0..n {
                    self.column(k, &mut col);
                    for (z, &y) in col.iter().enumerate() {
                        counts[z * s + y as usize] += 1;
                    }
                }
            }
        }
        counts
    }

    fn sidecar(path: &Path) -> PathBuf {
        path.with_extension("json")
    }

    /// Writes raw little-endian u32 indices in [x][a][draw] order plus a JSON
    /// sidecar holding the dimensions and seed.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let write_err = |e| Error::io(path, e);
        match &self.storage {
            Storage::Stored(data) => {
                for &y in data {
                    w.write_all(&y.to_le_bytes()).map_err(write_err)?;
                }
            }
            Storage::Streaming(_) => {
                let (s, l) = (self.header.n_states, self.header.n_actions);
                for x in 0..s {
                    for a in 0..l {
                        for y in self.draws(x, a) {
                            w.write_all(&y.to_le_bytes()).map_err(write_err)?;
                        }
                    }
                }
            }
        }
        w.flush().map_err(write_err)?;
        let side = Self::sidecar(path);
        fs::write(&side, serde_json::to_string_pretty(&self.header)?)
            .map_err(|e| Error::io(side, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let side = Self::sidecar(path);
        let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let header: SampleSetHeader = serde_json::from_str(&text)?;
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut bytes = Vec::new();
        BufReader::new(file)
            .read_to_end(&mut bytes)
            .map_err(|e| Error::io(path, e))?;
        let expected = header.n_states * header.n_actions * header.n_draws;
        if bytes.len() != 4 * expected || header.n_draws == 0 {
            return Err(Error::input(format!(
                "{}: {} bytes, expected {}",
                path.display(),
                bytes.len(),
                4 * expected
            )));
        }
        let data: Vec<u32> = bytes
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if let Some(bad) = data.iter().find(|&&y| y as usize >= header.n_states) {
            return Err(Error::input(format!("state index {bad} out of range")));
        }
        Ok(Self {
            header,
            storage: Storage::Stored(data),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_linear_mdp, make_random_mdp};

    #[test]
    fn entries_are_valid_and_respect_support() {
        let mdp = make_linear_mdp(9, 0.9).unwrap();
        let set = GenerativeSampleSet::generate(&mdp, 200, 3).unwrap();
        for x in 0..9 {
            for a in 0..2 {
                for y in set.draws(x, a) {
                    assert!(mdp.transition_row(x, a)[y as usize] > 0.0);
                }
            }
        }
    }

    #[test]
    fn regeneration_and_streaming_agree() {
        let mdp = make_random_mdp(7, 3, 0.9, 1).unwrap();
        let a = GenerativeSampleSet::generate(&mdp, 50, 42).unwrap();
        let b = GenerativeSampleSet::generate(&mdp, 50, 42).unwrap();
        let sampler = Arc::new(SuccessorSampler::new(&mdp).unwrap());
        let c = GenerativeSampleSet::streaming(sampler, 50, 42).unwrap();
        assert!(!c.is_stored());
        let (mut ca, mut cb, mut cc) = (vec![0; 21], vec![0; 21], vec![0; 21]);
        for k in 0..50 {
            a.column(k, &mut ca);
            b.column(k, &mut cb);
            c.column(k, &mut cc);
            assert_eq!(ca, cb);
            assert_eq!(ca, cc);
        }
        assert_eq!(a.counts(), c.counts());
        let d = GenerativeSampleSet::generate(&mdp, 50, 43).unwrap();
        assert_ne!(a.draws(0, 0), d.draws(0, 0));
    }

    #[test]
    fn frequencies_match_probabilities() {
        let mdp = make_random_mdp(4, 2, 0.9, 5).unwrap();
        let n = 20_000;
        let set = GenerativeSampleSet::generate(&mdp, n, 9).unwrap();
        let counts = set.counts();
        for z in 0..8 {
            for y in 0..4 {
                let f = counts[z * 4 + y] as f64 / n as f64;
                assert!((f - mdp.transitions()[z * 4 + y]).abs() < 0.02);
            }
        }
    }

    #[test]
    fn save_load_round_trip() {
        let mdp = make_random_mdp(5, 2, 0.9, 2).unwrap();
        let set = GenerativeSampleSet::generate(&mdp, 30, 8).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("samples.bin");
        set.save(&path).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 5 * 2 * 30 * 4);
        let back = GenerativeSampleSet::load(&path).unwrap();
        assert_eq!(back.info(), set.info());
        assert_eq!(back.counts(), set.counts());
        assert_eq!(back.draws(3, 1), set.draws(3, 1));
        fs::write(&path, [0u8; 7]).unwrap();
        assert!(GenerativeSampleSet::load(&path).is_err());
    }

    #[test]
    fn zero_draws_rejected() {
        let mdp = make_random_mdp(3, 2, 0.9, 2).unwrap();
        assert!(GenerativeSampleSet::generate(&mdp, 0, 1).is_err());
    }
}
