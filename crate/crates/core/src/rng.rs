//! Seeded random streams.
//!
//! All randomness flows through ChaCha8, a counter-based generator whose
//! output is specified independently of platform and word size. A run seed
//! is split into independent purposes by the ChaCha stream id, so e.g. the
//! initial tables and the sample tensor of one run never share draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream ids reserved for each purpose within one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Noise = 2,
    Environment = 3,
    Mdp = 4,
    /// Generative sample columns use `SAMPLES_BASE + draw index`.
    Samples = 1 << 32,
}

pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, purpose: Purpose) -> StreamRng {
    let mut rng = seeded(seed);
    rng.set_stream(purpose as u64);
    rng
}

/// Stream for generative-sample column `draw` of a seed.
pub fn sample_column(seed: u64, draw: u64) -> StreamRng {
    let mut rng = seeded(seed);
    rng.set_stream(Purpose::Samples as u64 + draw);
    rng
}

/// Fills `out` with i.i.d. draws from U[-bound, bound].
pub fn fill_uniform(rng: &mut impl Rng, out: &mut [f64], bound: f64) {
    for v in out.iter_mut() {
        *v = if bound > 0.0 {
            rng.random_range(-bound..=bound)
        } else {
            0.0
        };
    }
}
