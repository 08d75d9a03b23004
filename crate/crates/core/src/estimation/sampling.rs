use crate::quantum::detection_probability;
use crate::{Error, Result};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const CHUNK: u64 = 1 << 16;

/// Port counts of `N_e` electrons at one setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotRecord {
    pub n_plus: u64,
    pub n_minus: u64,
    pub phi: f64,
    pub seed: u64,
    pub stream: u64,
    pub theta: f64,
    pub sx_expect: f64,
}

impl ShotRecord {
    pub fn n_electrons(&self) -> u64 {
        self.n_plus + self.n_minus
    }

    pub fn p_hat(&self) -> f64 {
        self.n_plus as f64 / self.n_electrons() as f64
    }
}

fn generator(seed: u64, stream: u64, shot: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    // one u64 per shot = two 32-bit words
    rng.set_word_pos(2 * shot as u128);
    rng
}

/// Number of successes among `n` Bernoulli(`p`) trials.
///
/// Shot `k` consumes the `k`-th 64-bit word of the ChaCha8 stream keyed by
/// `(seed, stream)`, so the count does not depend on how the work is split
/// across threads.
pub fn bernoulli_count(p: f64, n: u64, seed: u64, stream: u64) -> u64 {
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let len = CHUNK.min(n - start);
            let mut rng = generator(seed, stream, start);
            (0..len)
                .filter(|_| ((rng.next_u64() >> 11) as f64) * f64::EPSILON / 2.0 < p)
                .count() as u64
        })
        .sum()
}

/// Samples `N_e` electrons on stream 0.
pub fn sample_shots(theta: f64, phi: f64, sx: f64, n_electrons: u64, seed: u64) -> Result<ShotRecord> {
    sample_shots_stream(theta, phi, sx, n_electrons, seed, 0)
}

pub fn sample_shots_stream(
    theta: f64,
    phi: f64,
    sx: f64,
    n_electrons: u64,
    seed: u64,
    stream: u64,
) -> Result<ShotRecord> {
    if n_electrons == 0 {
        return Err(Error::domain("electron count must be ≥ 1"));
    }
    let p = detection_probability(theta, phi, sx)?.plus;
    let n_plus = bernoulli_count(p, n_electrons, seed, stream);
    Ok(ShotRecord {
        n_plus,
        n_minus: n_electrons - n_plus,
        phi,
        seed,
        stream,
        theta,
        sx_expect: sx,
    })
}
