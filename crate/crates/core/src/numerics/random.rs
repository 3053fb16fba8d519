//! Keyed standard-normal streams.
//!
//! Every draw in the crate comes from a stream identified by a master seed
//! and a `(purpose, member, iteration)` triple. The triple is hashed into a
//! ChaCha key, so any stream can be regenerated in isolation and the order in
//! which members are processed never changes their draws.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// What a stream is used for; part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Purpose {
    Truth,
    TruthNoise,
    Ensemble,
    Perturbation,
    Test,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Truth => 0x7472_7574,
            Purpose::TruthNoise => 0x6e6f_6973,
            Purpose::Ensemble => 0x656e_736d,
            Purpose::Perturbation => 0x7065_7274,
            Purpose::Test => 0x7465_7374,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub purpose: Purpose,
    pub member: u64,
    pub iteration: u64,
}

impl RandomStream {
    pub fn new(seed: u64, purpose: Purpose, member: u64, iteration: u64) -> Self {
        Self {
            seed,
            purpose,
            member,
            iteration,
        }
    }

    pub fn with_member(self, member: u64) -> Self {
        Self { member, ..self }
    }

    pub fn with_iteration(self, iteration: u64) -> Self {
        Self { iteration, ..self }
    }

    fn key(&self) -> [u8; 32] {
        let mut state = self.seed;
        let mut key = [0u8; 32];
        let words = [
            splitmix64(&mut state) ^ self.purpose.tag(),
            splitmix64(&mut state) ^ self.member,
            splitmix64(&mut state) ^ self.iteration,
            splitmix64(&mut state),
        ];
        // second pass so that every key word depends on every input
        let mut mix = words.iter().fold(0u64, |acc, w| acc.rotate_left(17) ^ w);
        for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
            mix ^= w;
            chunk.copy_from_slice(&splitmix64(&mut mix).to_le_bytes());
        }
        key
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key())
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent child seed number `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut state = master ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03);
    splitmix64(&mut state);
    splitmix64(&mut state)
}

/// Uniform on (0, 1], 53 bits.
fn unit_open_closed(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `n` i.i.d. standard normal values via Box-Muller.
pub fn gaussian_draws(stream: &RandomStream, n: usize) -> Vec<f64> {
    let mut rng = stream.rng();
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let r = (-2.0 * unit_open_closed(&mut rng).ln()).sqrt();
        let angle = TAU * unit_open_closed(&mut rng);
        out.push(r * angle.cos());
        out.push(r * angle.sin());
    }
    out.truncate(n);
    out
}
