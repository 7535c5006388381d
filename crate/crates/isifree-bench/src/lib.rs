//! Shared fixtures for the benchmarks.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isifree::{synthesize, ChannelSpec, ModulationCode};

/// The depth-2 code for the two-molecule channel.
pub fn reference_code() -> ModulationCode {
    synthesize(ChannelSpec::new(1, 2).unwrap(), 2, 1e-6)
        .expect("reference synthesis succeeds")
        .code
}

/// Deterministic pseudorandom bits.
pub fn random_bits(n: usize, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = Vec::with_capacity(n);
    let mut word = 0u64;
    for i in 0..n {
        if i % 64 == 0 {
            word = rng.next_u64();
        }
        bits.push(word >> (i % 64) & 1 == 1);
    }
    bits
}
