//! Deterministic random streams.
//!
//! Every random quantity in a run is drawn from a ChaCha8 stream keyed by
//! `(seed, domain, index)`, never from a shared generator, so results do not
//! depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains. Values are part of the reproducibility contract.
pub mod domain {
    pub const DIRECTIONS: u64 = 1;
    pub const RESAMPLE_DISEASED: u64 = 2;
    pub const RESAMPLE_HEALTHY: u64 = 3;
    pub const STUDY_DATA: u64 = 4;
    pub const TEST_SEED: u64 = 5;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed with a domain tag and an index into a fresh 64-bit key.
pub fn derive_seed(seed: u64, domain: u64, index: u64) -> u64 {
    let mut s = seed;
    let a = splitmix64(&mut s);
    let mut t = a ^ domain.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let b = splitmix64(&mut t);
    let mut u = b ^ index.wrapping_mul(0xA076_1D64_78BD_642F);
    splitmix64(&mut u)
}

pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut state = derive_seed(seed, domain, index);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
