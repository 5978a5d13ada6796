//! Seed derivation for independent random streams.
//!
//! A stream is identified by `(seed, colony, index)`. Streams never share
//! state, which is what makes parallel construction reproduce the sequential
//! schedule exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random generator used throughout the crate.
pub type AntRng = ChaCha8Rng;

/// Stream index reserved for a colony's placement decisions.
pub const PLACEMENT: u64 = u64::MAX;
/// Stream index reserved for per-ant sensitivity draws.
pub const SENSITIVITY: u64 = u64::MAX - 1;
/// Stream index reserved for local-search refinement.
pub const REFINE: u64 = u64::MAX - 2;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 256-bit seed for stream `(seed, colony, index)`.
pub fn stream_seed(seed: u64, colony: u64, index: u64) -> [u8; 32] {
    let mut state = seed;
    let mut mix = splitmix64(&mut state);
    state ^= colony.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    mix ^= splitmix64(&mut state);
    state ^= index.wrapping_mul(0xA076_1D64_78BD_642F);
    mix ^= splitmix64(&mut state);

    let mut out = [0u8; 32];
    let mut s = mix;
    for chunk in out.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    out
}

pub fn stream(seed: u64, colony: u64, index: u64) -> AntRng {
    AntRng::from_seed(stream_seed(seed, colony, index))
}
