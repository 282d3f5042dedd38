//! Deterministic RNG stream derivation.
//!
//! Every random draw in the crate comes from a stream keyed by the run seed
//! plus a tuple of indices (resample number, speaker index, feature, ...).
//! Streams are independent of scheduling, which keeps parallel results
//! identical to sequential ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Returns the RNG for stream `keys` under `seed`.
pub fn stream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    let mut state = seed;
    let mut mix = splitmix64(&mut state);
    for &k in keys {
        state ^= k.wrapping_mul(0xD6E8_FEB8_6659_FD93).rotate_left(17);
        mix ^= splitmix64(&mut state);
    }
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    bytes[..8]
        .iter_mut()
        .zip(mix.to_le_bytes())
        .for_each(|(b, m)| *b ^= m);
    ChaCha8Rng::from_seed(bytes)
}

/// A child seed for handing to APIs that take a plain `u64`.
pub fn derive(seed: u64, keys: &[u64]) -> u64 {
    use rand::RngCore;
    stream(seed, keys).next_u64()
}

/// Stable 64-bit key for a string (FNV-1a), for keying streams by name.
pub fn key_of(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}
