//! Counter-based derivation of independent random streams.
//!
//! Every stream is keyed by `(master_seed, purpose, indices)`. The key is
//! hashed with FNV-1a and expanded with SplitMix64 into a ChaCha8 seed, so a
//! work unit's stream depends only on its identity and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the stream for `purpose` and `indices` under `master_seed`.
pub fn derive_rng(master_seed: u64, purpose: &str, indices: &[u64]) -> StreamRng {
    let mut h = fnv1a(FNV_OFFSET, &master_seed.to_le_bytes());
    h = fnv1a(h, purpose.as_bytes());
    // separator so ("ab", [..]) and ("a", [..]) cannot collide through the index bytes
    h = fnv1a(h, &[0xff]);
    for idx in indices {
        h = fnv1a(h, &idx.to_le_bytes());
    }
    let mut state = h;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
