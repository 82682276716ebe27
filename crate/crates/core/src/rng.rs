//! Deterministic random substreams.
//!
//! Every parallel sampling loop in the crate draws candidate `i` from its own
//! ChaCha stream keyed by `(seed, domain)` and indexed by `i`, so results do not
//! depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Streams used for direction sampling.
pub const DOMAIN_DIRECTION: u64 = 0x6469_7265_6374;
/// Streams used for offset sampling.
pub const DOMAIN_OFFSET: u64 = 0x6f66_6673_6574;
/// Streams used for annulus radius estimation.
pub const DOMAIN_RADIUS: u64 = 0x7261_6469_7573;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The `index`-th stream of `domain` under `seed`.
pub fn substream(seed: u64, domain: u64, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    let mut state = seed ^ splitmix64(domain);
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
