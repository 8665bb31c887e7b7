//! Seeded random streams.
//!
//! Every sampler takes an explicit `&mut impl Rng`. Concurrent consumers never
//! share a stream; they derive an independent child seed from a master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn stream(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser applied to `master` combined with a stream id.
pub fn derive_seed(master: u64, stream_id: u64) -> u64 {
    let mut z = master ^ stream_id.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn child(master: u64, stream_id: u64) -> SimRng {
    stream(derive_seed(master, stream_id))
}
