//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 generator keyed
//! by `(seed, stream)`. Distinct streams are independent, so a generator can
//! draw edge coins, sign coins and phase noise from separate sequences and
//! stay reproducible when one family changes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream ids shared by the generators.
pub mod streams {
    pub const EDGES: u64 = 1;
    pub const SAMPLING: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const OUTLIERS: u64 = 4;
    pub const LATENT: u64 = 5;
    pub const MASK: u64 = 6;
    pub const PERTURB: u64 = 7;
}

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a path of indices
/// (grid coordinates, replicate number, restart number, ...).
///
/// The derivation is a fixed function of its inputs, so extending a grid
/// never changes the seeds of existing cells.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = mix(master);
    for &p in path {
        h = mix(h ^ mix(p.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}
