//! Seeded random streams.
//!
//! Every stochastic operation takes an explicit [`Rng`] handle. Streams are
//! ChaCha8 instances keyed by `(seed, stream)`, so independent consumers
//! (dropout, splits, negative sampling, generator stages) never share state
//! and a run is bit-reproducible per seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Named stream identifiers. Keeping them in one place avoids two consumers
/// silently drawing from the same stream.
pub mod stream {
    pub const INIT_ENCODER: u64 = 1;
    pub const INIT_HEAD: u64 = 2;
    pub const DROPOUT: u64 = 3;
    pub const SPLIT: u64 = 4;
    pub const NEGATIVES: u64 = 5;
    pub const GEN_LAYOUT: u64 = 10;
    pub const GEN_SUPPLY: u64 = 11;
    pub const GEN_HIDING: u64 = 12;
    pub const GEN_SOCIAL: u64 = 13;
    pub const GEN_FEATURES: u64 = 14;
    pub const GEN_DEFAULTS: u64 = 15;
    pub const GEN_EDGE_FEATURES: u64 = 16;
}

pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
