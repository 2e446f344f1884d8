//! Deterministic, splittable random-number streams.
//!
//! ChaCha is a counter-based generator: one master seed selects a keyed
//! keystream, and `set_stream` picks one of 2^64 independent streams. Each
//! trajectory owns stream `index`, so an ensemble is reproducible regardless
//! of execution order or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream offset reserved for estimator bootstraps so they can never collide
/// with trajectory streams (trajectory indices count up from zero).
pub const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// RNG for trajectory `index` of ensemble `master_seed`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// RNG for a seeded bootstrap resampling pass.
pub fn bootstrap_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(BOOTSTRAP_STREAM);
    rng
}
