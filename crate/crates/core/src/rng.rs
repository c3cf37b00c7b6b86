//! Deterministic random-number plumbing.
//!
//! Every stochastic routine in the crate takes an explicit 64-bit seed and
//! derives a ChaCha12 stream from it. Independent substreams (one per trial,
//! per cluster, per experiment arm) come from [`substream`], which mixes the
//! master seed with a stream index through SplitMix64. Substreams are
//! statistically independent for practical purposes and, crucially, stable:
//! trial `i` sees the same draws no matter how many trials run or in what
//! order, so experiments can be partitioned across processes by index range
//! without changing their output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha12Rng;

/// SplitMix64 finalizer; bijective on `u64`.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for the master stream of `seed`.
pub fn master(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Derived seed for substream `index` of `seed`, for callers that need a
/// seed value (to label outputs or fan out further) rather than a
/// generator.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Generator for substream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, index))
}
