//! Deterministic stream splitting for parallel Monte Carlo.
//!
//! Every unit of work (a quadrature node, a block of paths, a noise
//! realization) draws from its own ChaCha stream, derived from the master
//! seed and a stable work-unit index. Results therefore do not depend on how
//! work units are scheduled across threads: runs with the same seed are
//! bit-identical for any worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// ChaCha generator with 2^64 independent streams per seed.
pub type StreamRng = ChaCha8Rng;

/// Derive the generator for work-unit `stream` under `seed`.
///
/// The (seed, stream) pair fully determines every draw; streams with
/// different indices never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stable stream index for a two-level work unit (e.g. node k of scan row i).
///
/// Packs both levels into the 64-bit stream id; `minor` must stay below 2^24,
/// which is far above any grid size used here.
pub fn substream(major: u64, minor: u64) -> u64 {
    debug_assert!(minor < (1 << 24));
    (major << 24) | minor
}
