//! Seeded random substreams for Monte Carlo work.
//!
//! Every iteration `i` of a simulation draws from its own ChaCha8 stream,
//! keyed by the master seed and selected by `set_stream(i)`. What iteration
//! `i` sees depends only on `(seed, i)`, never on which worker thread ran it
//! or in what order, which is what makes parallel runs bitwise reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for iteration `iteration` under `seed`.
pub fn substream(seed: u64, iteration: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration);
    rng
}

/// A fresh seed from OS entropy, for callers that did not pin one.
pub fn fresh_seed() -> u64 {
    rand::random()
}
