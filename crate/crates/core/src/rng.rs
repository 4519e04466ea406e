//! Counter-keyed random numbers.
//!
//! Every draw is addressed by `(seed, stream, index)`, so a value can be
//! reproduced without replaying the draws before it and parallel evaluation
//! order cannot change results.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Standard normal variate for `(seed, stream, index)` (Box–Muller).
pub fn keyed_normal(seed: u64, stream: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    // two u64 words per index
    rng.set_word_pos(u128::from(index) * 4);
    let u1 = open_unit(rng.next_u64());
    let u2 = open_unit(rng.next_u64());
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Uniform in (0, 1] from the top 53 bits.
fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 1.0) / (1u64 << 53) as f64
}
