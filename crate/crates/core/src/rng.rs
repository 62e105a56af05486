//! Seed derivation.
//!
//! Every stochastic step draws from ChaCha8 (`rand_chacha::ChaCha8Rng`),
//! which produces the same stream on every platform. A run has one
//! top-level seed; each component gets its own key by mixing the seed with
//! a fixed component tag through SplitMix64, and independent units inside a
//! component (a class, a binary OvR problem) use the ChaCha stream id. This
//! makes parallel and serial execution produce identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Component {
    Composer = 1,
    Folds = 2,
    Svm = 3,
    Synthetic = 4,
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn component_seed(seed: u64, component: Component) -> u64 {
    splitmix64(seed ^ splitmix64(component as u64))
}

pub fn stream_rng(seed: u64, component: Component, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(component_seed(seed, component));
    rng.set_stream(stream);
    rng
}
