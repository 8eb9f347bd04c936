//! Counter-based random streams.
//!
//! Every random draw is addressed by `(seed, domain, index)`: the seed and
//! domain key a ChaCha8 generator and the index selects one of its 2^64
//! independent streams. Work items never share a stream, so results do not
//! depend on how items are scheduled across threads.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Separates the streams used by different subsystems under one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    FieldSamples = 1,
    HiddenVariables = 2,
    Trajectories = 3,
    Fixtures = 4,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}
