//! Seed handling. A single master seed is split into independent streams by
//! hashing (seed, stream counter) with SplitMix64.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Stream = ChaCha20Rng;

/// One standard normal draw.
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a stream seed from a master seed and a tuple of counters.
pub fn derive_seed(master: u64, counters: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for &c in counters {
        s = splitmix64(s ^ splitmix64(c.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    s
}

pub fn stream(master: u64, counters: &[u64]) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(master, counters))
}
