//! Counter-based RNG stream derivation.
//!
//! Every trial, batch, and sample gets its own stream derived from the master
//! seed and an index path, so parallel and serial execution consume identical
//! randomness and results are independent of the worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with an index path into a single stream seed.
pub fn mix(seed: u64, path: &[u64]) -> u64 {
    let mut s = splitmix(seed);
    for &p in path {
        s = splitmix(s ^ p.wrapping_mul(GOLDEN));
    }
    s
}

/// Deterministic, platform-independent RNG for the given (seed, path).
pub fn rng_from(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = rng_from(7, &[1, 2, 3]);
        let mut b = rng_from(7, &[1, 2, 3]);
        let mut c = rng_from(7, &[1, 2, 4]);
        let xa: u64 = a.random();
        let xb: u64 = b.random();
        let xc: u64 = c.random();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn path_order_matters() {
        assert_ne!(mix(1, &[2, 3]), mix(1, &[3, 2]));
        assert_ne!(mix(1, &[0]), mix(1, &[]));
    }
}
