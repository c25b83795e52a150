//! Deterministic randomness plumbing shared by the samplers and experiment
//! runner.
//!
//! All randomness in this crate flows from a single `u64` seed through
//! [`derive_subseed`] into [`ChaCha8Rng`] streams.  ChaCha8 is seedable,
//! platform independent, and stable across releases of `rand_chacha`, so any
//! `(config, seed)` pair reproduces bit-identical output on every platform.
//!
//! The subseed hash is SplitMix64, applied as
//! `s_0 = seed`, `s_{i+1} = splitmix64(s_i ^ splitmix64(part_i))`.
//! This exact chain is part of the output contract: parallel workers derive
//! their streams independently, so execution order never affects results.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a subseed from a root seed and a sequence of context parts
/// (relator index, sweep length, trial index, ...).
pub fn derive_subseed(seed: u64, parts: &[u64]) -> u64 {
    let mut s = seed;
    for &p in parts {
        s = splitmix64(s ^ splitmix64(p));
    }
    s
}

/// A ChaCha8 stream for the given subseed.
pub fn stream(subseed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(subseed)
}

/// Uniform draw from `0..n` by masked rejection on `next_u64`.
///
/// Panics if `n == 0`.
pub fn uniform_u64_below(rng: &mut impl RngCore, n: u64) -> u64 {
    assert!(n > 0, "uniform_u64_below: empty range");
    if n == 1 {
        return 0;
    }
    let mask = u64::MAX >> (n - 1).leading_zeros();
    loop {
        let x = rng.next_u64() & mask;
        if x < n {
            return x;
        }
    }
}

/// Uniform draw from `0..n` for arbitrary-precision bounds, by bit-level
/// rejection: sample exactly `n.bits()` random bits (little-endian bytes,
/// high byte masked) until the value falls below `n`.
///
/// Panics if `n == 0`.
pub fn uniform_biguint_below(rng: &mut impl RngCore, n: &BigUint) -> BigUint {
    assert!(!n.is_zero(), "uniform_biguint_below: empty range");
    let bits = n.bits();
    let nbytes = ((bits + 7) / 8) as usize;
    let top_mask: u8 = if bits % 8 == 0 {
        0xff
    } else {
        (1u8 << (bits % 8)) - 1
    };
    let mut buf = vec![0u8; nbytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[nbytes - 1] &= top_mask;
        let candidate = BigUint::from_bytes_le(&buf);
        if candidate < *n {
            return candidate;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn subseed_is_stable() {
        // Frozen values: the subseed chain is a documented output contract.
        assert_eq!(splitmix64(0), 0xe220a8397b1dcdaf);
        assert_eq!(derive_subseed(42, &[]), 42);
        let a = derive_subseed(42, &[1, 2]);
        let b = derive_subseed(42, &[1, 2]);
        assert_eq!(a, b);
        assert_ne!(derive_subseed(42, &[1, 2]), derive_subseed(42, &[2, 1]));
    }

    #[test]
    fn uniform_u64_covers_range() {
        let mut rng = stream(7);
        let mut seen = [false; 5];
        for _ in 0..200 {
            seen[uniform_u64_below(&mut rng, 5) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn uniform_biguint_in_range() {
        let mut rng = stream(11);
        let n = BigUint::from(1_000_000_007u64);
        for _ in 0..100 {
            let x = uniform_biguint_below(&mut rng, &n);
            assert!(x < n);
        }
        // one-element range
        let one = BigUint::from(1u32);
        assert_eq!(uniform_biguint_below(&mut rng, &one).to_u64(), Some(0));
    }
}
