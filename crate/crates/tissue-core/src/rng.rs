//! The deterministic randomness protocol.
//!
//! Every random decision in the engine and the trace generator goes through
//! the helpers below over a single ChaCha8 stream. The protocol is part of
//! the replay contract (logs are a pure function of parameters and trace),
//! so it is deliberately explicit rather than delegated to distribution
//! adapters that may change between library versions:
//!
//! * uniform index in `[0, n)`: `next_u64() % n`
//! * shuffle: Fisher–Yates, `for i in (1..len).rev() { swap(i, draw(i + 1)) }`
//! * sample k of n without replacement: Floyd's algorithm, consuming exactly
//!   k draws, result consumed in ascending index order
//! * unit float: high 53 bits of `next_u64`, giving `[0, 1)`

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub type EngineRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> EngineRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform index in `[0, n)`. `n` must be non-zero.
#[inline]
pub fn draw(rng: &mut impl RngCore, n: usize) -> usize {
    debug_assert!(n > 0);
    (rng.next_u64() % n as u64) as usize
}

/// Uniform value in `[0, n)` for syscall-sized ranges.
#[inline]
pub fn draw_u32(rng: &mut impl RngCore, n: u32) -> u32 {
    debug_assert!(n > 0);
    (rng.next_u64() % n as u64) as u32
}

/// Uniform time offset in `[0, span_us)`; `span_us` must be non-zero.
#[inline]
pub fn draw_u64(rng: &mut impl RngCore, span: u64) -> u64 {
    debug_assert!(span > 0);
    rng.next_u64() % span
}

/// Uniform float in `[0, 1)`.
#[inline]
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// In-place Fisher–Yates shuffle.
pub fn shuffle<T>(rng: &mut impl RngCore, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = draw(rng, i + 1);
        items.swap(i, j);
    }
}

/// Floyd's sampling: k distinct indices from `[0, n)`, ascending. Consumes
/// exactly k draws regardless of the outcome.
pub fn sample_indices(rng: &mut impl RngCore, n: usize, k: usize) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut chosen: BTreeSet<usize> = BTreeSet::new();
    for j in (n - k)..n {
        let t = draw(rng, j + 1);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    chosen.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_is_distinct_ascending_and_seed_stable() {
        let mut rng = seeded(7);
        let a = sample_indices(&mut rng, 50, 10);
        assert_eq!(a.len(), 10);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(a.iter().all(|&i| i < 50));

        let mut rng2 = seeded(7);
        assert_eq!(a, sample_indices(&mut rng2, 50, 10));
    }

    #[test]
    fn sample_of_everything_is_identity() {
        let mut rng = seeded(1);
        assert_eq!(sample_indices(&mut rng, 4, 4), alloc::vec![0, 1, 2, 3]);
    }

    #[test]
    fn sample_consumes_exactly_k_draws() {
        let mut a = seeded(3);
        let mut b = seeded(3);
        sample_indices(&mut a, 100, 7);
        for _ in 0..7 {
            b.next_u64();
        }
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = seeded(9);
        let mut v: Vec<usize> = (0..20).collect();
        shuffle(&mut rng, &mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn unit_float_in_range() {
        let mut rng = seeded(11);
        for _ in 0..1000 {
            let x = unit_f64(&mut rng);
            assert!((0.0..1.0).contains(&x));
        }
    }
}
