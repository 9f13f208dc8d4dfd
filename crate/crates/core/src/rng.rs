//! Seeded random streams.
//!
//! Every random decision in the crate is drawn from ChaCha8 (the `rand_chacha`
//! implementation), a counter-based generator whose output is identical on
//! every platform. A stream is addressed by a 64-bit root seed plus a 64-bit
//! stream key, so work items (one SRAM, one matched map, one MC sample point)
//! each own an independent sequence and can be generated in any order or on
//! any thread without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Domain tags keep streams for different purposes from colliding when they
/// share a root seed and index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    HwSram = 1,
    RandomMap = 2,
    CountSample = 3,
    Workload = 4,
    Walk = 5,
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream keyed by `(seed, domain, index)`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(domain as u64)));
    rng.set_stream(index);
    rng
}

/// Stream keyed by `(seed, domain, a, b)` for two-level keys such as
/// `(sram index, voltage)`.
pub fn stream2(seed: u64, domain: Domain, a: u64, b: u64) -> SimRng {
    stream(seed, domain, mix64(a).rotate_left(17) ^ b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_key_same_sequence() {
        let mut a = stream(7, Domain::HwSram, 3);
        let mut b = stream(7, Domain::HwSram, 3);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn keys_separate_streams() {
        let a = stream(7, Domain::HwSram, 3).next_u64();
        assert_ne!(a, stream(7, Domain::HwSram, 4).next_u64());
        assert_ne!(a, stream(8, Domain::HwSram, 3).next_u64());
        assert_ne!(a, stream(7, Domain::RandomMap, 3).next_u64());
    }

    #[test]
    fn pinned_first_output() {
        // Guards against silent changes in the generator or key derivation.
        let first = stream(0, Domain::HwSram, 0).next_u64();
        assert_eq!(first, stream(0, Domain::HwSram, 0).next_u64());
        assert_eq!(first, 16347394167257802735);
    }
}
