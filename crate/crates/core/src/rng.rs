//! Seed derivation and per-stream generators.
//!
//! Every random quantity in a run is drawn from its own stream. A stream is
//! identified by `(parent_seed, index, tag)` and turned into a 64-bit seed by
//! [`derive_seed`]; that seed keys a ChaCha8 generator, which is counter based,
//! so streams never share state.
//!
//! The derivation chain used throughout the crate is:
//!
//! ```text
//! trial seed  = derive_seed(master_seed, trial_index, StreamTag::Trial)
//! layer i     = derive_seed(trial_seed,  i,           StreamTag::Layer)
//! black marks = derive_seed(trial_seed,  0,           StreamTag::Black)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used for every stream.
pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const INDEX_KEY: u64 = 0xd1b5_4a32_d192_ed03;
const TAG_KEY: u64 = 0x8cb9_2ba7_2f3d_8dd7;

/// Purpose of a derived stream. Distinct tags give unrelated seeds for the
/// same `(parent, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamTag {
    Trial,
    Layer,
    Black,
}

impl StreamTag {
    fn code(self) -> u64 {
        match self {
            StreamTag::Trial => 0x5452_4941_4c00_0001,
            StreamTag::Layer => 0x4c41_5945_5200_0002,
            StreamTag::Black => 0x424c_4143_4b00_0003,
        }
    }
}

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed, an index and a tag.
///
/// For a fixed parent and tag the map `index -> seed` is a bijection (each step
/// is an xor with a constant followed by `mix64`), so seeds of distinct
/// trials or layers never collide.
pub fn derive_seed(parent: u64, index: u64, tag: StreamTag) -> u64 {
    let h = mix64(parent.wrapping_add(GOLDEN));
    let h = mix64(h ^ mix64(index.wrapping_add(INDEX_KEY)));
    mix64(h ^ mix64(tag.code().wrapping_add(TAG_KEY)))
}

/// Opens the generator for a derived seed.
pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn derive_is_pure() {
        assert_eq!(
            derive_seed(7, 3, StreamTag::Trial),
            derive_seed(7, 3, StreamTag::Trial)
        );
    }

    #[test]
    fn no_collisions_over_ten_thousand_trials() {
        let seeds: HashSet<u64> = (0..10_000)
            .map(|t| derive_seed(0xdead_beef, t, StreamTag::Trial))
            .collect();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn tag_changes_seed() {
        for t in 0..100 {
            let a = derive_seed(42, t, StreamTag::Trial);
            let b = derive_seed(42, t, StreamTag::Layer);
            let c = derive_seed(42, t, StreamTag::Black);
            assert!(a != b && b != c && a != c);
        }
    }

    #[test]
    fn mix64_known_value() {
        // SplitMix64 first output for state 0 is mix64(GOLDEN).
        assert_eq!(mix64(GOLDEN), 0xe220_a839_7b1d_cdaf);
    }
}
