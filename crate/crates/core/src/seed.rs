//! Counter-based seed derivation.
//!
//! A [`Seed`] is a root value plus a stream index. The generator for a seed is
//! `ChaCha8Rng::seed_from_u64(root)` with `set_stream(stream)`, so path `i` of a
//! batch always draws from stream `i` of the same root regardless of which
//! thread evaluates it or in which order. Independent sub-experiments (for
//! example the continuations of a measurability test) obtain a fresh root with
//! [`Seed::derive`], which hashes the current root and stream together with a
//! tag through SplitMix64.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub root: u64,
    pub stream: u64,
}

impl Seed {
    pub const fn new(root: u64) -> Self {
        Self { root, stream: 0 }
    }

    /// Seed for path `index` of a batch rooted at `self.root`.
    pub const fn path(self, index: u64) -> Self {
        Self {
            root: self.root,
            stream: index,
        }
    }

    /// A new root, statistically independent of `self`, keyed by `tag`.
    pub fn derive(self, tag: u64) -> Self {
        let mixed = splitmix64(self.root ^ splitmix64(self.stream ^ splitmix64(tag)));
        Self::new(mixed)
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(self.stream);
        rng
    }
}

impl From<u64> for Seed {
    fn from(root: u64) -> Self {
        Self::new(root)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
