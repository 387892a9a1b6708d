//! Seedable, splittable randomness.
//!
//! Every random experiment takes an [`RngSeed`]. Parallel work never shares a
//! generator; each work unit derives its own substream with
//! [`derive_substream`], so results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A `(seed, stream)` pair identifying one ChaCha8 stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub const fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    pub fn substream(&self, index: u64) -> Self {
        derive_substream(*self, index)
    }
}

impl Default for RngSeed {
    fn default() -> Self {
        Self::new(0)
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        Self::new(seed)
    }
}

// splitmix64 finalizer; a bijection on u64.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child stream `index` of `seed`. Injective in `index` for a fixed parent:
/// the map is a composition of bijections on u64.
pub fn derive_substream(seed: RngSeed, index: u64) -> RngSeed {
    let stream = mix64(mix64(index).wrapping_add(seed.stream ^ 0x9e37_79b9_7f4a_7c15));
    RngSeed {
        seed: seed.seed,
        stream,
    }
}
