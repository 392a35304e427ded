//! Seeded random streams.
//!
//! A [`RngSeed`] names one ChaCha8 stream: the 64-bit seed keys the cipher
//! and the stream index selects one of its 2^64 independent streams, so
//! replicate `i` of a study always sees the same numbers no matter how
//! the replicates are scheduled.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Seed used when nothing else is configured.
pub const DEFAULT_SEED: u64 = 20_091_203;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl Default for RngSeed {
    fn default() -> Self {
        Self::new(DEFAULT_SEED)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSeed {
    pub const fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub const fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Substream `index` of this seed (same key, different stream).
    pub const fn substream(self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: index,
        }
    }

    /// A nested family of substreams: re-keys on (seed, stream) so that
    /// `derive(i).substream(j)` never collides with `substream(k)`.
    pub fn derive(self, index: u64) -> Self {
        let key = splitmix64(self.seed ^ splitmix64(self.stream.wrapping_add(0x5EED)));
        Self {
            seed: splitmix64(key ^ index),
            stream: 0,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// A uniform draw from the open interval (0, 1).
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}
