//! Reproducible random streams.
//!
//! Every Monte Carlo path owns a ChaCha8 stream keyed by the master seed and
//! selected by a 64-bit stream id, so deriving stream `i` is O(1) and the
//! sequence is identical on every platform. The top byte of the stream id
//! carries a [`Domain`] so that the auxiliary randomness of a path (reset
//! clock, subordinator, horizontal component, …) never overlaps its Brownian
//! increments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

const DOMAIN_SHIFT: u32 = 56;
const INDEX_MASK: u64 = (1 << DOMAIN_SHIFT) - 1;

/// Role of a random stream belonging to one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Domain {
    Brownian = 0,
    ResetClock = 1,
    Subordinator = 2,
    Horizontal = 3,
    Initial = 4,
    Oracle = 5,
    Resample = 6,
}

/// `(master_seed, stream_index)` pair identifying one stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStreamSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStreamSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Same master seed, different path.
    pub fn with_index(self, stream_index: u64) -> Self {
        Self {
            stream_index,
            ..self
        }
    }

    /// The Brownian stream of this path.
    pub fn derive(&self) -> StreamRng {
        self.derive_in(Domain::Brownian)
    }

    /// The stream playing `domain` for this path.
    pub fn derive_in(&self, domain: Domain) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(((domain as u64) << DOMAIN_SHIFT) | (self.stream_index & INDEX_MASK));
        rng
    }
}

/// Derives an unrelated master seed from `master` and a tag, so that
/// independent sample sets of one run never share streams.
pub fn sub_seed(master: u64, tag: u64) -> u64 {
    // SplitMix64 finaliser over the combined words.
    let mut z = master ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Free-function form of [`RngStreamSpec::derive`].
pub fn derive_stream(spec: RngStreamSpec) -> StreamRng {
    spec.derive()
}
