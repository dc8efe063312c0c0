//! Reproducible, splittable random streams.
//!
//! A stream is a `(seed, stream id)` pair mapped onto ChaCha8's native 64-bit
//! stream parameter, so streams with distinct ids never share key-stream blocks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over a tag, used to turn experiment names into stream components.
pub fn tag_hash(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Child stream keyed by `index`; deterministic and independent of call order.
    pub fn substream(&self, index: u64) -> Self {
        Self { seed: self.seed, stream: splitmix64(self.stream ^ splitmix64(index.wrapping_add(1))) }
    }

    /// Child stream keyed by a string tag.
    pub fn tagged(&self, tag: &str) -> Self {
        self.substream(tag_hash(tag))
    }

    /// Stream for `(experiment, window, replicate)`.
    pub fn replicate(&self, experiment: &str, window: u64, replicate: u64) -> Self {
        self.tagged(experiment).substream(window).substream(replicate)
    }
}
