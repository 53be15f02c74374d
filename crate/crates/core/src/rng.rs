//! Reproducible random substreams.
//!
//! A [`RngSeed`] names one ChaCha8 stream: the `master` value keys the cipher
//! and `stream` selects one of its 2^64 independent streams. Work items that
//! may run on any thread derive their own seed with [`RngSeed::substream`], so
//! the draws a replicate sees never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub master: u64,
    pub stream: u64,
}

impl RngSeed {
    pub const fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    pub const fn from_master(master: u64) -> Self {
        Self { master, stream: 0 }
    }

    /// Generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }

    /// Child seed for work item `index`. The child key mixes both parent
    /// fields, so children of different parents do not collide.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            master: mix2(self.master, self.stream),
            stream: index,
        }
    }

    /// Seed for a labelled experiment cell, e.g. `(table tag, cell index)`.
    pub fn derive(&self, label: u64, cell: u64) -> Self {
        Self {
            master: mix2(mix2(self.master, label), cell),
            stream: self.stream,
        }
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix2(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b).rotate_left(17))
}

/// Stable 64-bit tag for a string label (FNV-1a).
pub fn label_tag(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
