//! Deterministic seed splitting.
//!
//! A master seed fans out into per-realization seeds, and each realization
//! seed into independent ChaCha streams, one per purpose. Changing anything
//! other than the master seed and realization index (for example the α grid)
//! never changes what a stream produces.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    Kossakowski = 1,
    Hamiltonian = 2,
    Analysis = 3,
    Reference = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedTree {
    master: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        SeedTree { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Seed of realization `index`; distinct indices give unrelated seeds.
    pub fn realization_seed(&self, index: usize) -> u64 {
        splitmix64(self.master ^ splitmix64(index as u64 + 1))
    }

    pub fn rng(&self, index: usize, stream: Stream) -> ChaCha20Rng {
        stream_rng(self.realization_seed(index), stream)
    }
}

/// Generator for one purpose of one realization seed.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
