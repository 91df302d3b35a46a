use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A reproducible source of randomness identified by `(seed, stream_id)`.
///
/// The generator is ChaCha8 keyed by `seed` and positioned on the ChaCha
/// stream `stream_id`, so two descriptors with equal pairs replay the same
/// sequence and distinct stream ids never overlap. Monte Carlo loops give
/// every replicate its own [`RandomStream::substream`], which keeps results
/// independent of execution order and thread count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
}

impl RandomStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        RandomStream { seed, stream_id }
    }

    pub const fn seed(&self) -> u64 {
        self.seed
    }

    pub const fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// The `index`-th child stream.
    ///
    /// Children of different parents are keyed differently, so nested
    /// derivations (experiment → trial → subset) stay disjoint.
    pub fn substream(&self, index: u64) -> RandomStream {
        RandomStream {
            seed: splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x5851_f42d_4c95_7f2d))),
            stream_id: index,
        }
    }
}

/// Root stream ids separating the independent consumers of one seed.
pub mod domain {
    pub const NULL_REFERENCE: u64 = 1;
    pub const TRIALS: u64 = 2;
    pub const ASYMPTOTIC: u64 = 3;
    pub const DIAGNOSTICS: u64 = 4;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
