use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic random stream with hierarchical forking.
///
/// Every stream derived from one root seed shares the ChaCha key; forks get
/// distinct stream ids, so sibling substreams never overlap. Uniform draws
/// are counted, which lets tests pin how many a sampler consumes.
#[derive(Debug, Clone)]
pub struct RngStream {
    root: u64,
    id: u64,
    rng: ChaCha8Rng,
    draws: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(root: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(root);
        rng.set_stream(id);
        Self {
            root,
            id,
            rng,
            draws: 0,
        }
    }

    /// An independent substream; the same `(self, index)` always yields the
    /// same stream, regardless of how much `self` has been consumed.
    pub fn fork(&self, index: u64) -> RngStream {
        let id = splitmix64(self.id ^ splitmix64(index).rotate_left(17));
        Self::with_stream(self.root, id)
    }

    pub fn seed(&self) -> u64 {
        self.root
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random::<f64>()
    }

    /// `true` with probability `p`; consumes exactly one uniform.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform draws consumed through [`RngStream::uniform`] so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }

    /// The underlying generator, for use with `rand_distr` distributions.
    /// Draws taken this way are not counted.
    pub fn inner_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
