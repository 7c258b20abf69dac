//! Deterministic splittable random streams.
//!
//! The generator is counter-based: draw `k` of a `(seed, stream)` pair is a
//! fixed 64-bit mixing function of `(seed, stream, k)`, so sequences are
//! identical on every platform and independent streams can be handed to
//! parallel workers without coordination. The construction is the
//! splittable-random scheme: the state walks an odd additive constant
//! ("gamma") derived from the stream id and each output is a finalizing
//! mix of the state.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// 64-bit finalizer (Stafford mix 13, the splitmix64 output function).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic random stream identified by `(seed, stream)`.
///
/// Identical `(seed, stream)` pairs produce identical sequences; distinct
/// stream indices produce statistically independent sequences. Forking via
/// [`Rng::substream`] yields deterministic child streams, so parallel
/// schedules can be made reproducible by assigning stream indices from the
/// work items themselves (e.g. a permutation's lexicographic rank).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    seed: u64,
    stream: u64,
    state: u64,
    gamma: u64,
}

impl Rng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let base = mix64(seed ^ mix64(stream.wrapping_mul(GOLDEN) ^ 0x5851_F42D_4C95_7F2D));
        let gamma = mix64(base ^ GOLDEN) | 1;
        Rng { seed, stream, state: base, gamma }
    }

    /// The user-level seed this stream was keyed with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Deterministic child stream `index` of this stream. Children keep the
    /// user-level seed (for reporting) and derive a fresh stream id, so
    /// `substream(0)`, `substream(1)`, ... are mutually independent and
    /// independent of the parent.
    pub fn substream(&self, index: u64) -> Rng {
        Rng::new(self.seed, mix64(self.stream ^ GOLDEN.wrapping_mul(index.wrapping_add(1))))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(self.gamma);
        mix64(self.state)
    }

    /// Uniform draw strictly inside (0, 1): a 53-bit mantissa offset by half
    /// an ulp, so inverse-cdf sampling never sees 0 or 1.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53
        ((self.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    /// Uniform integer in `0..bound` by rejection (bound > 0).
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }
}
