//! Counter-based uniform streams.
//!
//! Every excursion owns one ChaCha8 stream selected by `(seed, stream_id)`;
//! the position inside the stream is the draw counter. Streams never
//! overlap, so excursions can be simulated in any order or in parallel and
//! still reproduce bit for bit.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

pub struct UniformStream {
    rng: ChaCha8Rng,
    drawn: u64,
}

impl UniformStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { rng, drawn: 0 }
    }

    /// Stream positioned at draw number `index`.
    pub fn at(seed: u64, stream_id: u64, index: u64) -> Self {
        let mut s = Self::new(seed, stream_id);
        // each f64 draw consumes two 32-bit words
        s.rng.set_word_pos(2 * index as u128);
        s.drawn = index;
        s
    }

    /// Uniform on the open interval (0, 1), on the grid `(k + 1/2) 2^-53`.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        self.drawn += 1;
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }

    pub fn drawn(&self) -> u64 {
        self.drawn
    }
}

/// Source of open-interval uniforms.
pub trait UniformSource {
    fn next_open01(&mut self) -> f64;
}

impl UniformSource for UniformStream {
    #[inline]
    fn next_open01(&mut self) -> f64 {
        UniformStream::next_open01(self)
    }
}
