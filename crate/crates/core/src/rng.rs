//! Deterministic random streams.
//!
//! Every experiment has one master seed. Each frame draws its channel, its
//! payload bits and its noise from separate ChaCha streams keyed by the master
//! seed, the frame index and the stream kind, so results do not depend on how
//! frames are distributed over worker threads and two detectors can be run on
//! exactly the same realisation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Channel = 0,
    Bits = 1,
    Noise = 2,
    Aux = 3,
}

const STREAMS_PER_FRAME: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    master: u64,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn rng(&self, frame: u64, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(frame.wrapping_mul(STREAMS_PER_FRAME) + stream as u64);
        rng
    }
}

/// Circularly symmetric complex Gaussian with the given total variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<u8> {
    (0..count).map(|_| rng.random::<bool>() as u8).collect()
}
