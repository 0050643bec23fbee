use num_complex::Complex64;
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use std::f64::consts::TAU;

/// Counter-addressable complex Gaussian noise. Sample `n` of a stream is a
/// pure function of `(seed, stream, n)`, so any span can be regenerated and
/// streams never influence each other.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    stream: u64,
}

/// 32-bit words consumed per complex sample (two u64 draws).
const WORDS_PER_SAMPLE: u128 = 4;

impl NoiseStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        NoiseStream { seed, stream }
    }

    /// Adds unit-variance-per-dimension noise scaled by `sigma` to `out`,
    /// which holds samples `first..first + out.len()` of the stream.
    pub fn add_to(&self, first: u64, sigma: f64, out: &mut [Complex64]) {
        if sigma == 0.0 || out.is_empty() {
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(first as u128 * WORDS_PER_SAMPLE);
        for s in out {
            *s += sigma * gaussian_pair(rng.next_u64(), rng.next_u64());
        }
    }

    pub fn samples(&self, first: u64, len: usize, sigma: f64) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); len];
        self.add_to(first, sigma, &mut v);
        v
    }
}

/// Box-Muller transform of two uniform words into two independent standard
/// normal values.
fn gaussian_pair(a: u64, b: u64) -> Complex64 {
    // (0, 1]: never zero, so the logarithm stays finite.
    let u1 = ((a >> 11) + 1) as f64 / (1u64 << 53) as f64;
    let u2 = (b >> 11) as f64 / (1u64 << 53) as f64;
    Complex64::from_polar((-2.0 * u1.ln()).sqrt(), TAU * u2)
}
