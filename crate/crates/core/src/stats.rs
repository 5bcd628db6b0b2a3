//! Random streams and the small amount of probability the model needs.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{param, Result};
use crate::scalar::Scalar;

/// A seeded random stream identified by `(seed, label)`.
///
/// Streams are derived by hashing, so every consumer (peer, purpose) owns an
/// independent sequence regardless of how events interleave. ChaCha output is
/// platform independent.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    label: String,
    rng: ChaCha8Rng,
}

impl PartialEq for RngStream {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.label == other.label
            && self.rng.get_word_pos() == other.rng.get_word_pos()
            && self.rng.get_seed() == other.rng.get_seed()
    }
}

impl RngStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform variate on `(0, 1]`. Zero is excluded so `ln(u)` is finite.
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        self.rng.gen_range(0..n)
    }
}

/// Derive the stream for `(seed, label)`.
pub fn derive_stream(seed: u64, label: &str) -> RngStream {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest[..32]);
    RngStream {
        seed,
        label: label.to_owned(),
        rng: ChaCha8Rng::from_seed(key),
    }
}

/// Inverse-CDF exponential sample, `-mean * ln(u)` with `u` in `(0, 1]`.
///
/// The result is positive except in the measure-zero case `u == 1`, which is
/// nudged to the smallest positive double.
pub fn sample_exponential(stream: &mut RngStream, mean: f64) -> Result<f64> {
    if !(mean > 0.0) || !mean.is_finite() {
        return param(format!("exponential mean must be positive, got {mean}"));
    }
    let v = -mean * stream.uniform_open0().ln();
    Ok(if v > 0.0 { v } else { f64::MIN_POSITIVE })
}

/// Erlang (integer shape gamma) parameters. Shapes 1 to 4 are supported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErlangParams<T> {
    shape: u32,
    scale: T,
}

impl<T: Scalar> ErlangParams<T> {
    pub const MAX_SHAPE: u32 = 4;

    pub fn new(shape: u32, scale: T) -> Result<Self> {
        if !(1..=Self::MAX_SHAPE).contains(&shape) {
            return param(format!("erlang shape must be in 1..=4, got {shape}"));
        }
        if !(scale > T::zero()) || !scale.is_finite() {
            return param(format!("erlang scale must be positive, got {scale}"));
        }
        Ok(Self { shape, scale })
    }

    pub fn shape(&self) -> u32 {
        self.shape
    }

    pub fn scale(&self) -> T {
        self.scale
    }
}

/// Erlang CDF in closed form: `1 - e^{-z} * sum_{j<k} z^j / j!` with `z = t / scale`.
pub fn erlang_cdf<T: Scalar>(t: T, p: &ErlangParams<T>) -> T {
    if !(t > T::zero()) {
        return T::zero();
    }
    if t.is_infinite() {
        return T::one();
    }
    let z = t / p.scale;
    let mut term = T::one();
    let mut sum = T::zero();
    for j in 0..p.shape {
        sum = sum + term;
        term = term * z / T::from_count(u64::from(j) + 1);
    }
    let tail = (-z).exp() * sum;
    (T::one() - tail).max(T::zero()).min(T::one())
}
