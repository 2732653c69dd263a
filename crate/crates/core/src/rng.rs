//! Counter-based random streams.
//!
//! Every random quantity in the crate is drawn from a [`StreamRng`] keyed by a
//! tuple of integers (seed, sweep, coordinate, ...). The key is folded through
//! the SplitMix64 finalizer, so a stream is a pure function of its key and
//! results never depend on scheduling or worker count.
//!
//! Key derivation: `h = seed`; for each tag `t`: `h = mix(h ^ mix(t + GOLDEN))`
//! where `mix` is the SplitMix64 output function. The generator itself is
//! SplitMix64 started at state `h`.

use rand::RngCore;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::Real;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child key from a parent key and a sequence of tags.
#[inline]
pub fn derive_key(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(mix64(seed), |h, &t| mix64(h ^ mix64(t.wrapping_add(GOLDEN))))
}

/// SplitMix64 generator used as a keyed substream.
#[derive(Debug, Clone)]
pub struct StreamRng {
    state: u64,
}

impl StreamRng {
    pub fn from_key(key: u64) -> Self {
        Self { state: key }
    }

    pub fn new(seed: u64, tags: &[u64]) -> Self {
        Self::from_key(derive_key(seed, tags))
    }
}

impl RngCore for StreamRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

// Draws are generated in f64 and narrowed, so f32 and f64 runs share streams.

#[inline]
pub fn std_normal<T: Real, R: RngCore + ?Sized>(rng: &mut R) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::lit(z)
}

#[inline]
pub fn std_exp<T: Real, R: RngCore + ?Sized>(rng: &mut R) -> T {
    let e: f64 = Exp1.sample(rng);
    T::lit(e)
}

/// Uniform on the open interval (0, 1).
#[inline]
pub fn uniform_open<T: Real, R: RngCore + ?Sized>(rng: &mut R) -> T {
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    T::lit(u)
}

/// Inverse-gamma draw with shape `shape` and scale `scale` (density ∝ x^{-shape-1} e^{-scale/x}).
pub fn inverse_gamma<T: Real, R: RngCore + ?Sized>(shape: T, scale: T, rng: &mut R) -> T {
    if shape == T::one() {
        return scale / std_exp::<T, _>(rng);
    }
    let g = Gamma::new(shape.to_f64_lossy(), 1.0)
        .expect("inverse-gamma shape must be positive")
        .sample(rng);
    scale / T::lit(g)
}

/// Standard half-Cauchy draw, |tan(π(U − 1/2))|.
pub fn half_cauchy<T: Real, R: RngCore + ?Sized>(rng: &mut R) -> T {
    let u: f64 = uniform_open(rng);
    T::lit((std::f64::consts::PI * (u - 0.5)).tan().abs())
}

pub fn bernoulli<R: RngCore + ?Sized>(p: f64, rng: &mut R) -> bool {
    uniform_open::<f64, _>(rng) < p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_pure_functions_of_key() {
        let mut a = StreamRng::new(7, &[1, 2, 3]);
        let mut b = StreamRng::new(7, &[1, 2, 3]);
        let mut c = StreamRng::new(7, &[1, 2, 4]);
        let xa: Vec<u64> = (0..5).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..5).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..5).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn tag_order_matters() {
        assert_ne!(derive_key(1, &[2, 3]), derive_key(1, &[3, 2]));
    }

    #[test]
    fn inverse_gamma_mean() {
        // IG(3, 4) has mean 2.
        let mut rng = StreamRng::new(11, &[]);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| inverse_gamma(3.0, 4.0, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 0.03, "mean {mean}");
    }

    #[test]
    fn half_cauchy_median_is_one() {
        let mut rng = StreamRng::new(5, &[9]);
        let mut xs: Vec<f64> = (0..100_001).map(|_| half_cauchy(&mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[50_000] - 1.0).abs() < 0.02);
    }
}
