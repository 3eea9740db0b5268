//! Seeded random primitives.
//!
//! Kept deliberately small and hand-rolled: generated instances and sampled
//! scenarios must replay bit-identically across releases and platforms, so
//! the mapping from raw ChaCha output to floats is pinned here instead of
//! delegated to a distribution crate.

use rand_core::RngCore;

/// Uniform draw in [0, 1) using the top 53 bits of one `next_u64`.
pub fn uniform_01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in (0, 1]; avoids log(0) in the Gaussian transform.
fn uniform_01_open_low<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One Gaussian draw via the Box-Muller transform (cosine branch only).
///
/// Always consumes exactly two `next_u64` calls, so interleaved sampling
/// streams stay aligned no matter which branch callers take.
pub fn sample_normal<R: RngCore + ?Sized>(rng: &mut R, mean: f64, std: f64) -> f64 {
    let u1 = uniform_01_open_low(rng);
    let u2 = uniform_01(rng);
    let z = libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2);
    mean + std * z
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let u = uniform_01(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn normal_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_normal(&mut rng, 3.0, 2.0);
            sum += x;
            sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!((mean - 3.0).abs() < 0.03, "mean {mean}");
        assert!((var - 4.0).abs() < 0.1, "var {var}");
    }
}
