//! Portable random streams.
//!
//! Every random draw in the simulator goes through [`SimRng`], so that an
//! implementation in any language can reproduce a run bit for bit:
//!
//! * generator: xoshiro256** (Blackman & Vigna), state seeded from a `u64`
//!   by four successive SplitMix64 outputs;
//! * uniform `[0, 1)`: `(next_u64 >> 11) * 2^-53`;
//! * standard normal: Marsaglia polar method. Draw `u = 2U - 1`, then
//!   `v = 2U - 1`; reject unless `0 < u² + v² < 1`; return
//!   `u * sqrt(-2 ln s / s)`. The second variate is discarded;
//! * Poisson: Knuth's product-of-uniforms method (`λ = 0` consumes no draws).

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: Xoshiro256StarStar,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }

    pub fn normal(&mut self, mean: f64, stddev: f64) -> f64 {
        mean + stddev * self.standard_normal()
    }

    pub fn poisson(&mut self, lambda: f64) -> u64 {
        if lambda <= 0.0 {
            return 0;
        }
        let limit = (-lambda).exp();
        let mut k = 0;
        let mut product = self.uniform();
        while product > limit {
            k += 1;
            product *= self.uniform();
        }
        k
    }

    /// Uniform index in `0..n` by floor-scaling a uniform draw. `n` must be non-zero.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // SplitMix64 reference stream for seed 0 (published by Vigna).
    #[test]
    fn splitmix_reference_outputs_feed_the_state() {
        fn splitmix(state: &mut u64) -> u64 {
            *state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = *state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        }
        let mut s = 0u64;
        assert_eq!(splitmix(&mut s), 0xe220a8397b1dcdaf);
        assert_eq!(splitmix(&mut s), 0x6e789e6aa1b965f4);

        // Rebuild xoshiro256** by hand from the SplitMix64 state and compare.
        let mut st = [0u64; 4];
        let mut sm = 42u64;
        for w in st.iter_mut() {
            *w = splitmix(&mut sm);
        }
        let mut manual = || {
            let result = st[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
            let t = st[1] << 17;
            st[2] ^= st[0];
            st[3] ^= st[1];
            st[1] ^= st[2];
            st[0] ^= st[3];
            st[2] ^= t;
            st[3] = st[3].rotate_left(45);
            result
        };
        let mut rng = SimRng::new(42);
        for _ in 0..100 {
            assert_eq!(rng.next_u64(), manual());
        }
    }

    #[test]
    fn uniform_stays_in_unit_interval() {
        let mut rng = SimRng::new(7);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn normal_moments() {
        let mut rng = SimRng::new(11);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.normal(5.0, 2.0)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 5.0).abs() < 0.02, "mean {mean}");
        assert!((var - 4.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn poisson_zero_rate_is_zero_and_draws_nothing() {
        let mut a = SimRng::new(3);
        let b = a.clone();
        assert_eq!(a.poisson(0.0), 0);
        assert_eq!(a.next_u64(), b.clone().next_u64());
    }
}
