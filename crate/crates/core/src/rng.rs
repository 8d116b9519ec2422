//! Counter-based random streams.
//!
//! A stream is identified by a 64-bit key derived from `(seed, a, b)`, where
//! `a` and `b` are typically a replicate number and a cell or step index.
//! Draw `k` of a stream is a pure function of `(key, k)`, so the order in
//! which cells are visited, or the thread that visits them, never changes a
//! result.

use crate::math::{floor, lgamma, ln, sqrt};
use crate::stats::normal_quantile;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Domain tags that keep independent uses of one seed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Path = 1,
    Field = 2,
    Common = 3,
    Bridge = 4,
    Reference = 5,
    Lattice = 6,
    Stationarity = 7,
}

#[inline]
pub fn stream_key(seed: u64, domain: Domain, a: u64, b: u64) -> u64 {
    let mut k = mix64(seed ^ GOLDEN);
    k = mix64(k ^ (domain as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
    k = mix64(k ^ a.wrapping_mul(0xa076_1d64_78bd_642f));
    mix64(k ^ b.wrapping_mul(0xe703_7ed1_a0b4_28db))
}

/// SplitMix64 over a fixed key: output `k` is `mix(key + (k+1)·γ)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        CounterRng { key, counter: 0 }
    }

    pub fn keyed(seed: u64, domain: Domain, a: u64, b: u64) -> Self {
        CounterRng::new(stream_key(seed, domain, a, b))
    }

    /// An independent stream indexed by `index`, cheaper than a fresh key.
    #[inline]
    pub fn substream(&self, index: u64) -> CounterRng {
        CounterRng::new(mix64(self.key ^ index.wrapping_add(1).wrapping_mul(0x8cb9_2ba7_2f3d_8dd7)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal by inversion of a single uniform.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            0
        } else if mean < 10.0 {
            self.poisson_inversion(mean)
        } else {
            self.poisson_ptrs(mean)
        }
    }

    fn poisson_inversion(&mut self, mean: f64) -> u64 {
        let u = self.uniform();
        let mut k = 0u64;
        let mut p = crate::math::exp(-mean);
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            let next = cdf + p;
            if next == cdf {
                break;
            }
            cdf = next;
        }
        k
    }

    // Hörmann's transformed rejection with squeeze (PTRS), for mean ≥ 10.
    fn poisson_ptrs(&mut self, mean: f64) -> u64 {
        let smu = sqrt(mean);
        let b = 0.931 + 2.53 * smu;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        let log_mean = ln(mean);
        loop {
            let u = self.uniform() - 0.5;
            let v = self.uniform();
            let us = 0.5 - u.abs();
            let k = floor((2.0 * a / us + b) * u + mean + 0.43);
            if us >= 0.07 && v <= vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = ln(v) + ln(inv_alpha) - ln(a / (us * us) + b);
            let rhs = -mean + k * log_mean - lgamma(k + 1.0);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = CounterRng::keyed(42, Domain::Path, 3, 7);
        let mut b = CounterRng::keyed(42, Domain::Path, 3, 7);
        let mut c = CounterRng::keyed(42, Domain::Path, 3, 8);
        let xa: [u64; 4] = core::array::from_fn(|_| a.next_u64());
        let xb: [u64; 4] = core::array::from_fn(|_| b.next_u64());
        let xc: [u64; 4] = core::array::from_fn(|_| c.next_u64());
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_ne!(stream_key(1, Domain::Path, 0, 0), stream_key(1, Domain::Field, 0, 0));
    }

    #[test]
    fn uniform_stays_open() {
        let mut r = CounterRng::new(0);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn uniform_moments() {
        let mut r = CounterRng::keyed(9, Domain::Reference, 0, 0);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let u = r.uniform();
            s += u;
            s2 += u * u;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        // sd of the mean is sqrt(1/12/n) ≈ 6.5e-4
        assert!((mean - 0.5).abs() < 4e-3);
        assert!((var - 1.0 / 12.0).abs() < 2e-3);
    }

    #[test]
    fn poisson_moments_small_and_large() {
        for &mean in &[0.3, 4.0, 25.0, 400.0] {
            let n = 100_000;
            let (mut s, mut s2) = (0.0, 0.0);
            for i in 0..n {
                let k = CounterRng::keyed(5, Domain::Field, 0, i).poisson(mean) as f64;
                s += k;
                s2 += k * k;
            }
            let m = s / n as f64;
            let v = s2 / n as f64 - m * m;
            let se = sqrt(mean / n as f64);
            assert!((m - mean).abs() < 5.0 * se, "mean {m} vs {mean}");
            // Var of the sample variance ≈ (μ + 2μ²)/n for Poisson.
            let vse = sqrt((mean + 2.0 * mean * mean) / n as f64);
            assert!((v - mean).abs() < 5.0 * vse, "var {v} vs {mean}");
        }
    }

    #[test]
    fn poisson_zero_mean_is_zero() {
        assert_eq!(CounterRng::new(1).poisson(0.0), 0);
    }
}
