//! Distribution functions and classical test statistics.

use alloc::vec::Vec;

use crate::math::{erfc, exp, lgamma, ln, sqrt};

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal upper tail `1 − Φ(x)`, accurate far into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

// Coefficients of Wichura's AS 241 (PPND16), highest degree first, as
// published.
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
const AS241_CENTRAL_NUM: [f64; 8] = [
    2509.080_928_730_122_7,
    33_430.575_583_588_13,
    67265.770_927_008_7,
    45921.953_931_549_87,
    13_731.693_765_509_46,
    1971.590_950_306_551_4,
    133.141_667_891_784_38,
    3.387_132_872_796_366_5,
];
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
const AS241_CENTRAL_DEN: [f64; 8] = [
    5226.495_278_852_546,
    28729.085_735_721_943,
    39307.895_800_092_71,
    21213.794_301_586_596,
    5394.196_021_424_751,
    687.187_007_492_057_9,
    42.313_330_701_600_91,
    1.0,
];
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
const AS241_MID_NUM: [f64; 8] = [
    7.745_450_142_783_414e-4,
    0.022_723_844_989_269_184,
    0.241_780_725_177_450_6,
    1.270_458_252_452_368_4,
    3.647_848_324_763_204_6,
    5.769_497_221_460_691,
    4.630_337_846_156_545,
    1.423_437_110_749_683_5,
];
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
const AS241_MID_DEN: [f64; 8] = [
    1.050_750_071_644_416_9e-9,
    5.475_938_084_995_345e-4,
    0.015_198_666_563_616_457,
    0.148_103_976_427_480_08,
    0.689_767_334_985_1,
    1.676_384_830_183_803_8,
    2.053_191_626_637_759,
    1.0,
];
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
const AS241_TAIL_NUM: [f64; 8] = [
    2.010_334_399_292_288_1e-7,
    2.711_555_568_743_487_6e-5,
    0.001_242_660_947_388_078_4,
    0.026_532_189_526_576_124,
    0.296_560_571_828_504_9,
    1.784_826_539_917_291_3,
    5.463_784_911_164_114,
    6.657_904_643_501_103,
];
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
const AS241_TAIL_DEN: [f64; 8] = [
    2.044_263_103_389_939_7e-15,
    1.421_511_758_316_446e-7,
    1.846_318_317_510_054_8e-5,
    7.868_691_311_456_133e-4,
    0.014_875_361_290_850_615,
    0.136_929_880_922_735_8,
    0.599_832_206_555_888,
    1.0,
];

#[inline]
fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Inverse of the standard normal CDF (Wichura's AS 241, about 1e-16
/// relative accuracy).
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(&AS241_CENTRAL_NUM, r) / horner(&AS241_CENTRAL_DEN, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = sqrt(-ln(tail));
    let val = if r <= 5.0 {
        horner(&AS241_MID_NUM, r - 1.6) / horner(&AS241_MID_DEN, r - 1.6)
    } else {
        horner(&AS241_TAIL_NUM, r - 5.0) / horner(&AS241_TAIL_DEN, r - 5.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Two-sided p-value of a standard normal statistic.
pub fn normal_two_sided_p(z: f64) -> f64 {
    (2.0 * normal_sf(z.abs())).min(1.0)
}

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_MAX_ITER: usize = 200_000;

fn gamma_prefactor(a: f64, x: f64) -> f64 {
    exp(-x + a * ln(x) - lgamma(a))
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * gamma_prefactor(a, x)
}

fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    gamma_prefactor(a, x) * h
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_continued_fraction(a, x)
    }
}

pub fn chi_square_cdf(x: f64, dof: f64) -> f64 {
    gamma_p(0.5 * dof, 0.5 * x)
}

pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    gamma_q(0.5 * dof, 0.5 * x)
}

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ (−1)^{j−1} exp(−2j²λ²)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series converges fast for small λ.
        let pi2 = core::f64::consts::PI * core::f64::consts::PI;
        let w = sqrt(2.0 * core::f64::consts::PI) / lambda;
        let mut s = 0.0;
        for j in 1..=8 {
            let k = (2 * j - 1) as f64;
            s += exp(-k * k * pi2 / (8.0 * lambda * lambda));
        }
        (1.0 - w * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        let mut sign = 1.0;
        for j in 1..=100 {
            let jf = j as f64;
            let term = exp(-2.0 * jf * jf * lambda * lambda);
            s += sign * term;
            if term < 1e-17 {
                break;
            }
            sign = -sign;
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let s = sqrt(n_eff);
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> KsResult {
    let mut xs: Vec<f64> = data.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    KsResult { statistic: d, p_value: ks_p_value(d, n) }
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        let t = if x <= y { x } else { y };
        while i < n && xs[i] <= t {
            i += 1;
        }
        while j < m && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n * m) as f64 / (n + m) as f64;
    KsResult { statistic: d, p_value: ks_p_value(d, n_eff) }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Lag-1 sample autocorrelation; zero for a constant series.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let denom: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let num: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    num / denom
}

/// Standard deviation of a binomial proportion.
pub fn binomial_sd(p: f64, n: usize) -> f64 {
    sqrt(p * (1.0 - p) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

    #[test]
    fn normal_cdf_matches_reference() {
        // Frozen from a 30-digit mpmath evaluation.
        let table = [
            (-8.0, 6.220_960_574_271_784e-16),
            (-3.3, 4.834_241_423_837_775e-4),
            (-1.0, 0.158_655_253_931_457_05),
            (-0.2, 0.420_740_290_560_896_97),
            (0.0, 0.5),
            (0.7, 0.758_036_347_776_927),
            (1.0, 0.841_344_746_068_542_9),
            (2.5, 0.993_790_334_674_224),
            (6.0, 0.999_999_999_013_412_4),
        ];
        for (x, p) in table {
            assert!((normal_cdf(x) - p).abs() <= 1e-14 * p, "{x}");
        }
        assert!((2.0 - 2.0 * normal_cdf(1.0) - 0.317_310_507_862_914_1).abs() < 1e-15);
    }

    #[test]
    fn normal_quantile_matches_reference() {
        let n = Normal::new(0.0, 1.0).unwrap();
        for &p in &[1e-300, 1e-20, 1e-9, 0.001, 0.02, 0.3, 0.5, 0.5001, 0.9, 0.975, 1.0 - 1e-12] {
            let ours = normal_quantile(p);
            let reference = n.inverse_cdf(p);
            assert!((ours - reference).abs() < 1e-9 * (1.0 + reference.abs()), "{p}: {ours} vs {reference}");
        }
        for &p in &[1e-10, 0.01, 0.25, 0.5, 0.8, 0.999_999] {
            assert!((normal_cdf(normal_quantile(p)) - p).abs() < 1e-14 * (1.0 + p / (1.0 - p)).min(1e3));
        }
        assert_eq!(normal_quantile(0.5), 0.0);
    }

    #[test]
    fn chi_square_matches_reference() {
        for &dof in &[1.0, 5.0, 30.0, 1000.0, 10_000.0] {
            let c = ChiSquared::new(dof).unwrap();
            for &frac in &[0.5, 0.9, 0.97, 1.0, 1.03, 1.1, 2.0] {
                let x = dof * frac;
                let ours = chi_square_cdf(x, dof);
                let reference = c.cdf(x);
                assert!((ours - reference).abs() < 1e-9, "dof {dof} x {x}: {ours} vs {reference}");
                assert!((chi_square_sf(x, dof) - (1.0 - reference)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn kolmogorov_tail_known_points() {
        // Critical values of the limiting distribution.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_sf(0.8276) - 0.5).abs() < 1e-3);
        // The two series agree where they meet.
        let pi2 = core::f64::consts::PI * core::f64::consts::PI;
        let lam: f64 = 1.18;
        let small: f64 = 1.0
            - sqrt(2.0 * core::f64::consts::PI) / lam
                * (1..=8).map(|j| exp(-((2 * j - 1) as f64).powi(2) * pi2 / (8.0 * lam * lam))).sum::<f64>();
        assert!((small - kolmogorov_sf(lam)).abs() < 1e-12);
    }

    #[test]
    fn ks_detects_shift() {
        let data: Vec<f64> = (1..=2000).map(|i| normal_quantile(i as f64 / 2001.0)).collect();
        let good = ks_one_sample(&data, normal_cdf);
        assert!(good.statistic < 0.001 && good.p_value > 0.99);
        let shifted: Vec<f64> = data.iter().map(|x| x + 0.3).collect();
        assert!(ks_one_sample(&shifted, normal_cdf).p_value < 1e-6);
        assert!(ks_two_sample(&data, &shifted).p_value < 1e-6);
        assert!(ks_two_sample(&data, &data).statistic == 0.0);
    }

    #[test]
    fn summary_statistics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(lag1_autocorrelation(&[3.0; 10]), 0.0);
        let alt: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(lag1_autocorrelation(&alt) < -0.95);
    }
}
