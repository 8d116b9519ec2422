//! Statistical checks of the distributional identities of set-indexed
//! Brownian motion: a Brownian test suite for retimed paths, realized
//! quadratic variation, hitting and exit probabilities, sequence
//! independence of the variation, stationarity of increments and
//! large-domain diagnostics.

mod diagnostics;
mod field_checks;
mod harness;
mod passage;

use alloc::string::String;
use alloc::vec::Vec;

use crate::math::sqrt;
use crate::processes::PathSample;
use crate::stats::{
    chi_square_cdf, chi_square_sf, ks_one_sample, lag1_autocorrelation, mean, normal_cdf, normal_two_sided_p,
};
use crate::{Error, Result};

pub use diagnostics::{asymptotic_diagnostics, DiagnosticsConfig, DiagnosticsReport, LevelSummary};
pub use field_checks::{siv_check, stationarity_check, SivReport, StationarityConfig};
pub use harness::{random_lattice, HarnessConfig, HarnessSummary, LatticeHarness, SUITE_CHECKS};
pub use passage::{
    first_passage_probability, frontier_sup, mc_exit, mc_first_passage, reflect_at, reflect_path, ExitEstimate,
    Frontier, Monitoring,
};

/// Minimum number of increments accepted by [`bm_suite`].
pub const MIN_SUITE_INCREMENTS: usize = 1000;

/// How a statistic is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub rule: Rule,
}

impl Check {
    pub fn new(name: &str, statistic: f64, rule: Rule, threshold: f64) -> Self {
        Check { name: name.into(), statistic, threshold, rule }
    }

    pub fn passed(&self) -> bool {
        match self.rule {
            Rule::AtMost => self.statistic <= self.threshold,
            Rule::AtLeast => self.statistic >= self.threshold,
        }
    }
}

/// Named checks plus report-only values. The verdict is the conjunction of
/// the checks.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub values: Vec<(String, f64)>,
}

impl TestReport {
    pub fn new(name: &str) -> Self {
        TestReport { name: name.into(), checks: Vec::new(), values: Vec::new() }
    }

    pub fn check(&mut self, c: Check) -> &mut Self {
        self.checks.push(c);
        self
    }

    pub fn value(&mut self, name: &str, v: f64) -> &mut Self {
        self.values.push((name.into(), v));
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

/// A Monte Carlo proportion against its theoretical value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub theory: f64,
    pub z: f64,
    pub n: usize,
    pub hits: usize,
}

impl MCEstimate {
    /// Proportion `hits / n`. The standard error uses `(hits + ½)/(n + 1)`
    /// so it stays positive when every or no replicate hits.
    pub fn proportion(hits: usize, n: usize, theory: f64) -> Self {
        let estimate = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        let p = (hits as f64 + 0.5) / (n as f64 + 1.0);
        let stderr = sqrt(p * (1.0 - p) / n.max(1) as f64);
        MCEstimate { estimate, stderr, theory, z: (estimate - theory) / stderr, n, hits }
    }

    /// Mean of `xs` with the sample standard error.
    pub fn mean_of(xs: &[f64], theory: f64) -> Self {
        let n = xs.len();
        let m = mean(xs);
        let stderr = if n > 1 { sqrt(crate::stats::variance(xs) / n as f64) } else { 0.0 };
        let z = if stderr > 0.0 {
            (m - theory) / stderr
        } else if m == theory {
            0.0
        } else {
            f64::INFINITY
        };
        MCEstimate { estimate: m, stderr, theory, z, n, hits: 0 }
    }

    pub fn abs_error(&self) -> f64 {
        (self.estimate - self.theory).abs()
    }
}

/// Brownian test suite on a retimed series.
///
/// Increments are standardized by the square roots of their recorded clock
/// differences and tested for zero mean (t-test), unit variance (sum of
/// squares against χ²_N, two-sided), normality (Kolmogorov-Smirnov) and
/// lag-1 correlation (`|r| ≤ 3/√N`). Each of the first three sub-tests is
/// run at level `alpha`.
pub fn bm_suite(series: &PathSample, alpha: f64) -> Result<TestReport> {
    let z = series.standardized();
    let n = z.len();
    if n < MIN_SUITE_INCREMENTS {
        return Err(Error::TooFewIncrements { needed: MIN_SUITE_INCREMENTS, got: n });
    }
    let nf = n as f64;
    let m = mean(&z);
    let sd = sqrt(crate::stats::variance(&z));
    let t = if sd > 0.0 {
        m / (sd / sqrt(nf))
    } else if m == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let p_mean = normal_two_sided_p(t);

    let ss: f64 = z.iter().map(|x| x * x).sum();
    let p_var = (2.0 * chi_square_cdf(ss, nf).min(chi_square_sf(ss, nf))).min(1.0);

    let ks = ks_one_sample(&z, normal_cdf);
    let r1 = lag1_autocorrelation(&z);
    let bound = 3.0 / sqrt(nf);

    let mut rep = TestReport::new("bm");
    rep.check(Check::new("mean", p_mean, Rule::AtLeast, alpha))
        .check(Check::new("variance", p_var, Rule::AtLeast, alpha))
        .check(Check::new("normality", ks.p_value, Rule::AtLeast, alpha))
        .check(Check::new("lag1", r1.abs(), Rule::AtMost, bound));
    rep.value("n", nf)
        .value("t", t)
        .value("variance_ratio", ss / nf)
        .value("ks_statistic", ks.statistic)
        .value("lag1", r1);
    Ok(rep)
}

/// Realized quadratic variation `Σ (ΔY)²`.
pub fn qv_realized(path: &PathSample) -> Result<f64> {
    if path.steps() < 2 {
        return Err(Error::TooFewIncrements { needed: 2, got: path.steps() });
    }
    Ok(path.increments().iter().map(|d| d * d).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Measure;
    use crate::lattice::Flow;
    use crate::processes::{sample_path, ProcessModel};
    use alloc::vec;

    fn flow(total: f64, steps: usize) -> Flow {
        Flow::uniform_diagonal(&Measure::lebesgue(2), total, steps).unwrap()
    }

    #[test]
    fn sibm_passes_suite_mostly() {
        let f = flow(10.0, 2000);
        let fails = (0..50)
            .filter(|&r| !bm_suite(&sample_path(&ProcessModel::Sibm, &f, 1, r).unwrap(), 0.01).unwrap().passed())
            .count();
        assert!(fails <= 5, "{fails}");
    }

    #[test]
    fn zero_process_fails_variance() {
        let alphas: Vec<f64> = (0..=1500).map(|i| i as f64).collect();
        let p = PathSample::from_increments(alphas.clone(), alphas, vec![0.0; 1500]).unwrap();
        let rep = bm_suite(&p, 0.01).unwrap();
        assert!(!rep.find("variance").unwrap().passed());
        assert!(!rep.passed());
    }

    #[test]
    fn common_factor_fails() {
        let f = flow(10.0, 2000);
        for r in 0..20 {
            let p = sample_path(&ProcessModel::CommonFactor, &f, 2, r).unwrap();
            assert!(!bm_suite(&p, 0.01).unwrap().passed());
        }
    }

    #[test]
    fn suite_needs_enough_increments() {
        let p = sample_path(&ProcessModel::Sibm, &flow(1.0, 10), 0, 0).unwrap();
        assert_eq!(bm_suite(&p, 0.01).unwrap_err(), Error::TooFewIncrements { needed: 1000, got: 10 });
    }

    #[test]
    fn qv_of_zero_path_is_zero() {
        let alphas: Vec<f64> = (0..=4).map(|i| i as f64).collect();
        let p = PathSample::from_increments(alphas.clone(), alphas, vec![0.0; 4]).unwrap();
        assert_eq!(qv_realized(&p).unwrap(), 0.0);
    }

    #[test]
    fn qv_concentrates_at_end_clock() {
        let f = flow(1.0, 1000);
        let inside = (0..200)
            .filter(|&r| {
                (qv_realized(&sample_path(&ProcessModel::Sibm, &f, 3, r).unwrap()).unwrap() - 1.0).abs() <= 0.15
            })
            .count();
        assert!(inside >= 198);
    }

    #[test]
    fn poisson_qv_mean_is_rate_times_clock() {
        let f = flow(1.0, 200);
        let m = ProcessModel::CenteredPoisson { lambda: 2.0 };
        let qs: Vec<f64> = (0..4000).map(|r| qv_realized(&sample_path(&m, &f, 4, r).unwrap()).unwrap()).collect();
        let est = MCEstimate::mean_of(&qs, 2.0);
        assert!(est.z.abs() < 4.0, "{est:?}");
    }

    #[test]
    fn proportion_stderr_is_positive() {
        let e = MCEstimate::proportion(0, 100, 0.0);
        assert!(e.stderr > 0.0 && e.z.is_finite());
        let e = MCEstimate::proportion(100, 100, 1.0);
        assert!(e.stderr > 0.0 && e.z == 0.0);
    }
}
