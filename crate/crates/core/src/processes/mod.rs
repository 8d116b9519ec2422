//! Samplers for set-indexed processes.
//!
//! Path mode draws the increments along a [`Flow`] directly, one per flow
//! step, and is exact in distribution. Field mode draws one value per cell
//! of a regular grid and evaluates sets by summing cells, which makes
//! additivity exact at the price of snapping sets to grid lines.

mod field;

use alloc::vec::Vec;

use crate::lattice::Flow;
use crate::math::sqrt;
use crate::par;
use crate::rng::{CounterRng, Domain};
use crate::{Error, Result};

pub use field::{
    evaluate_increment, evaluate_set, project_path, sample_field, FieldGrid, FieldSample, FieldValue, MAX_EXCLUSIONS,
};

/// Law of the values assigned to disjoint increment sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessModel {
    /// Independent `N(0, σ(C))`.
    Sibm,
    /// Independent `Poisson(λσ(C)) − λσ(C)`.
    CenteredPoisson { lambda: f64 },
    /// `Z·σ(C)` with one standard normal `Z` per sample; increments are
    /// perfectly dependent.
    CommonFactor,
    /// Independent `N(0, σ(C)²)`; the law depends on more than `σ(C)`
    /// once cells are aggregated.
    VarianceSkew,
}

impl ProcessModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessModel::CenteredPoisson { lambda } if !(lambda > 0.0) || !lambda.is_finite() => {
                Err(Error::InvalidModel("Poisson rate must be positive and finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProcessModel::Sibm => "sibm",
            ProcessModel::CenteredPoisson { .. } => "poisson",
            ProcessModel::CommonFactor => "common-factor",
            ProcessModel::VarianceSkew => "variance-skew",
        }
    }

    /// Variance of the value on a set of measure `m`, for models where it
    /// is a function of `m` alone.
    pub fn variance(&self, m: f64) -> f64 {
        match *self {
            ProcessModel::Sibm => m,
            ProcessModel::CenteredPoisson { lambda } => lambda * m,
            ProcessModel::CommonFactor => m * m,
            ProcessModel::VarianceSkew => m * m,
        }
    }

    /// Value on a single cell of measure `m`. `common` is the shared factor
    /// used only by [`ProcessModel::CommonFactor`].
    #[inline]
    pub(crate) fn draw(&self, m: f64, rng: &mut CounterRng, common: f64) -> f64 {
        match *self {
            ProcessModel::Sibm => sqrt(m) * rng.normal(),
            ProcessModel::CenteredPoisson { lambda } => {
                let mean = lambda * m;
                rng.poisson(mean) as f64 - mean
            }
            ProcessModel::CommonFactor => common * m,
            ProcessModel::VarianceSkew => m * rng.normal(),
        }
    }

    pub(crate) fn common_factor(&self, seed: u64, replicate: u64) -> f64 {
        match self {
            ProcessModel::CommonFactor => CounterRng::keyed(seed, Domain::Common, replicate, 0).normal(),
            _ => 0.0,
        }
    }
}

/// Values of a process along a flow: `Y_α = X_{A_α}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    alphas: Vec<f64>,
    theta: Vec<f64>,
    increments: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PathSample {
    /// Builds a sample from running values; `cumulative[0]` is the value at
    /// the start of the flow.
    pub fn from_cumulative(alphas: Vec<f64>, theta: Vec<f64>, cumulative: Vec<f64>) -> Result<Self> {
        if cumulative.is_empty() {
            return Err(Error::EmptyInput);
        }
        if alphas.len() != cumulative.len() || theta.len() != cumulative.len() {
            return Err(Error::InvalidParameter("alpha, theta and values must have equal length"));
        }
        let increments = cumulative.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(PathSample { alphas, theta, increments, cumulative })
    }

    /// Builds a sample from increments, starting at zero.
    pub fn from_increments(alphas: Vec<f64>, theta: Vec<f64>, increments: Vec<f64>) -> Result<Self> {
        if alphas.len() != increments.len() + 1 || theta.len() != alphas.len() {
            return Err(Error::InvalidParameter("need one more grid point than increments"));
        }
        let mut cumulative = Vec::with_capacity(alphas.len());
        let mut acc = 0.0;
        cumulative.push(acc);
        for d in &increments {
            acc += d;
            cumulative.push(acc);
        }
        Ok(PathSample { alphas, theta, increments, cumulative })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Number of increments.
    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// Clock differences `Δθ_i`, one per increment.
    pub fn theta_steps(&self) -> Vec<f64> {
        self.theta.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Increments divided by the square root of their clock differences.
    /// Steps with zero clock difference are skipped.
    pub fn standardized(&self) -> Vec<f64> {
        self.increments
            .iter()
            .zip(self.theta.windows(2))
            .filter(|(_, w)| w[1] > w[0])
            .map(|(d, w)| d / sqrt(w[1] - w[0]))
            .collect()
    }
}

/// Draws one replicate of `model` along `flow`, one independent value per
/// flow step with the step's clock difference as its measure.
pub fn sample_path(model: &ProcessModel, flow: &Flow, seed: u64, replicate: u64) -> Result<PathSample> {
    model.validate()?;
    let common = model.common_factor(seed, replicate);
    let base = CounterRng::keyed(seed, Domain::Path, replicate, 0);
    let increments = flow
        .theta()
        .windows(2)
        .enumerate()
        .map(|(i, w)| model.draw(w[1] - w[0], &mut base.substream(i as u64), common))
        .collect();
    PathSample::from_increments(flow.alphas().to_vec(), flow.theta().to_vec(), increments)
}

/// Set-indexed Brownian motion along `flow`.
pub fn sample_bm_path(flow: &Flow, seed: u64) -> PathSample {
    sample_path(&ProcessModel::Sibm, flow, seed, 0).expect("a valid flow always yields a path")
}

/// `replicates` independent paths, replicate `r` keyed by `r`.
pub fn sample_paths(model: &ProcessModel, flow: &Flow, seed: u64, replicates: usize) -> Result<Vec<PathSample>> {
    model.validate()?;
    par::map_indices(replicates, |r| sample_path(model, flow, seed, r as u64)).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Measure;
    use crate::stats::{mean, variance};
    use alloc::vec;

    fn unit_flow(steps: usize) -> Flow {
        Flow::uniform_diagonal(&Measure::lebesgue(2), steps as f64 * 0.01, steps).unwrap()
    }

    #[test]
    fn single_step_variance() {
        let flow = unit_flow(1);
        let n = 100_000;
        let xs: Vec<f64> =
            (0..n).map(|r| sample_path(&ProcessModel::Sibm, &flow, 3, r).unwrap().increments()[0]).collect();
        let tol = 3.0 * sqrt(2.0 / n as f64) * 0.01;
        assert!((variance(&xs) - 0.01).abs() < tol, "{}", variance(&xs));
        assert!(mean(&xs).abs() < 5.0 * sqrt(0.01 / n as f64));
    }

    #[test]
    fn zero_length_flow_gives_empty_sample() {
        let flow =
            Flow::from_sets(vec![0.0], vec![crate::geometry::UnionSet::empty_prime(2)], &Measure::lebesgue(2)).unwrap();
        let p = sample_bm_path(&flow, 1);
        assert!(p.is_empty());
        assert_eq!(p.cumulative(), &[0.0]);
    }

    #[test]
    fn same_seed_same_path() {
        let flow = unit_flow(50);
        assert_eq!(sample_bm_path(&flow, 11), sample_bm_path(&flow, 11));
        assert_ne!(sample_bm_path(&flow, 11), sample_bm_path(&flow, 12));
    }

    #[test]
    fn cumulative_is_prefix_sum() {
        let p = sample_bm_path(&unit_flow(20), 5);
        let mut acc = 0.0;
        assert_eq!(p.cumulative()[0], 0.0);
        for (d, c) in p.increments().iter().zip(&p.cumulative()[1..]) {
            acc += d;
            assert_eq!(acc, *c);
        }
    }

    #[test]
    fn common_factor_increments_are_proportional() {
        let p = sample_path(&ProcessModel::CommonFactor, &unit_flow(10), 7, 0).unwrap();
        let r = p.increments()[0] / 0.01;
        for d in p.increments() {
            assert!((d / 0.01 - r).abs() < 1e-9);
        }
    }

    #[test]
    fn poisson_path_moments() {
        let flow = unit_flow(4);
        let model = ProcessModel::CenteredPoisson { lambda: 50.0 };
        let n = 50_000;
        let xs: Vec<f64> =
            (0..n).map(|r| *sample_path(&model, &flow, 2, r).unwrap().cumulative().last().unwrap()).collect();
        // total measure 0.04, variance λ·0.04 = 2
        assert!(mean(&xs).abs() < 5.0 * sqrt(2.0 / n as f64));
        assert!((variance(&xs) - 2.0).abs() < 0.1);
    }

    #[test]
    fn invalid_poisson_rate() {
        let m = ProcessModel::CenteredPoisson { lambda: 0.0 };
        assert!(matches!(sample_path(&m, &unit_flow(2), 0, 0), Err(Error::InvalidModel(_))));
    }
}
