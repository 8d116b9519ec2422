use alloc::vec::Vec;

use super::{bm_suite, reflect_path, TestReport};
use crate::geometry::{Measure, Rect};
use crate::lattice::{build_flow, consistent_numbering, intersection_closure, Flow, Subsemilattice};
use crate::math::sqrt;
use crate::par;
use crate::processes::{sample_path, ProcessModel};
use crate::rng::{CounterRng, Domain};
use crate::timechange::{invert_clock, retime};
use crate::Result;

/// Names of the [`bm_suite`] checks, in report order.
pub const SUITE_CHECKS: [&str; 4] = ["mean", "variance", "normality", "lag1"];

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub lattices: usize,
    pub runs: usize,
    /// Retimed increments per run.
    pub increments: usize,
    /// Largest number of generating rectangles per lattice.
    pub max_sets: usize,
    /// Corners are drawn in `(0, side]²`.
    pub side: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Reflect each path about half the square root of its end clock
    /// before retiming.
    pub reflect: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            lattices: 50,
            runs: 200,
            increments: 10_000,
            max_sets: 12,
            side: 10.0,
            alpha: 0.01,
            seed: 0,
            reflect: false,
        }
    }
}

/// Intersection closure of between 1 and `max_sets` rectangles with
/// corners uniform in `(0, side]²`.
pub fn random_lattice(seed: u64, index: u64, max_sets: usize, side: f64) -> Result<Subsemilattice> {
    let mut rng = CounterRng::keyed(seed, Domain::Lattice, index, 0);
    let k = 1 + (rng.next_u64() % max_sets.max(1) as u64) as usize;
    let rects: Vec<Rect> = (0..k)
        .map(|_| Rect::from_coords(alloc::vec![side * rng.uniform(), side * rng.uniform()]))
        .collect::<Result<_>>()?;
    intersection_closure(&rects)
}

/// Rejection counts over all runs of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessSummary {
    pub model: ProcessModel,
    pub runs: usize,
    /// Per check in [`SUITE_CHECKS`] order.
    pub rejections: [usize; 4],
    /// Runs failing at least one check.
    pub failures: usize,
}

impl HarnessSummary {
    pub fn rate(&self, check: usize) -> f64 {
        self.rejections[check] as f64 / self.runs as f64
    }

    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.runs as f64
    }

    /// `α + 3√(α(1 − α)/runs)`.
    pub fn calibration_bound(&self, alpha: f64) -> f64 {
        alpha + 3.0 * sqrt(alpha * (1.0 - alpha) / self.runs as f64)
    }
}

/// Random lattices with their flows: sample a model along each flow, retime
/// by the inverted clock and run the Brownian suite.
pub struct LatticeHarness {
    config: HarnessConfig,
    flows: Vec<Flow>,
}

impl LatticeHarness {
    /// Builds one flow per lattice with mesh half the retiming step, so
    /// every retiming interval contains a flow point.
    pub fn new(config: HarnessConfig) -> Result<Self> {
        let leb = Measure::lebesgue(2);
        let flows: Vec<Result<Flow>> = par::map_indices(config.lattices, |i| {
            let lat = random_lattice(config.seed, i as u64, config.max_sets, config.side)?;
            let num = consistent_numbering(&lat, &leb)?;
            let total = crate::lattice::left_neighborhoods(&lat, &num, &leb)?.total;
            let mesh = 0.5 * total / config.increments as f64;
            build_flow(&lat, &num, &leb, mesh)
        });
        Ok(LatticeHarness { flows: flows.into_iter().collect::<Result<_>>()?, config })
    }

    pub fn config(&self) -> &HarnessConfig {
        &self.config
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    /// Run `run` uses lattice `run mod lattices` and replicate `run`.
    pub fn run(&self, model: &ProcessModel, run: usize) -> Result<TestReport> {
        let flow = &self.flows[run % self.flows.len()];
        let mut path = sample_path(model, flow, self.config.seed, run as u64)?;
        if self.config.reflect {
            path = reflect_path(&path, 0.5 * sqrt(flow.total_clock()));
        }
        let tc = invert_clock(&flow.clock())?;
        let step = flow.total_clock() / self.config.increments as f64;
        let series = retime(&path, &tc, step)?;
        bm_suite(&series, self.config.alpha)
    }

    /// One suite report per run, in run order.
    pub fn reports(&self, model: &ProcessModel) -> Result<Vec<TestReport>> {
        par::map_indices(self.config.runs, |r| self.run(model, r)).into_iter().collect()
    }

    pub fn summarize(&self, model: &ProcessModel) -> Result<HarnessSummary> {
        Ok(HarnessSummary::from_reports(model, &self.reports(model)?))
    }
}

impl HarnessSummary {
    pub fn from_reports(model: &ProcessModel, reports: &[TestReport]) -> Self {
        let mut summary = HarnessSummary { model: *model, runs: reports.len(), rejections: [0; 4], failures: 0 };
        for rep in reports {
            for (k, name) in SUITE_CHECKS.iter().enumerate() {
                if !rep.find(name).is_some_and(|c| c.passed()) {
                    summary.rejections[k] += 1;
                }
            }
            if !rep.passed() {
                summary.failures += 1;
            }
        }
        summary
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_lattices_are_closed_and_reproducible() {
        for i in 0..20 {
            let a = random_lattice(3, i, 12, 10.0).unwrap();
            assert!(a.is_intersection_closed());
            assert_eq!(a, random_lattice(3, i, 12, 10.0).unwrap());
        }
    }

    #[test]
    fn small_harness_runs() {
        let cfg = HarnessConfig { lattices: 4, runs: 8, increments: 1000, ..Default::default() };
        let h = LatticeHarness::new(cfg).unwrap();
        let s = h.summarize(&ProcessModel::Sibm).unwrap();
        assert!(s.failures <= 2, "{s:?}");
        let c = h.summarize(&ProcessModel::CommonFactor).unwrap();
        assert_eq!(c.failures, 8);
        let v = h.summarize(&ProcessModel::VarianceSkew).unwrap();
        assert_eq!(v.failures, 8);
    }
}
