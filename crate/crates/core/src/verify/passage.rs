use alloc::vec::Vec;

use super::MCEstimate;
use crate::geometry::Rect;
use crate::lattice::Flow;
use crate::math::{exp, sqrt};
use crate::par;
use crate::processes::{FieldGrid, FieldSample, PathSample, ProcessModel};
use crate::rng::{CounterRng, Domain};
use crate::stats::normal_sf;
use crate::{Error, Result};

/// How a path is watched for boundary crossings between flow points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Monitoring {
    /// Only the flow points themselves.
    Grid,
    /// Flow points plus a Brownian-bridge crossing draw for every step, so
    /// a crossing between points is detected with its exact probability.
    #[default]
    BrownianBridge,
}

/// `P[max_{θ ≤ σ} B_θ ≥ a] = 2 − 2Φ(a/√σ)`.
pub fn first_passage_probability(a: f64, sigma_end: f64) -> f64 {
    if a <= 0.0 {
        return 1.0;
    }
    2.0 * normal_sf(a / sqrt(sigma_end))
}

// Brownian motion along a flow, generated lazily with the same streams as
// `sample_path`, plus a bridge stream for crossings between points.
pub(super) struct Walker<'a> {
    theta: &'a [f64],
    path: CounterRng,
    bridge: CounterRng,
}

impl<'a> Walker<'a> {
    pub(super) fn new(flow: &'a Flow, seed: u64, replicate: u64) -> Self {
        Walker {
            theta: flow.theta(),
            path: CounterRng::keyed(seed, Domain::Path, replicate, 0),
            bridge: CounterRng::keyed(seed, Domain::Bridge, replicate, 0),
        }
    }

    pub(super) fn steps(&self) -> usize {
        self.theta.len() - 1
    }

    #[inline]
    pub(super) fn dtheta(&self, i: usize) -> f64 {
        self.theta[i + 1] - self.theta[i]
    }

    #[inline]
    pub(super) fn increment(&self, i: usize) -> f64 {
        ProcessModel::Sibm.draw(self.dtheta(i), &mut self.path.substream(i as u64), 0.0)
    }

    /// Whether the bridge from `y0` to `y1` over step `i` touches a level at
    /// distances `d0 = |level − y0|`, `d1 = |level − y1|` on the same side.
    #[inline]
    pub(super) fn bridge_touch(&self, i: usize, d0: f64, d1: f64, slot: u64) -> bool {
        let p = exp(-2.0 * d0 * d1 / self.dtheta(i));
        let mut u = self.bridge.substream(2 * i as u64 + slot);
        u.uniform() < p
    }
}

fn check_flow(flow: &Flow) -> Result<()> {
    if flow.steps() == 0 {
        return Err(Error::InvalidParameter("flow has no steps"));
    }
    Ok(())
}

/// Fraction of Brownian paths along `flow` whose running maximum reaches
/// `a`, against `2 − 2Φ(a/√σ_end)`.
pub fn mc_first_passage(flow: &Flow, a: f64, n: usize, seed: u64, monitoring: Monitoring) -> Result<MCEstimate> {
    check_flow(flow)?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter("level must be positive"));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let hit = par::map_indices(n, |r| {
        let w = Walker::new(flow, seed, r as u64);
        let mut y = 0.0;
        for i in 0..w.steps() {
            let next = y + w.increment(i);
            if next >= a {
                return true;
            }
            if monitoring == Monitoring::BrownianBridge && w.bridge_touch(i, a - y, a - next, 0) {
                return true;
            }
            y = next;
        }
        false
    });
    let hits = hit.iter().filter(|&&h| h).count();
    Ok(MCEstimate::proportion(hits, n, first_passage_probability(a, flow.total_clock())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitEstimate {
    /// Fraction of all replicates leaving through `b`.
    pub estimate: MCEstimate,
    /// Replicates still inside `(a, b)` at the end of the flow.
    pub censored: usize,
}

impl ExitEstimate {
    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.estimate.n as f64
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Exit {
    Upper,
    Lower,
    Censored,
}

/// Fraction of Brownian paths along `flow` that leave `(a, b)` through `b`,
/// against `|a|/(b + |a|)`.
pub fn mc_exit(flow: &Flow, a: f64, b: f64, n: usize, seed: u64, monitoring: Monitoring) -> Result<ExitEstimate> {
    check_flow(flow)?;
    if !(a < 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter("exit band needs a < 0 < b"));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let outcomes = par::map_indices(n, |r| {
        let w = Walker::new(flow, seed, r as u64);
        let mut y = 0.0;
        for i in 0..w.steps() {
            let next = y + w.increment(i);
            if next >= b {
                return Exit::Upper;
            }
            if next <= a {
                return Exit::Lower;
            }
            if monitoring == Monitoring::BrownianBridge {
                if w.bridge_touch(i, b - y, b - next, 0) {
                    return Exit::Upper;
                }
                if w.bridge_touch(i, y - a, next - a, 1) {
                    return Exit::Lower;
                }
            }
            y = next;
        }
        Exit::Censored
    });
    let upper = outcomes.iter().filter(|&&o| o == Exit::Upper).count();
    let censored = outcomes.iter().filter(|&&o| o == Exit::Censored).count();
    let theory = -a / (b - a);
    Ok(ExitEstimate { estimate: MCEstimate::proportion(upper, n, theory), censored })
}

/// Reflects the path about `a` from its first point at or above `a`.
pub fn reflect_path(path: &PathSample, a: f64) -> PathSample {
    match path.cumulative().iter().position(|&y| y >= a) {
        Some(k) => reflect_at(path, k, a),
        None => path.clone(),
    }
}

/// `Y` before index `k`, `2a − Y` from `k` on.
pub fn reflect_at(path: &PathSample, k: usize, a: f64) -> PathSample {
    let values: Vec<f64> =
        path.cumulative().iter().enumerate().map(|(i, &y)| if i < k { y } else { 2.0 * a - y }).collect();
    PathSample::from_cumulative(path.alphas().to_vec(), path.theta().to_vec(), values)
        .expect("reflection keeps the sample shape")
}

/// First-passage map over the grid corners below a rectangle: corner
/// `(i, j)` has passed when some rectangle `[0, (i', j')]` with
/// `(i', j') ≤ (i, j)` carries a value of at least the level.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    level: f64,
    width: usize,
    height: usize,
    passed: Vec<bool>,
}

impl Frontier {
    pub fn compute(field: &FieldSample, rect: &Rect, a: f64) -> Result<Frontier> {
        let (px, py) = field.grid().snap_corner(rect.corner())?;
        let (width, height) = (px + 1, py + 1);
        let mut best = alloc::vec![f64::NEG_INFINITY; width * height];
        for j in 0..height {
            for i in 0..width {
                let mut m = field.prefix(i, j).to_f64();
                if i > 0 {
                    m = m.max(best[j * width + i - 1]);
                }
                if j > 0 {
                    m = m.max(best[(j - 1) * width + i]);
                }
                best[j * width + i] = m;
            }
        }
        let passed = best.iter().map(|&m| m >= a).collect();
        Ok(Frontier { level: a, width, height, passed })
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// Grid corners per axis, `(px + 1, py + 1)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn passed_at(&self, i: usize, j: usize) -> bool {
        self.passed[j * self.width + i]
    }

    /// Whether the level was reached anywhere below the rectangle.
    pub fn reached(&self) -> bool {
        self.passed[self.passed.len() - 1]
    }

    /// Passing is inherited by every dominating corner.
    pub fn is_monotone(&self) -> bool {
        (0..self.height).all(|j| {
            (0..self.width).all(|i| {
                !self.passed_at(i, j)
                    || ((i + 1 == self.width || self.passed_at(i + 1, j))
                        && (j + 1 == self.height || self.passed_at(i, j + 1)))
            })
        })
    }
}

/// Fraction of field replicates in which some rectangle inside `rect`
/// reaches `a`, beside the along-path formula `2 − 2Φ(a/√σ)`. Exploratory:
/// the sheet supremum is not expected to follow the one-parameter law.
pub fn frontier_sup(
    model: &ProcessModel,
    grid: &FieldGrid,
    rect: &Rect,
    a: f64,
    replicates: usize,
    seed: u64,
) -> Result<MCEstimate> {
    if replicates == 0 {
        return Err(Error::EmptyInput);
    }
    let (px, py) = grid.snap_corner(rect.corner())?;
    let sigma = grid.staircase_measure(&[(px, py)]);
    let reached: Vec<Result<bool>> = par::map_indices(replicates, |r| {
        let field = FieldSample::generate(model, grid, seed, r as u64)?;
        Ok(Frontier::compute(&field, rect, a)?.reached())
    });
    let mut hits = 0;
    for r in reached {
        hits += r? as usize;
    }
    Ok(MCEstimate::proportion(hits, replicates, first_passage_probability(a, sigma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Measure;
    use crate::processes::{sample_bm_path, sample_field, sample_path};

    fn flow(total: f64, steps: usize) -> Flow {
        Flow::uniform_diagonal(&Measure::lebesgue(2), total, steps).unwrap()
    }

    #[test]
    fn walker_matches_sample_path() {
        let f = flow(1.0, 50);
        let p = sample_path(&ProcessModel::Sibm, &f, 8, 3).unwrap();
        let w = Walker::new(&f, 8, 3);
        for i in 0..50 {
            assert_eq!(w.increment(i), p.increments()[i]);
        }
    }

    #[test]
    fn small_level_is_almost_sure() {
        let e = mc_first_passage(&flow(1.0, 100), 1e-6, 2000, 1, Monitoring::BrownianBridge).unwrap();
        assert!(e.estimate > 0.999);
        assert!((e.theory - 1.0).abs() < 1e-5);
    }

    #[test]
    fn first_passage_theory_scales() {
        assert!((first_passage_probability(1.0, 1.0) - first_passage_probability(2.0, 4.0)).abs() < 1e-15);
        assert!((first_passage_probability(1.0, 1.0) - 0.317_310_507_862_914).abs() < 1e-12);
    }

    #[test]
    fn first_passage_estimate() {
        let e = mc_first_passage(&flow(1.0, 200), 1.0, 20_000, 2, Monitoring::BrownianBridge).unwrap();
        assert!(e.z.abs() < 4.0, "{e:?}");
    }

    #[test]
    fn grid_monitoring_undercounts() {
        let f = flow(1.0, 20);
        let g = mc_first_passage(&f, 1.0, 20_000, 2, Monitoring::Grid).unwrap();
        let b = mc_first_passage(&f, 1.0, 20_000, 2, Monitoring::BrownianBridge).unwrap();
        assert!(g.estimate < b.estimate);
    }

    #[test]
    fn symmetric_exit() {
        let e = mc_exit(&flow(20.0, 400), -1.0, 1.0, 20_000, 3, Monitoring::BrownianBridge).unwrap();
        assert_eq!(e.estimate.theory, 0.5);
        assert!(e.estimate.z.abs() < 4.0, "{e:?}");
        assert_eq!(e.censored, 0);
    }

    #[test]
    fn exit_rejects_bad_band() {
        assert!(mc_exit(&flow(1.0, 10), 1.0, 2.0, 10, 0, Monitoring::Grid).is_err());
    }

    #[test]
    fn reflection_cases() {
        let p = sample_bm_path(&flow(1.0, 100), 4);
        assert_eq!(reflect_path(&p, 1e9), p);
        let neg = reflect_path(&p, 0.0);
        for (a, b) in p.cumulative().iter().zip(neg.cumulative()) {
            assert_eq!(*b, -*a);
        }
        let k = 40;
        let twice = reflect_at(&reflect_at(&p, k, 0.3), k, 0.3);
        for (a, b) in p.cumulative().iter().zip(twice.cumulative()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn frontier_is_monotone_and_trivial_levels() {
        let field = sample_field(&ProcessModel::Sibm, 32, 1.0, &Measure::lebesgue(2), 5).unwrap();
        let r = Rect::from_coords(alloc::vec![1.0, 1.0]).unwrap();
        for &a in &[-1.0, 0.0, 0.3, 1.0, 1e9] {
            let fr = Frontier::compute(&field, &r, a).unwrap();
            assert!(fr.is_monotone());
        }
        assert!(Frontier::compute(&field, &r, 0.0).unwrap().reached());
        assert!(!Frontier::compute(&field, &r, 1e9).unwrap().reached());
    }
}
