//! Clock inversion `π = θ⁻¹` and retiming of projected paths onto a uniform
//! clock grid.

use alloc::vec::Vec;

use crate::processes::PathSample;
use crate::{Error, Result};

/// A strictly increasing piecewise-linear map from clock values `θ` back to
/// flow parameters `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChange {
    theta: Vec<f64>,
    alpha: Vec<f64>,
}

impl TimeChange {
    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.theta.iter().copied().zip(self.alpha.iter().copied())
    }

    pub fn theta_min(&self) -> f64 {
        self.theta[0]
    }

    pub fn theta_max(&self) -> f64 {
        self.theta[self.theta.len() - 1]
    }

    /// Index of the last knot with `θ_i ≤ theta`.
    pub fn segment(&self, theta: f64) -> Result<usize> {
        self.check_range(theta)?;
        Ok(self.theta.partition_point(|&t| t <= theta) - 1)
    }

    /// `π(theta)`.
    pub fn eval(&self, theta: f64) -> Result<f64> {
        let i = self.segment(theta)?;
        if i + 1 == self.theta.len() {
            return Ok(self.alpha[i]);
        }
        let w = (theta - self.theta[i]) / (self.theta[i + 1] - self.theta[i]);
        Ok(self.alpha[i] + w * (self.alpha[i + 1] - self.alpha[i]))
    }

    /// The clock itself, `θ(alpha)`, interpolated the same way.
    pub fn clock_at(&self, alpha: f64) -> Result<f64> {
        let (lo, hi) = (self.alpha[0], self.alpha[self.alpha.len() - 1]);
        if !(alpha >= lo && alpha <= hi) {
            return Err(Error::OutOfRange { value: alpha, min: lo, max: hi });
        }
        let i = self.alpha.partition_point(|&a| a <= alpha) - 1;
        if i + 1 == self.alpha.len() {
            return Ok(self.theta[i]);
        }
        let w = (alpha - self.alpha[i]) / (self.alpha[i + 1] - self.alpha[i]);
        Ok(self.theta[i] + w * (self.theta[i + 1] - self.theta[i]))
    }

    fn check_range(&self, theta: f64) -> Result<()> {
        if !(theta >= self.theta_min() && theta <= self.theta_max()) {
            return Err(Error::OutOfRange { value: theta, min: self.theta_min(), max: self.theta_max() });
        }
        Ok(())
    }
}

/// Inverts a clock given as `(α, θ(α))` pairs.
pub fn invert_clock(clock: &[(f64, f64)]) -> Result<TimeChange> {
    if clock.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (i, w) in clock.windows(2).enumerate() {
        if !(w[1].1 > w[0].1) || !(w[1].0 > w[0].0) {
            return Err(Error::NonMonotoneClock(i + 1));
        }
    }
    Ok(TimeChange { theta: clock.iter().map(|c| c.1).collect(), alpha: clock.iter().map(|c| c.0).collect() })
}

/// Reads `path` on the uniform clock grid `θ_0 + k·step`.
///
/// Each grid value picks the last path point whose clock does not exceed
/// it; values are looked up, never interpolated. The result is indexed by
/// the uniform grid and records the clock of each picked point, so its
/// clock differences are the exact variances of its increments.
pub fn retime(path: &PathSample, tc: &TimeChange, step: f64) -> Result<PathSample> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter("retiming step must be positive"));
    }
    let theta = path.theta();
    let (t0, t1) = (theta[0], theta[theta.len() - 1]);
    let slack = 1e-9 * t1.abs().max(1.0);
    if (tc.theta_min() - t0).abs() > slack || (tc.theta_max() - t1).abs() > slack {
        return Err(Error::OutOfRange { value: t1, min: tc.theta_min(), max: tc.theta_max() });
    }
    let range = t1 - t0;
    if step > range + slack {
        return Err(Error::StepTooLarge { step, range });
    }
    let k_max = libm::floor(range / step + 1e-9) as usize;
    let mut grid = Vec::with_capacity(k_max + 1);
    let mut picked_theta = Vec::with_capacity(k_max + 1);
    let mut picks: Vec<usize> = Vec::with_capacity(k_max + 1);
    let mut last: Option<usize> = None;
    for k in 0..=k_max {
        let g = (t0 + k as f64 * step).min(t1);
        let i = if k == 0 { 0 } else { theta.partition_point(|&t| t <= g + slack * 1e-3) - 1 };
        if last == Some(i) {
            return Err(Error::ResolutionTooCoarse(step));
        }
        last = Some(i);
        grid.push(g);
        picked_theta.push(theta[i]);
        picks.push(i);
    }
    let increments = picks.windows(2).map(|w| path.increments()[w[0]..w[1]].iter().sum()).collect();
    PathSample::from_increments(grid, picked_theta, increments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn square_clock_inverts_to_root() {
        let clock: Vec<(f64, f64)> = (0..=100).map(|i| i as f64 / 100.0).map(|t| (t, t * t)).collect();
        let tc = invert_clock(&clock).unwrap();
        for &(a, th) in &clock {
            assert!((tc.eval(th).unwrap() - a).abs() < 1e-12);
            assert!((tc.clock_at(tc.eval(th).unwrap()).unwrap() - th).abs() < 1e-9);
        }
        assert!((tc.eval(0.25).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_clock() {
        let clock: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64, i as f64)).collect();
        let tc = invert_clock(&clock).unwrap();
        assert_eq!(tc.eval(3.5).unwrap(), 3.5);
    }

    #[test]
    fn flat_clock_rejected() {
        assert_eq!(invert_clock(&[(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)]).unwrap_err(), Error::NonMonotoneClock(2));
    }

    #[test]
    fn out_of_range_query() {
        let tc = invert_clock(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(matches!(tc.eval(1.5), Err(Error::OutOfRange { .. })));
    }

    fn path_on(theta: Vec<f64>) -> PathSample {
        let alphas: Vec<f64> = (0..theta.len()).map(|i| i as f64).collect();
        let cumulative: Vec<f64> = (0..theta.len()).map(|i| (i * i) as f64).collect();
        PathSample::from_cumulative(alphas, theta, cumulative).unwrap()
    }

    #[test]
    fn identity_retime_keeps_grid_values() {
        let p = path_on((0..=10).map(|i| i as f64).collect());
        let clock: Vec<(f64, f64)> = p.alphas().iter().copied().zip(p.theta().iter().copied()).collect();
        let tc = invert_clock(&clock).unwrap();
        let r = retime(&p, &tc, 1.0).unwrap();
        assert_eq!(r.cumulative(), p.cumulative());
        let r2 = retime(&p, &tc, 2.0).unwrap();
        assert_eq!(r2.cumulative(), &[0.0, 4.0, 16.0, 36.0, 64.0, 100.0]);
    }

    #[test]
    fn full_range_step_gives_one_increment() {
        let p = path_on((0..=10).map(|i| i as f64 * 0.1).collect());
        let clock: Vec<(f64, f64)> = p.alphas().iter().copied().zip(p.theta().iter().copied()).collect();
        let tc = invert_clock(&clock).unwrap();
        let r = retime(&p, &tc, 1.0).unwrap();
        assert_eq!(r.steps(), 1);
        assert_eq!(r.cumulative(), &[0.0, 100.0]);
        assert!(matches!(retime(&p, &tc, 2.0), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn too_fine_step_is_reported() {
        let p = path_on(vec![0.0, 1.0, 2.0]);
        let tc = invert_clock(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert_eq!(retime(&p, &tc, 0.5).unwrap_err(), Error::ResolutionTooCoarse(0.5));
    }

    #[test]
    fn retimed_grid_is_increasing_and_records_clock() {
        let theta: Vec<f64> = (0..=1000).map(|i| (i as f64 / 1000.0).powi(2)).collect();
        let p = path_on(theta);
        let clock: Vec<(f64, f64)> = p.alphas().iter().copied().zip(p.theta().iter().copied()).collect();
        let tc = invert_clock(&clock).unwrap();
        let r = retime(&p, &tc, 0.05).unwrap();
        assert_eq!(r.steps(), 20);
        for (g, t) in r.alphas().iter().zip(r.theta()) {
            assert!(t <= &(g + 1e-12) && g - t < 0.002 + 1e-12);
        }
        assert!(r.alphas().windows(2).all(|w| w[1] > w[0]));
    }
}
