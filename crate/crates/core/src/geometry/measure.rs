use alloc::vec::Vec;

use super::{Corner, Rect, UnionSet};
use crate::math::{expm1, ln1p, sqrt};
use crate::{Error, Result};

/// Largest corner count handled by inclusion-exclusion in dimension three
/// and above.
pub const INCLUSION_EXCLUSION_CAP: usize = 20;

/// A strictly positive density on one axis, handled through its
/// cumulative function `F(t) = ∫₀ᵗ w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisDensity {
    /// `w(t) = rate`.
    Uniform { rate: f64 },
    /// `w(t) = intercept + slope·t`, with `intercept > 0` and `slope ≥ 0`.
    Affine { intercept: f64, slope: f64 },
    /// `w(t) = exp(rate·t)`.
    Exponential { rate: f64 },
}

impl AxisDensity {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            AxisDensity::Uniform { rate } => rate.is_finite() && rate > 0.0,
            AxisDensity::Affine { intercept, slope } => {
                intercept.is_finite() && intercept > 0.0 && slope.is_finite() && slope >= 0.0
            }
            AxisDensity::Exponential { rate } => rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMeasure("axis density must be finite and strictly positive"))
        }
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        match *self {
            AxisDensity::Uniform { rate } => rate * t,
            AxisDensity::Affine { intercept, slope } => intercept * t + 0.5 * slope * t * t,
            AxisDensity::Exponential { rate } => {
                if rate == 0.0 {
                    t
                } else {
                    expm1(rate * t) / rate
                }
            }
        }
    }

    /// Inverse of [`cumulative`](Self::cumulative) on `v ≥ 0`.
    pub fn inverse_cumulative(&self, v: f64) -> f64 {
        match *self {
            AxisDensity::Uniform { rate } => v / rate,
            AxisDensity::Affine { intercept, slope } => {
                if slope == 0.0 {
                    v / intercept
                } else {
                    // Stable root of slope/2·t² + intercept·t − v = 0.
                    2.0 * v / (intercept + sqrt(intercept * intercept + 2.0 * slope * v))
                }
            }
            AxisDensity::Exponential { rate } => {
                if rate == 0.0 {
                    v
                } else {
                    ln1p(rate * v) / rate
                }
            }
        }
    }
}

/// A strictly monotone product measure on the positive orthant.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Lebesgue { dim: usize },
    Separable(Vec<AxisDensity>),
}

impl Measure {
    pub fn lebesgue(dim: usize) -> Self {
        Measure::Lebesgue { dim }
    }

    pub fn separable(axes: Vec<AxisDensity>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::ZeroDimension);
        }
        for a in &axes {
            a.validate()?;
        }
        Ok(Measure::Separable(axes))
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::Lebesgue { dim } => *dim,
            Measure::Separable(axes) => axes.len(),
        }
    }

    #[inline]
    pub fn axis_cumulative(&self, axis: usize, t: f64) -> f64 {
        match self {
            Measure::Lebesgue { .. } => t,
            Measure::Separable(axes) => axes[axis].cumulative(t),
        }
    }

    #[inline]
    pub fn axis_inverse(&self, axis: usize, v: f64) -> f64 {
        match self {
            Measure::Lebesgue { .. } => v,
            Measure::Separable(axes) => axes[axis].inverse_cumulative(v),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: dim });
        }
        Ok(())
    }

    pub(crate) fn corner_measure(&self, c: &Corner) -> f64 {
        c.coords().iter().enumerate().map(|(m, &x)| self.axis_cumulative(m, x)).product()
    }

    pub fn rect_measure(&self, r: &Rect) -> Result<f64> {
        self.check_dim(r.dim())?;
        Ok(self.corner_measure(r.corner()))
    }

    /// σ-volume of a canonical union. Dimension two uses a staircase sweep;
    /// higher dimensions fall back to inclusion-exclusion.
    pub fn union_measure(&self, u: &UnionSet) -> Result<f64> {
        self.check_dim(u.dim())?;
        let corners = u.corners();
        match (u.dim(), corners.len()) {
            (_, 0) => Ok(0.0),
            (_, 1) => Ok(self.corner_measure(&corners[0])),
            (1, _) => Ok(corners.iter().map(|c| self.axis_cumulative(0, c.coords()[0])).fold(0.0, f64::max)),
            (2, _) => Ok(self.staircase_measure(corners)),
            (dim, k) if k > INCLUSION_EXCLUSION_CAP => {
                Err(Error::TooManyCorners { corners: k, cap: INCLUSION_EXCLUSION_CAP, dim })
            }
            _ => Ok(self.inclusion_exclusion(corners)),
        }
    }

    // Canonical 2-d antichains have x strictly increasing and y strictly
    // decreasing, so the union is a staircase of vertical strips.
    fn staircase_measure(&self, corners: &[Corner]) -> f64 {
        let mut prev = 0.0;
        let mut total = 0.0;
        for c in corners {
            let fx = self.axis_cumulative(0, c.coords()[0]);
            total += (fx - prev) * self.axis_cumulative(1, c.coords()[1]);
            prev = fx;
        }
        total
    }

    fn inclusion_exclusion(&self, corners: &[Corner]) -> f64 {
        fn walk(m: &Measure, corners: &[Corner], start: usize, meet: &Corner, depth: usize, acc: &mut f64) {
            for i in start..corners.len() {
                let next = meet.meet(&corners[i]);
                let v = m.corner_measure(&next);
                if depth.is_multiple_of(2) {
                    *acc += v;
                } else {
                    *acc -= v;
                }
                if v > 0.0 {
                    walk(m, corners, i + 1, &next, depth + 1, acc);
                }
            }
        }
        let dim = corners[0].dim();
        let top = Corner::from_raw(alloc::vec![f64::INFINITY; dim]);
        let mut acc = 0.0;
        walk(self, corners, 0, &top, 0, &mut acc);
        acc
    }

    /// `σ(a ∪ u) − σ(u)`, the measure of the increment set `a ∖ u`.
    pub fn increment_measure(&self, a: &Rect, u: &UnionSet) -> Result<f64> {
        if u.contains_rect(a)? {
            return Ok(0.0);
        }
        let grown = u.with_rect(a)?;
        Ok(self.union_measure(&grown)? - self.union_measure(u)?)
    }
}

pub fn union_measure(u: &UnionSet, sigma: &Measure) -> Result<f64> {
    sigma.union_measure(u)
}

pub fn increment_measure(a: &Rect, u: &UnionSet, sigma: &Measure) -> Result<f64> {
    sigma.increment_measure(a, u)
}
