//! Rectangles `[0, x]` in the positive orthant and their finite unions.
//!
//! Set comparisons are exact on the input coordinates. Only measures carry
//! rounding, and those are compared with [`MEASURE_TOL`].

mod measure;
mod scaling;
mod union;

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

pub use measure::{increment_measure, union_measure, AxisDensity, Measure, INCLUSION_EXCLUSION_CAP};
pub use scaling::{scale_action, ScalingGroupElement};
pub use union::{union_contains, union_subset, IncrementSet, UnionSet};

/// Absolute tolerance used when comparing measures.
pub const MEASURE_TOL: f64 = 1e-12;

/// Upper corner `x` of a rectangle `[0, x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Corner(Vec<f64>);

impl Corner {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some(&bad) = coords.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidCoordinate(bad));
        }
        // Normalise -0.0 so that equality and lexicographic order agree.
        Ok(Corner(coords.into_iter().map(|c| c + 0.0).collect()))
    }

    pub fn origin(dim: usize) -> Self {
        Corner(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Corner) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise minimum.
    pub fn meet(&self, other: &Corner) -> Corner {
        Corner(self.0.iter().zip(&other.0).map(|(a, b)| a.min(*b)).collect())
    }

    pub fn lex_cmp(&self, other: &Corner) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Corner(coords)
    }

    fn check_dim(&self, other: &Corner) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }
}

/// The rectangle `[0, corner]`. The origin corner is the minimal set `∅′`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rect {
    corner: Corner,
}

impl Rect {
    pub fn new(corner: Corner) -> Self {
        Rect { corner }
    }

    pub fn from_coords(coords: Vec<f64>) -> Result<Self> {
        Ok(Rect { corner: Corner::new(coords)? })
    }

    /// `∅′`, the degenerate rectangle `[0, 0]`.
    pub fn empty_prime(dim: usize) -> Self {
        Rect { corner: Corner::origin(dim) }
    }

    pub fn corner(&self) -> &Corner {
        &self.corner
    }

    pub fn dim(&self) -> usize {
        self.corner.dim()
    }

    pub fn is_empty_prime(&self) -> bool {
        self.corner.is_origin()
    }

    pub fn intersect(&self, other: &Rect) -> Result<Rect> {
        self.corner.check_dim(&other.corner)?;
        Ok(Rect { corner: self.corner.meet(&other.corner) })
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &Rect) -> Result<bool> {
        self.corner.check_dim(&other.corner)?;
        Ok(self.corner.le(&other.corner))
    }
}

impl From<Corner> for Rect {
    fn from(corner: Corner) -> Self {
        Rect { corner }
    }
}

pub fn rect_intersect(a: &Rect, b: &Rect) -> Result<Rect> {
    a.intersect(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(c: &[f64]) -> Rect {
        Rect::from_coords(c.to_vec()).unwrap()
    }

    #[test]
    fn intersect_is_componentwise_min() {
        assert_eq!(rect(&[2.0, 2.0]).intersect(&rect(&[1.0, 3.0])).unwrap(), rect(&[1.0, 2.0]));
        let a = rect(&[0.5, 4.0]);
        assert_eq!(a.intersect(&a).unwrap(), a);
        let d = rect(&[1.0, 1.0]).intersect(&rect(&[0.0, 0.0])).unwrap();
        assert!(d.is_empty_prime());
    }

    #[test]
    fn intersect_rejects_dimension_mismatch() {
        let err = rect(&[1.0, 1.0]).intersect(&rect(&[1.0, 1.0, 1.0])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, got: 3 });
    }

    #[test]
    fn corner_validation() {
        assert_eq!(Corner::new(vec![]).unwrap_err(), Error::ZeroDimension);
        assert!(matches!(Corner::new(vec![1.0, -0.5]), Err(Error::InvalidCoordinate(_))));
        assert!(matches!(Corner::new(vec![f64::NAN]), Err(Error::InvalidCoordinate(_))));
        assert_eq!(Corner::new(vec![-0.0]).unwrap(), Corner::origin(1));
    }

    #[test]
    fn lexicographic_order() {
        let a = Corner::new(vec![1.0, 5.0]).unwrap();
        let b = Corner::new(vec![2.0, 0.0]).unwrap();
        assert_eq!(a.lex_cmp(&b), Ordering::Less);
        assert_eq!(a.lex_cmp(&a), Ordering::Equal);
    }
}
