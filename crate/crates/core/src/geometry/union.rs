use alloc::vec::Vec;

use super::{Corner, Measure, Rect};
use crate::{Error, Result};

/// A finite union of rectangles, stored as the antichain of its maximal
/// corners sorted lexicographically. The empty corner list is `∅`.
///
/// Two unions represent the same region exactly when their canonical corner
/// lists are equal, so derived equality is set equality.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionSet {
    dim: usize,
    corners: Vec<Corner>,
}

impl UnionSet {
    pub fn empty(dim: usize) -> Self {
        UnionSet { dim, corners: Vec::new() }
    }

    /// The union consisting of `∅′` alone.
    pub fn empty_prime(dim: usize) -> Self {
        UnionSet { dim, corners: alloc::vec![Corner::origin(dim)] }
    }

    pub fn from_rect(rect: &Rect) -> Self {
        UnionSet { dim: rect.dim(), corners: alloc::vec![rect.corner().clone()] }
    }

    /// Drops dominated corners and sorts the rest.
    pub fn canonicalize(dim: usize, corners: Vec<Corner>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(c) = corners.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: c.dim() });
        }
        Ok(Self::canonicalize_unchecked(dim, corners))
    }

    pub(crate) fn canonicalize_unchecked(dim: usize, mut corners: Vec<Corner>) -> Self {
        // Anything dominating a corner is lexicographically at least as large,
        // so scanning in descending order only needs to look at kept corners.
        corners.sort_by(|a, b| b.lex_cmp(a));
        let mut kept: Vec<Corner> = Vec::with_capacity(corners.len());
        for c in corners {
            if !kept.iter().any(|k| c.le(k)) {
                kept.push(c);
            }
        }
        kept.reverse();
        UnionSet { dim, corners: kept }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: dim });
        }
        Ok(())
    }

    /// `[0, x] ⊆ self` iff `x` is dominated by some corner.
    pub fn contains_rect(&self, rect: &Rect) -> Result<bool> {
        self.check_dim(rect.dim())?;
        Ok(self.contains_corner(rect.corner()))
    }

    pub(crate) fn contains_corner(&self, c: &Corner) -> bool {
        self.corners.iter().any(|k| c.le(k))
    }

    pub fn is_subset(&self, other: &UnionSet) -> Result<bool> {
        self.check_dim(other.dim)?;
        Ok(self.corners.iter().all(|c| other.contains_corner(c)))
    }

    pub fn union(&self, other: &UnionSet) -> Result<UnionSet> {
        self.check_dim(other.dim)?;
        let mut all = self.corners.clone();
        all.extend(other.corners.iter().cloned());
        Ok(Self::canonicalize_unchecked(self.dim, all))
    }

    pub fn with_rect(&self, rect: &Rect) -> Result<UnionSet> {
        self.check_dim(rect.dim())?;
        Ok(self.with_corner(rect.corner().clone()))
    }

    pub(crate) fn with_corner(&self, c: Corner) -> UnionSet {
        if self.contains_corner(&c) {
            return self.clone();
        }
        let mut corners: Vec<Corner> = self.corners.iter().filter(|k| !k.le(&c)).cloned().collect();
        let pos = corners.partition_point(|k| k.lex_cmp(&c).is_lt());
        corners.insert(pos, c);
        UnionSet { dim: self.dim, corners }
    }

    /// Pairwise meets of the corners.
    pub fn intersection(&self, other: &UnionSet) -> Result<UnionSet> {
        self.check_dim(other.dim)?;
        let mut meets = Vec::with_capacity(self.corners.len() * other.corners.len());
        for a in &self.corners {
            for b in &other.corners {
                meets.push(a.meet(b));
            }
        }
        Ok(Self::canonicalize_unchecked(self.dim, meets))
    }
}

pub fn union_contains(u: &UnionSet, r: &Rect) -> Result<bool> {
    u.contains_rect(r)
}

pub fn union_subset(u1: &UnionSet, u2: &UnionSet) -> Result<bool> {
    u1.is_subset(u2)
}

/// `base ∖ subtracted`, an element of the class of increment sets.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementSet {
    pub base: Rect,
    pub subtracted: UnionSet,
}

impl IncrementSet {
    pub fn new(base: Rect, subtracted: UnionSet) -> Result<Self> {
        subtracted.check_dim(base.dim())?;
        Ok(IncrementSet { base, subtracted })
    }

    pub fn measure(&self, sigma: &Measure) -> Result<f64> {
        sigma.increment_measure(&self.base, &self.subtracted)
    }

    pub fn is_empty(&self) -> bool {
        self.subtracted.contains_corner(self.base.corner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(x: &[f64]) -> Corner {
        Corner::new(x.to_vec()).unwrap()
    }

    fn u(cs: &[&[f64]]) -> UnionSet {
        UnionSet::canonicalize(cs[0].len(), cs.iter().map(|x| c(x)).collect()).unwrap()
    }

    #[test]
    fn canonical_form_examples() {
        assert_eq!(u(&[&[1.0, 1.0], &[2.0, 2.0]]).corners(), &[c(&[2.0, 2.0])]);
        assert_eq!(u(&[&[2.0, 1.0], &[1.0, 2.0]]).corners(), &[c(&[1.0, 2.0]), c(&[2.0, 1.0])]);
        assert!(UnionSet::canonicalize(2, vec![]).unwrap().is_empty());
        assert_eq!(u(&[&[1.0, 2.0], &[1.0, 2.0]]).len(), 1);
    }

    #[test]
    fn canonicalize_rejects_mixed_dimensions() {
        let err = UnionSet::canonicalize(2, vec![c(&[1.0, 1.0]), c(&[1.0])]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn containment_examples() {
        let stair = u(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(stair.contains_rect(&Rect::new(c(&[1.0, 1.0]))).unwrap());
        assert!(!stair.contains_rect(&Rect::new(c(&[2.0, 2.0]))).unwrap());
        assert!(UnionSet::empty(2).is_subset(&stair).unwrap());
        assert!(stair.contains_rect(&Rect::empty_prime(2)).unwrap());
        assert!(!UnionSet::empty(2).contains_rect(&Rect::empty_prime(2)).unwrap());
    }

    #[test]
    fn with_corner_matches_canonicalize() {
        let stair = u(&[&[1.0, 3.0], &[3.0, 1.0]]);
        let grown = stair.with_corner(c(&[2.0, 2.0]));
        assert_eq!(grown, u(&[&[1.0, 3.0], &[3.0, 1.0], &[2.0, 2.0]]));
        let swallowed = stair.with_corner(c(&[3.0, 3.0]));
        assert_eq!(swallowed.corners(), &[c(&[3.0, 3.0])]);
        assert_eq!(stair.with_corner(c(&[0.5, 0.5])), stair);
    }

    #[test]
    fn intersection_of_unions() {
        let a = u(&[&[1.0, 3.0], &[3.0, 1.0]]);
        let b = u(&[&[2.0, 2.0]]);
        assert_eq!(a.intersection(&b).unwrap(), u(&[&[1.0, 2.0], &[2.0, 1.0]]));
    }
}
