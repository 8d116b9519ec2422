use alloc::vec::Vec;

use super::{Corner, UnionSet};
use crate::{Error, Result};

/// Element `g` of the multiplicative group acting by `g ∗ [0, t] = [0, g·t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingGroupElement {
    g: Vec<f64>,
}

impl ScalingGroupElement {
    pub fn new(g: Vec<f64>) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some(&bad) = g.iter().find(|x| !x.is_finite() || **x <= 0.0) {
            return Err(Error::NonPositiveScale(bad));
        }
        Ok(ScalingGroupElement { g })
    }

    pub fn identity(dim: usize) -> Self {
        ScalingGroupElement { g: alloc::vec![1.0; dim] }
    }

    pub fn components(&self) -> &[f64] {
        &self.g
    }

    /// `η(g) = ∏ gᵢ`, so that `σ(g ∗ A) = η(g)·σ(A)` for Lebesgue measure.
    pub fn eta(&self) -> f64 {
        self.g.iter().product()
    }

    pub fn compose(&self, other: &ScalingGroupElement) -> Result<ScalingGroupElement> {
        if self.g.len() != other.g.len() {
            return Err(Error::DimensionMismatch { expected: self.g.len(), got: other.g.len() });
        }
        Ok(ScalingGroupElement { g: self.g.iter().zip(&other.g).map(|(a, b)| a * b).collect() })
    }

    pub fn inverse(&self) -> ScalingGroupElement {
        ScalingGroupElement { g: self.g.iter().map(|x| 1.0 / x).collect() }
    }

    pub fn act(&self, u: &UnionSet) -> Result<UnionSet> {
        if u.dim() != self.g.len() {
            return Err(Error::DimensionMismatch { expected: self.g.len(), got: u.dim() });
        }
        let scaled = u
            .corners()
            .iter()
            .map(|c| Corner::from_raw(c.coords().iter().zip(&self.g).map(|(x, g)| x * g).collect()))
            .collect();
        // Rounding can merge coordinates, so re-canonicalize.
        Ok(UnionSet::canonicalize_unchecked(u.dim(), scaled))
    }
}

pub fn scale_action(g: &ScalingGroupElement, u: &UnionSet) -> Result<UnionSet> {
    g.act(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Measure, Rect};
    use alloc::vec;

    #[test]
    fn scales_unit_square() {
        let g = ScalingGroupElement::new(vec![2.0, 3.0]).unwrap();
        let unit = UnionSet::from_rect(&Rect::from_coords(vec![1.0, 1.0]).unwrap());
        let image = g.act(&unit).unwrap();
        assert_eq!(image, UnionSet::from_rect(&Rect::from_coords(vec![2.0, 3.0]).unwrap()));
        assert_eq!(g.eta(), 6.0);
        let leb = Measure::lebesgue(2);
        assert_eq!(leb.union_measure(&unit).unwrap(), 1.0);
        assert_eq!(leb.union_measure(&image).unwrap(), 6.0);
    }

    #[test]
    fn identity_and_composition() {
        let id = ScalingGroupElement::identity(2);
        assert_eq!(id.eta(), 1.0);
        let g = ScalingGroupElement::new(vec![0.5, 4.0]).unwrap();
        let h = ScalingGroupElement::new(vec![3.0, 0.25]).unwrap();
        assert_eq!(g.compose(&h).unwrap().eta(), g.eta() * h.eta());
        assert_eq!(g.compose(&g.inverse()).unwrap(), id);
    }

    #[test]
    fn rejects_nonpositive_components() {
        assert_eq!(ScalingGroupElement::new(vec![1.0, 0.0]).unwrap_err(), Error::NonPositiveScale(0.0));
        assert_eq!(ScalingGroupElement::new(vec![-2.0]).unwrap_err(), Error::NonPositiveScale(-2.0));
    }
}
