//! Finite subsemilattices of rectangles, numberings consistent with the
//! strong past, left-neighborhood cells, and the flows built from them.

mod flow;

use alloc::vec::Vec;

use crate::geometry::{Corner, Measure, Rect, UnionSet};
use crate::{Error, Result};

pub use flow::{build_flow, extend_sequence, Flow};

/// A finite family of rectangles closed under intersection, stored in
/// lexicographic corner order.
#[derive(Debug, Clone, PartialEq)]
pub struct Subsemilattice {
    dim: usize,
    sets: Vec<Rect>,
}

impl Subsemilattice {
    /// Validates distinctness and closure under intersection.
    pub fn new(sets: Vec<Rect>) -> Result<Self> {
        let dim = sets.first().ok_or(Error::EmptyInput)?.dim();
        if let Some(r) = sets.iter().find(|r| r.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: r.dim() });
        }
        let mut sets = sets;
        sets.sort_by(|a, b| a.corner().lex_cmp(b.corner()));
        if sets.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSet);
        }
        let lat = Subsemilattice { dim, sets };
        if !lat.is_intersection_closed() {
            return Err(Error::NotIntersectionClosed);
        }
        Ok(lat)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sets(&self) -> &[Rect] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    fn position(&self, c: &Corner) -> Option<usize> {
        self.sets.binary_search_by(|r| r.corner().lex_cmp(c)).ok()
    }

    pub fn is_intersection_closed(&self) -> bool {
        self.sets
            .iter()
            .enumerate()
            .all(|(i, a)| self.sets[i + 1..].iter().all(|b| self.position(&a.corner().meet(b.corner())).is_some()))
    }

    /// The intersection of all members.
    pub fn minimal(&self) -> &Rect {
        // Closure guarantees the global meet is present; it is lexicographically first.
        &self.sets[0]
    }
}

/// Smallest intersection-closed family containing `sets`.
pub fn intersection_closure(sets: &[Rect]) -> Result<Subsemilattice> {
    let dim = sets.first().ok_or(Error::EmptyInput)?.dim();
    if let Some(r) = sets.iter().find(|r| r.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: r.dim() });
    }
    let mut closed: Vec<Corner> = Vec::new();
    let insert = |closed: &mut Vec<Corner>, c: Corner| -> bool {
        match closed.binary_search_by(|k| k.lex_cmp(&c)) {
            Ok(_) => false,
            Err(pos) => {
                closed.insert(pos, c);
                true
            }
        }
    };
    for r in sets {
        insert(&mut closed, r.corner().clone());
    }
    // Meets of new elements with everything seen so far, until nothing new appears.
    let mut frontier: Vec<Corner> = closed.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            let snapshot = closed.clone();
            for c in &snapshot {
                let m = f.meet(c);
                if insert(&mut closed, m.clone()) {
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    Ok(Subsemilattice { dim, sets: closed.into_iter().map(Rect::new).collect() })
}

/// An ordering of a subsemilattice in which every proper subset of a set
/// comes before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Numbering {
    order: Vec<usize>,
}

impl Numbering {
    /// Checks a caller-supplied order.
    pub fn new(lat: &Subsemilattice, order: Vec<usize>) -> Result<Self> {
        let mut seen = alloc::vec![false; lat.len()];
        if order.len() != lat.len() {
            return Err(Error::InvalidNumbering);
        }
        for &i in &order {
            if i >= lat.len() || core::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidNumbering);
            }
        }
        let num = Numbering { order };
        if !num.is_consistent(lat) {
            return Err(Error::InvalidNumbering);
        }
        Ok(num)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Sets in numbering order.
    pub fn ordered_sets<'a>(&'a self, lat: &'a Subsemilattice) -> impl Iterator<Item = &'a Rect> + 'a {
        self.order.iter().map(move |&i| &lat.sets[i])
    }

    /// Direct pairwise check of the strong-past property.
    pub fn is_consistent(&self, lat: &Subsemilattice) -> bool {
        let ordered: Vec<&Corner> = self.order.iter().map(|&i| lat.sets[i].corner()).collect();
        ordered.iter().enumerate().all(|(i, later)| {
            ordered[i + 1..].iter().all(|earlier_candidate| {
                // A set placed after `later` must not be a proper subset of it.
                !(earlier_candidate.le(later) && *earlier_candidate != *later)
            })
        })
    }
}

/// Orders by measure, breaking ties lexicographically.
///
/// A proper subset has measure no larger and a strictly smaller corner in
/// lexicographic order, so the sort key respects inclusion.
pub fn consistent_numbering(lat: &Subsemilattice, sigma: &Measure) -> Result<Numbering> {
    if sigma.dim() != lat.dim {
        return Err(Error::DimensionMismatch { expected: lat.dim, got: sigma.dim() });
    }
    let measures: Vec<f64> = lat.sets.iter().map(|r| sigma.rect_measure(r)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..lat.len()).collect();
    order.sort_by(|&a, &b| {
        measures[a].total_cmp(&measures[b]).then_with(|| lat.sets[a].corner().lex_cmp(lat.sets[b].corner()))
    });
    Ok(Numbering { order })
}

/// One left neighborhood `C_i = A_i ∖ ∪_{j<i} A_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Position in the numbering.
    pub position: usize,
    /// Index into the subsemilattice's set list.
    pub index: usize,
    pub set: Rect,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellDecomposition {
    pub cells: Vec<Cell>,
    /// `σ(∪ A_j)`.
    pub total: f64,
}

impl CellDecomposition {
    pub fn measure_sum(&self) -> f64 {
        self.cells.iter().map(|c| c.measure).sum()
    }
}

/// Partial unions `f(i) = ∪_{j≤i} A_j` in numbering order.
pub fn partial_unions(lat: &Subsemilattice, num: &Numbering) -> Vec<UnionSet> {
    let mut acc = UnionSet::empty(lat.dim);
    num.ordered_sets(lat)
        .map(|r| {
            acc = acc.with_corner(r.corner().clone());
            acc.clone()
        })
        .collect()
}

pub fn left_neighborhoods(lat: &Subsemilattice, num: &Numbering, sigma: &Measure) -> Result<CellDecomposition> {
    let unions = partial_unions(lat, num);
    let mut prev = 0.0;
    let mut cells = Vec::with_capacity(unions.len());
    for (position, (u, &index)) in unions.iter().zip(num.order()).enumerate() {
        let m = sigma.union_measure(u)?;
        cells.push(Cell { position, index, set: lat.sets[index].clone(), measure: m - prev });
        prev = m;
    }
    Ok(CellDecomposition { cells, total: prev })
}
