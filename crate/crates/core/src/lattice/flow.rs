use alloc::vec::Vec;

use super::{partial_unions, Numbering, Subsemilattice};
use crate::geometry::{Corner, Measure, UnionSet};
use crate::math::ceil;
use crate::{Error, Result};

/// A discretized strictly increasing continuous sequence `α ↦ A_α` of
/// unions, with its clock `θ(α) = σ(A_α)`.
///
/// Consecutive sets are strictly nested and no clock step exceeds `mesh`.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    alphas: Vec<f64>,
    sets: Vec<UnionSet>,
    theta: Vec<f64>,
    mesh: f64,
    anchors: Vec<usize>,
}

impl Flow {
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn sets(&self) -> &[UnionSet] {
        &self.sets
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Requested bound on clock steps.
    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// Grid positions of the anchor sets the flow was built through.
    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.alphas.len().saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        self.sets[0].dim()
    }

    pub fn start(&self) -> &UnionSet {
        &self.sets[0]
    }

    pub fn end(&self) -> &UnionSet {
        &self.sets[self.sets.len() - 1]
    }

    pub fn total_clock(&self) -> f64 {
        self.theta[self.theta.len() - 1] - self.theta[0]
    }

    pub fn max_clock_step(&self) -> f64 {
        self.theta.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// `(α, θ(α))` pairs.
    pub fn clock(&self) -> Vec<(f64, f64)> {
        self.alphas.iter().copied().zip(self.theta.iter().copied()).collect()
    }

    /// Validates an explicit sequence: parameters, sets and clock must all
    /// be strictly increasing. The mesh is the largest clock step.
    pub fn from_sets(alphas: Vec<f64>, sets: Vec<UnionSet>, sigma: &Measure) -> Result<Flow> {
        if sets.is_empty() {
            return Err(Error::EmptyInput);
        }
        if alphas.len() != sets.len() {
            return Err(Error::InvalidParameter("one parameter value per set is required"));
        }
        let theta: Vec<f64> = sets.iter().map(|s| sigma.union_measure(s)).collect::<Result<_>>()?;
        for i in 1..sets.len() {
            let nested = sets[i - 1].is_subset(&sets[i])? && !sets[i].is_subset(&sets[i - 1])?;
            if !(alphas[i] > alphas[i - 1]) || !nested || !(theta[i] > theta[i - 1]) {
                return Err(Error::NonIncreasingFlow(i));
            }
        }
        let last = sets.len() - 1;
        let mut flow = Flow { alphas, sets, theta, mesh: 0.0, anchors: alloc::vec![0, last] };
        flow.mesh = flow.max_clock_step();
        flow.anchors.dedup();
        Ok(flow)
    }

    /// Cubes `[0, (t, …, t)]` from `∅′` with a uniform clock: `steps` equal
    /// increments up to `σ = total`, parametrized by the clock itself.
    pub fn uniform_diagonal(sigma: &Measure, total: f64, steps: usize) -> Result<Flow> {
        if !(total > 0.0) || !total.is_finite() || steps == 0 {
            return Err(Error::InvalidParameter("diagonal flow needs a positive total and at least one step"));
        }
        let dim = sigma.dim();
        let mut alphas = Vec::with_capacity(steps + 1);
        let mut sets = Vec::with_capacity(steps + 1);
        let mut theta = Vec::with_capacity(steps + 1);
        alphas.push(0.0);
        sets.push(UnionSet::empty_prime(dim));
        theta.push(0.0);
        for i in 1..=steps {
            let target = total * i as f64 / steps as f64;
            let side = diagonal_side(sigma, target);
            let set = UnionSet::from_rect(&crate::geometry::Rect::new(Corner::from_raw(alloc::vec![side; dim])));
            let th = sigma.union_measure(&set)?;
            if !(th > theta[theta.len() - 1]) {
                return Err(Error::InterpolationStall { from: alphas[alphas.len() - 1], to: target });
            }
            alphas.push(target);
            sets.push(set);
            theta.push(th);
        }
        let mut flow = Flow { alphas, sets, theta, mesh: 0.0, anchors: alloc::vec![0, steps] };
        flow.mesh = flow.max_clock_step();
        Ok(flow)
    }
}

// Side t with σ([0, t·1]) = target, by bracketing and bisection.
fn diagonal_side(sigma: &Measure, target: f64) -> f64 {
    let dim = sigma.dim();
    let f = |t: f64| (0..dim).map(|m| sigma.axis_cumulative(m, t)).product::<f64>();
    if let Measure::Lebesgue { .. } = sigma {
        return libm::pow(target, 1.0 / dim as f64);
    }
    let mut hi = 1.0;
    while f(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

struct FlowBuilder<'a> {
    sigma: &'a Measure,
    mesh: f64,
    alphas: Vec<f64>,
    sets: Vec<UnionSet>,
    theta: Vec<f64>,
}

impl<'a> FlowBuilder<'a> {
    fn start(sigma: &'a Measure, mesh: f64) -> Self {
        let dim = sigma.dim();
        FlowBuilder {
            sigma,
            mesh,
            alphas: alloc::vec![0.0],
            sets: alloc::vec![UnionSet::empty_prime(dim)],
            theta: alloc::vec![0.0],
        }
    }

    fn current(&self) -> &UnionSet {
        &self.sets[self.sets.len() - 1]
    }

    fn push(&mut self, alpha: f64, set: UnionSet, theta: f64) {
        self.alphas.push(alpha);
        self.sets.push(set);
        self.theta.push(theta);
    }

    /// Grows the current union towards `[0, target]` over `[alpha0, alpha1]`
    /// by moving a rectangle corner from the base corner `b` to `target`.
    fn grow_towards(&mut self, target: &Corner, alpha0: f64, alpha1: f64) -> Result<()> {
        let current = self.current().clone();
        let theta0 = self.theta[self.theta.len() - 1];
        let base = current
            .corners()
            .iter()
            .map(|y| y.meet(target))
            .map(|m| (self.sigma.corner_measure(&m), m))
            .fold(None::<(f64, Corner)>, |best, (v, m)| match best {
                Some((bv, _)) if bv >= v => best,
                _ => Some((v, m)),
            })
            .map(|(_, m)| m)
            .unwrap_or_else(|| Corner::origin(target.dim()));

        let sigma = self.sigma;
        let eval = |u: f64| -> Result<(UnionSet, f64)> {
            let corner = if u >= 1.0 {
                target.clone()
            } else {
                Corner::from_raw(
                    base.coords().iter().zip(target.coords()).map(|(b, t)| (b + u * (t - b)).min(*t)).collect(),
                )
            };
            let set = current.with_corner(corner);
            let th = sigma.union_measure(&set)?;
            Ok((set, th))
        };

        let (_, theta1) = eval(1.0)?;
        if !(theta1 > theta0) {
            return Err(Error::InterpolationStall { from: alpha0, to: alpha1 });
        }
        let n0 = ceil((theta1 - theta0) / self.mesh).max(1.0) as usize;
        let mut pending: Vec<(f64, UnionSet, f64)> = Vec::with_capacity(n0);
        for j in (1..=n0).rev() {
            let u = if j == n0 { 1.0 } else { j as f64 / n0 as f64 };
            let (set, th) = eval(u)?;
            pending.push((u, set, th));
        }
        let at = |u: f64| if u >= 1.0 { alpha1 } else { alpha0 + u * (alpha1 - alpha0) };
        let (mut left_u, mut left_theta) = (0.0, theta0);
        while let Some((u, set, th)) = pending.pop() {
            if !(th > left_theta) {
                return Err(Error::InterpolationStall { from: at(left_u), to: at(u) });
            }
            if th - left_theta > self.mesh {
                let mid = 0.5 * (left_u + u);
                if !(mid > left_u && mid < u) {
                    return Err(Error::InterpolationStall { from: at(left_u), to: at(u) });
                }
                let (mset, mth) = eval(mid)?;
                pending.push((u, set, th));
                pending.push((mid, mset, mth));
                continue;
            }
            self.push(at(u), set, th);
            left_u = u;
            left_theta = th;
        }
        Ok(())
    }

    fn finish(self, anchors: Vec<usize>) -> Flow {
        Flow { alphas: self.alphas, sets: self.sets, theta: self.theta, mesh: self.mesh, anchors }
    }
}

fn check_mesh(mesh: f64) -> Result<()> {
    if !(mesh > 0.0) || !mesh.is_finite() {
        return Err(Error::InvalidMesh(mesh));
    }
    Ok(())
}

/// A flow from `∅′` through each anchor, anchor `n` sitting at `α = n + 1`.
///
/// Between consecutive anchors the corners that are new in the later anchor
/// are added one at a time, each over an equal share of the unit parameter
/// interval.
pub fn extend_sequence(anchors: &[UnionSet], sigma: &Measure, mesh: f64) -> Result<Flow> {
    check_mesh(mesh)?;
    let dim = sigma.dim();
    if anchors.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut builder = FlowBuilder::start(sigma, mesh);
    let mut anchor_pos = Vec::with_capacity(anchors.len());
    for (n, anchor) in anchors.iter().enumerate() {
        if anchor.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: anchor.dim() });
        }
        let prev = builder.current().clone();
        if !prev.is_subset(anchor)? || anchor.is_subset(&prev)? {
            return Err(Error::NonIncreasingAnchors(n));
        }
        let fresh: Vec<&Corner> = anchor.corners().iter().filter(|c| !prev.contains_corner(c)).collect();
        let m = fresh.len() as f64;
        for (j, c) in fresh.iter().enumerate() {
            let a0 = n as f64 + j as f64 / m;
            let a1 = if j + 1 == fresh.len() { (n + 1) as f64 } else { n as f64 + (j + 1) as f64 / m };
            builder.grow_towards(c, a0, a1)?;
        }
        debug_assert_eq!(builder.current(), anchor);
        anchor_pos.push(builder.alphas.len() - 1);
    }
    Ok(builder.finish(anchor_pos))
}

/// The flow through the partial unions `f(i) = ∪_{j≤i} A_j` of a numbered
/// subsemilattice. When `A_0 = ∅′` the flow starts at it and `f(i)` sits at
/// `α = i`; otherwise `f(i)` sits at `α = i + 1`.
pub fn build_flow(lat: &Subsemilattice, num: &Numbering, sigma: &Measure, mesh: f64) -> Result<Flow> {
    check_mesh(mesh)?;
    if sigma.dim() != lat.dim() {
        return Err(Error::DimensionMismatch { expected: lat.dim(), got: sigma.dim() });
    }
    let unions = partial_unions(lat, num);
    let starts_at_empty_prime = unions[0].corners().iter().all(|c| c.is_origin());
    let rest = if starts_at_empty_prime { &unions[1..] } else { &unions[..] };
    if rest.is_empty() {
        let dim = lat.dim();
        return Ok(Flow {
            alphas: alloc::vec![0.0],
            sets: alloc::vec![UnionSet::empty_prime(dim)],
            theta: alloc::vec![0.0],
            mesh,
            anchors: alloc::vec![0],
        });
    }
    let mut flow = extend_sequence(rest, sigma, mesh)?;
    if starts_at_empty_prime {
        flow.anchors.insert(0, 0);
    }
    Ok(flow)
}
