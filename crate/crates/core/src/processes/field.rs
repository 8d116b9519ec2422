use alloc::vec::Vec;
use core::ops::{Add, Neg, Sub};

use super::{PathSample, ProcessModel};
use crate::geometry::{Corner, Measure, Rect, UnionSet};
use crate::lattice::Flow;
use crate::math::floor;
use crate::par;
use crate::rng::{CounterRng, Domain};
use crate::{Error, Result};

/// Largest exclusion list accepted by [`evaluate_increment`].
pub const MAX_EXCLUSIONS: usize = 12;

const FRAC_BITS: i32 = 40;
const SCALE: f64 = (1u64 << FRAC_BITS) as f64;
// Cell values are stored as i64 multiples of 2^-40; keep well clear of overflow.
const MAX_CELL: f64 = (1u64 << 22) as f64;

/// Exact field value: a sum of cells in fixed point with 40 fractional bits.
///
/// Sums of cell values are integers, so any grouping of the same cells
/// gives the same bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldValue(i128);

impl FieldValue {
    pub const ZERO: FieldValue = FieldValue(0);

    pub fn raw(self) -> i128 {
        self.0
    }

    pub fn from_raw(raw: i128) -> Self {
        FieldValue(raw)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE
    }
}

impl Add for FieldValue {
    type Output = FieldValue;
    fn add(self, rhs: FieldValue) -> FieldValue {
        FieldValue(self.0 + rhs.0)
    }
}

impl Sub for FieldValue {
    type Output = FieldValue;
    fn sub(self, rhs: FieldValue) -> FieldValue {
        FieldValue(self.0 - rhs.0)
    }
}

impl Neg for FieldValue {
    type Output = FieldValue;
    fn neg(self) -> FieldValue {
        FieldValue(-self.0)
    }
}

impl core::iter::Sum for FieldValue {
    fn sum<I: Iterator<Item = FieldValue>>(iter: I) -> FieldValue {
        iter.fold(FieldValue::ZERO, |a, b| a + b)
    }
}

/// A regular `n × n` grid over `[0, T]²` with a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    n: usize,
    tmax: f64,
    sigma: Measure,
    lines: Vec<f64>,
    // Axis cumulative measure at each grid line.
    cum: [Vec<f64>; 2],
}

impl FieldGrid {
    pub fn new(n: usize, tmax: f64, sigma: Measure) -> Result<Self> {
        if n == 0 || !(tmax > 0.0) || !tmax.is_finite() || sigma.dim() != 2 {
            return Err(Error::InvalidGrid);
        }
        let lines: Vec<f64> = (0..=n).map(|p| p as f64 * tmax / n as f64).collect();
        let cum = [0, 1].map(|axis| lines.iter().map(|&x| sigma.axis_cumulative(axis, x)).collect());
        Ok(FieldGrid { n, tmax, sigma, lines, cum })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tmax(&self) -> f64 {
        self.tmax
    }

    pub fn measure(&self) -> &Measure {
        &self.sigma
    }

    /// Position of grid line `p`.
    pub fn line(&self, p: usize) -> f64 {
        self.lines[p]
    }

    /// Largest `p` with grid line `p` at or below `x`.
    pub fn snap(&self, x: f64) -> Result<usize> {
        if !(x >= 0.0) || x > self.tmax {
            return Err(Error::OutsideDomain(x));
        }
        let mut p = (floor(x * self.n as f64 / self.tmax) as usize).min(self.n);
        while p < self.n && self.lines[p + 1] <= x {
            p += 1;
        }
        while p > 0 && self.lines[p] > x {
            p -= 1;
        }
        Ok(p)
    }

    pub fn snap_corner(&self, c: &Corner) -> Result<(usize, usize)> {
        if c.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: c.dim() });
        }
        Ok((self.snap(c.coords()[0])?, self.snap(c.coords()[1])?))
    }

    /// Snapped corners of `u` as a staircase: `px` strictly increasing, `py`
    /// strictly decreasing, degenerate corners dropped.
    pub fn snap_union(&self, u: &UnionSet) -> Result<Vec<(usize, usize)>> {
        let mut pts: Vec<(usize, usize)> = u.corners().iter().map(|c| self.snap_corner(c)).collect::<Result<_>>()?;
        pts.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        let mut stair: Vec<(usize, usize)> = Vec::with_capacity(pts.len());
        for p in pts {
            if p.0 == 0 || p.1 == 0 {
                continue;
            }
            if let Some(top) = stair.last() {
                if top.0 == p.0 {
                    continue;
                }
            }
            while stair.last().is_some_and(|top| top.1 <= p.1) {
                stair.pop();
            }
            stair.push(p);
        }
        Ok(stair)
    }

    pub fn cell_measure(&self, ix: usize, iy: usize) -> f64 {
        (self.cum[0][ix + 1] - self.cum[0][ix]) * (self.cum[1][iy + 1] - self.cum[1][iy])
    }

    /// σ of the grid-aligned staircase.
    pub fn staircase_measure(&self, stair: &[(usize, usize)]) -> f64 {
        let mut prev = 0.0;
        let mut total = 0.0;
        for &(px, py) in stair {
            let fx = self.cum[0][px];
            total += (fx - prev) * self.cum[1][py];
            prev = fx;
        }
        total
    }

    /// σ of `u` after snapping its corners to the grid.
    pub fn snapped_measure(&self, u: &UnionSet) -> Result<f64> {
        Ok(self.staircase_measure(&self.snap_union(u)?))
    }
}

/// One draw of a model on every cell of a grid, with 2-d prefix sums.
///
/// Cell `(ix, iy)` is `[ix, ix+1] × [iy, iy+1]` in grid units and has index
/// `iy·n + ix`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    grid: FieldGrid,
    model: ProcessModel,
    seed: u64,
    replicate: u64,
    cells: Vec<i64>,
    prefix: Vec<i128>,
}

fn quantize(v: f64) -> Result<i64> {
    if !(v.abs() < MAX_CELL) {
        return Err(Error::InvalidParameter("cell value out of fixed-point range"));
    }
    Ok(libm::round(v * SCALE) as i64)
}

impl FieldSample {
    /// Draws replicate `replicate`; cell `k` uses its own counter stream, so
    /// the result does not depend on traversal order or threading.
    pub fn generate(model: &ProcessModel, grid: &FieldGrid, seed: u64, replicate: u64) -> Result<Self> {
        model.validate()?;
        let n = grid.n;
        let common = model.common_factor(seed, replicate);
        let base = CounterRng::keyed(seed, Domain::Field, replicate, 0);
        let rows: Vec<Result<Vec<i64>>> = par::map_indices(n, |iy| {
            (0..n)
                .map(|ix| {
                    let k = (iy * n + ix) as u64;
                    quantize(model.draw(grid.cell_measure(ix, iy), &mut base.substream(k), common))
                })
                .collect()
        });
        let mut cells = Vec::with_capacity(n * n);
        for row in rows {
            cells.extend(row?);
        }
        Ok(Self::from_cells(grid.clone(), *model, seed, replicate, cells))
    }

    fn from_cells(grid: FieldGrid, model: ProcessModel, seed: u64, replicate: u64, cells: Vec<i64>) -> Self {
        let n = grid.n;
        let w = n + 1;
        let mut prefix = alloc::vec![0i128; w * w];
        for iy in 0..n {
            let mut row = 0i128;
            for ix in 0..n {
                row += cells[iy * n + ix] as i128;
                prefix[(iy + 1) * w + ix + 1] = prefix[iy * w + ix + 1] + row;
            }
        }
        FieldSample { grid, model, seed, replicate, cells, prefix }
    }

    pub fn grid(&self) -> &FieldGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn model(&self) -> &ProcessModel {
        &self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    pub fn cell(&self, ix: usize, iy: usize) -> FieldValue {
        FieldValue(self.cells[iy * self.grid.n + ix] as i128)
    }

    /// Sum of cells with `ix < px` and `iy < py`.
    #[inline]
    pub fn prefix(&self, px: usize, py: usize) -> FieldValue {
        FieldValue(self.prefix[py * (self.grid.n + 1) + px])
    }

    /// Value on a snapped staircase.
    pub fn staircase_value(&self, stair: &[(usize, usize)]) -> FieldValue {
        let mut prev = 0;
        let mut total = FieldValue::ZERO;
        for &(px, py) in stair {
            total = total + self.prefix(px, py) - self.prefix(prev, py);
            prev = px;
        }
        total
    }

    /// Exact value on `u` after snapping.
    pub fn value(&self, u: &UnionSet) -> Result<FieldValue> {
        Ok(self.staircase_value(&self.grid.snap_union(u)?))
    }

    pub fn rect_value(&self, r: &Rect) -> Result<FieldValue> {
        let (px, py) = self.grid.snap_corner(r.corner())?;
        Ok(self.prefix(px, py))
    }

    /// Cell values as a row-major matrix of floats.
    pub fn cell_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.grid.n;
        (0..n).map(|iy| (0..n).map(|ix| self.cell(ix, iy).to_f64()).collect()).collect()
    }
}

/// Samples replicate 0 of `model` on an `n × n` grid over `[0, tmax]²`.
pub fn sample_field(model: &ProcessModel, n: usize, tmax: f64, sigma: &Measure, seed: u64) -> Result<FieldSample> {
    let grid = FieldGrid::new(n, tmax, sigma.clone())?;
    FieldSample::generate(model, &grid, seed, 0)
}

/// Sum of the cells lying inside `u` once its corners are snapped down to
/// grid lines.
pub fn evaluate_set(field: &FieldSample, u: &UnionSet) -> Result<f64> {
    Ok(field.value(u)?.to_f64())
}

/// `X_{A ∖ (A_1 ∪ … ∪ A_k)}` by inclusion-exclusion over the intersections.
pub fn evaluate_increment(field: &FieldSample, a: &Rect, exclusions: &[Rect]) -> Result<FieldValue> {
    if exclusions.len() > MAX_EXCLUSIONS {
        return Err(Error::TooManyExclusions(exclusions.len()));
    }
    let grid = field.grid();
    let base = grid.snap_corner(a.corner())?;
    let ex: Vec<(usize, usize)> = exclusions.iter().map(|r| grid.snap_corner(r.corner())).collect::<Result<_>>()?;
    let mut total = FieldValue::ZERO;
    for mask in 0u32..(1u32 << ex.len()) {
        let (mut px, mut py) = base;
        for (j, e) in ex.iter().enumerate() {
            if mask & (1 << j) != 0 {
                px = px.min(e.0);
                py = py.min(e.1);
            }
        }
        let v = field.prefix(px, py);
        total = if mask.count_ones() % 2 == 0 { total + v } else { total - v };
    }
    Ok(total)
}

/// Reads the field along a flow. The clock is the measure of the snapped
/// sets, so increments and clock differences describe the same cells.
pub fn project_path(field: &FieldSample, flow: &Flow) -> Result<PathSample> {
    let grid = field.grid();
    let mut values = Vec::with_capacity(flow.len());
    let mut theta = Vec::with_capacity(flow.len());
    for set in flow.sets() {
        let stair = grid.snap_union(set)?;
        values.push(field.staircase_value(&stair));
        theta.push(grid.staircase_measure(&stair));
    }
    let increments = values.windows(2).map(|w| (w[1] - w[0]).to_f64()).collect();
    let cumulative = values.iter().map(|v| v.to_f64()).collect();
    Ok(PathSample { alphas: flow.alphas().to_vec(), theta, increments, cumulative })
}
