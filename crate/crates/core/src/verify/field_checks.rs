use alloc::format;
use alloc::vec::Vec;

use super::{qv_realized, Check, MCEstimate, Rule, TestReport};
use crate::geometry::{Measure, Rect};
use crate::lattice::Flow;
use crate::par;
use crate::processes::{project_path, FieldGrid, FieldSample, ProcessModel};
use crate::rng::{CounterRng, Domain};
use crate::stats::ks_two_sample;
use crate::{Error, Result};

/// Outcome of a sequence-independence check.
#[derive(Debug, Clone, PartialEq)]
pub struct SivReport {
    pub report: TestReport,
    /// Mean of `QV_A − QV_B`, against zero.
    pub difference: MCEstimate,
    pub qv_a: MCEstimate,
    pub qv_b: MCEstimate,
    /// Per-replicate `(QV_A, QV_B)`.
    pub raw: Vec<(f64, f64)>,
}

fn same_set(a: &crate::geometry::UnionSet, b: &crate::geometry::UnionSet) -> Result<bool> {
    Ok(a.is_subset(b)? && b.is_subset(a)?)
}

fn z_check(name: &str, e: &MCEstimate) -> Check {
    Check::new(name, e.z.abs(), Rule::AtMost, 3.0)
}

/// Realized variation along two flows with shared endpoints, each replicate
/// reading both flows off one field sample.
///
/// Passes when the mean difference is within three standard errors of zero
/// and each mean is within three standard errors of `λ·σ_end` (`λ = 1` for
/// Brownian motion), with `σ_end` the measure of the snapped end set.
pub fn siv_check(
    model: &ProcessModel,
    flow_a: &Flow,
    flow_b: &Flow,
    grid: &FieldGrid,
    replicates: usize,
    seed: u64,
) -> Result<SivReport> {
    model.validate()?;
    let rate = match *model {
        ProcessModel::Sibm => 1.0,
        ProcessModel::CenteredPoisson { lambda } => lambda,
        _ => return Err(Error::InvalidModel("variation check needs independent stationary increments")),
    };
    if !same_set(flow_a.start(), flow_b.start())? || !same_set(flow_a.end(), flow_b.end())? {
        return Err(Error::EndpointMismatch);
    }
    if replicates < 2 {
        return Err(Error::InvalidParameter("need at least two replicates"));
    }
    let sigma_end = grid.snapped_measure(flow_a.end())? - grid.snapped_measure(flow_a.start())?;
    let theory = rate * sigma_end;
    let runs: Vec<Result<(f64, f64)>> = par::map_indices(replicates, |r| {
        let field = FieldSample::generate(model, grid, seed, r as u64)?;
        let qa = qv_realized(&project_path(&field, flow_a)?)?;
        let qb = qv_realized(&project_path(&field, flow_b)?)?;
        Ok((qa, qb))
    });
    let raw: Vec<(f64, f64)> = runs.into_iter().collect::<Result<_>>()?;
    let diffs: Vec<f64> = raw.iter().map(|(a, b)| a - b).collect();
    let qa: Vec<f64> = raw.iter().map(|p| p.0).collect();
    let qb: Vec<f64> = raw.iter().map(|p| p.1).collect();
    let difference = MCEstimate::mean_of(&diffs, 0.0);
    let qv_a = MCEstimate::mean_of(&qa, theory);
    let qv_b = MCEstimate::mean_of(&qb, theory);
    let mut report = TestReport::new("siv");
    report.check(z_check("difference", &difference)).check(z_check("flow_a", &qv_a)).check(z_check("flow_b", &qv_b));
    report
        .value("mean_difference", difference.estimate)
        .value("difference_stderr", difference.stderr)
        .value("mean_qv_a", qv_a.estimate)
        .value("mean_qv_b", qv_b.estimate)
        .value("theory", theory);
    Ok(SivReport { report, difference, qv_a, qv_b, raw })
}

/// Reference grid for [`stationarity_check`]. Enlargement bands are cut
/// along its lines and each piece gets its own draw, which is what lets the
/// variance-skew control depend on more than the band's measure.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityConfig {
    pub n: usize,
    pub tmax: f64,
    pub sigma: Measure,
    /// Family-wise level; pairs are Bonferroni-corrected.
    pub level: f64,
}

impl StationarityConfig {
    pub fn new(n: usize, tmax: f64, sigma: Measure) -> Self {
        StationarityConfig { n, tmax, sigma, level: 0.01 }
    }
}

// Measures of the pieces of `[x0, x1] × [0, y]` cut by the grid lines.
fn band_pieces(grid: &FieldGrid, x0: f64, x1: f64, y: f64) -> Vec<f64> {
    let sigma = grid.measure();
    let n = grid.n();
    let mut pieces = Vec::new();
    for p in 0..n {
        let (lo, hi) = (grid.line(p).max(x0), grid.line(p + 1).min(x1));
        if hi <= lo {
            continue;
        }
        let wx = sigma.axis_cumulative(0, hi) - sigma.axis_cumulative(0, lo);
        for q in 0..n {
            let (blo, bhi) = (grid.line(q), grid.line(q + 1).min(y));
            if bhi <= blo {
                break;
            }
            let m = wx * (sigma.axis_cumulative(1, bhi) - sigma.axis_cumulative(1, blo));
            if m > 0.0 {
                pieces.push(m);
            }
        }
    }
    pieces
}

/// Compares the laws of `X_{A^ε} − X_A` across base rectangles `A`, where
/// `A^ε` widens `A` along the first axis until `σ(A^ε ∖ A) = ε`.
///
/// Every pair of bases is compared with a two-sample Kolmogorov-Smirnov
/// test at the Bonferroni-corrected level.
pub fn stationarity_check(
    model: &ProcessModel,
    bases: &[Rect],
    eps: f64,
    config: &StationarityConfig,
    replicates: usize,
    seed: u64,
) -> Result<TestReport> {
    model.validate()?;
    if bases.len() < 2 {
        return Err(Error::InvalidParameter("need at least two base sets"));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter("enlargement must be nonnegative"));
    }
    if replicates < 2 {
        return Err(Error::InvalidParameter("need at least two replicates"));
    }
    let grid = FieldGrid::new(config.n, config.tmax, config.sigma.clone())?;
    let sigma = grid.measure();
    let mut bands = Vec::with_capacity(bases.len());
    for base in bases {
        let c = base.corner().coords();
        if c.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: c.len() });
        }
        let (x, y) = (c[0], c[1]);
        let fy = sigma.axis_cumulative(1, y);
        if !(fy > 0.0) {
            return Err(Error::InvalidParameter("base set must have positive height"));
        }
        let x1 = if eps == 0.0 { x } else { sigma.axis_inverse(0, sigma.axis_cumulative(0, x) + eps / fy) };
        if x1 > config.tmax || y > config.tmax {
            return Err(Error::OutsideDomain(x1.max(y)));
        }
        bands.push(band_pieces(&grid, x, x1, y));
    }
    let samples: Vec<Vec<f64>> = bands
        .iter()
        .enumerate()
        .map(|(i, pieces)| {
            par::map_indices(replicates, |r| {
                let common = model.common_factor(seed, r as u64);
                let rng = CounterRng::keyed(seed, Domain::Stationarity, i as u64, r as u64);
                pieces.iter().enumerate().map(|(j, &m)| model.draw(m, &mut rng.substream(j as u64), common)).sum()
            })
        })
        .collect();
    let pairs = bases.len() * (bases.len() - 1) / 2;
    let level = config.level / pairs as f64;
    let mut report = TestReport::new("stationarity");
    report.value("epsilon", eps).value("pair_level", level);
    for i in 0..bases.len() {
        report.value(&format!("variance_{i}"), crate::stats::variance(&samples[i]));
        for j in i + 1..bases.len() {
            let ks = ks_two_sample(&samples[i], &samples[j]);
            report.check(Check::new(&format!("ks_{i}_{j}"), ks.p_value, Rule::AtLeast, level));
        }
    }
    Ok(report)
}
