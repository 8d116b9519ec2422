use alloc::vec::Vec;

use super::passage::{first_passage_probability, Walker};
use super::{Check, MCEstimate, Rule, TestReport};
use crate::geometry::{Measure, Rect, UnionSet};
use crate::lattice::extend_sequence;
use crate::math::{ln, sqrt};
use crate::par;
use crate::rng::{CounterRng, Domain};
use crate::stats::{binomial_sd, mean};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    /// Increasing domain measures `σ_n`; the flow passes through squares
    /// with these areas.
    pub schedule: Vec<f64>,
    pub replicates: usize,
    /// Clock mesh of the flow.
    pub mesh: f64,
    /// Bound on `|X|/σ` at the last scale.
    pub ratio_bound: f64,
    /// Level for the running-maximum exceedance.
    pub level: f64,
    pub seed: u64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            schedule: alloc::vec![1e2, 1e3, 1e4],
            replicates: 1000,
            mesh: 1.0,
            ratio_bound: 0.05,
            level: 3.0,
            seed: 0,
        }
    }
}

/// Per-scale summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSummary {
    pub sigma: f64,
    /// Fraction of replicates with `|X|/σ ≤ ratio_bound`.
    pub small_ratio: f64,
    /// `max_{θ ≤ σ} |Y_θ| / √(2σ ln ln σ)`: mean, 10%, 50% and 90% points.
    pub lil_mean: f64,
    pub lil_quantiles: [f64; 3],
    /// Mean running maximum up to `σ`.
    pub running_max_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub report: TestReport,
    pub levels: Vec<LevelSummary>,
    /// Running maximum reaching `level` by the last scale.
    pub exceedance: MCEstimate,
    /// Mean zero-crossing counts along the flow and for the reference
    /// one-parameter generator on the same clock.
    pub crossings: (f64, f64),
}

struct Replicate {
    at_anchor: Vec<f64>,
    max_abs: Vec<f64>,
    max: Vec<f64>,
    exceeded: bool,
    crossings: usize,
    reference_crossings: usize,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let k = libm::floor(q * (sorted.len() - 1) as f64) as usize;
    sorted[k]
}

/// Large-domain behaviour of Brownian motion along a flow through growing
/// squares: `X/σ` concentrates at zero, the running maximum passes a fixed
/// level, and law-of-iterated-logarithm ratios and zero-crossing counts are
/// reported without a verdict.
pub fn asymptotic_diagnostics(config: &DiagnosticsConfig) -> Result<DiagnosticsReport> {
    if config.schedule.is_empty() {
        return Err(Error::EmptyInput);
    }
    if config.schedule.iter().any(|&s| !(s > 0.0)) || config.schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("schedule must be positive and increasing"));
    }
    if config.replicates == 0 {
        return Err(Error::EmptyInput);
    }
    let leb = Measure::lebesgue(2);
    let anchors: Vec<UnionSet> = config
        .schedule
        .iter()
        .map(|&s| Rect::from_coords(alloc::vec![sqrt(s); 2]).map(|r| UnionSet::from_rect(&r)))
        .collect::<Result<_>>()?;
    let flow = extend_sequence(&anchors, &leb, config.mesh)?;
    let anchor_pos = flow.anchors().to_vec();
    let last = *anchor_pos.last().expect("one anchor per scale");
    let level = config.level;

    let reps: Vec<Replicate> = par::map_indices(config.replicates, |r| {
        let w = Walker::new(&flow, config.seed, r as u64);
        let reference = CounterRng::keyed(config.seed, Domain::Reference, r as u64, 0);
        let (mut y, mut yr) = (0.0f64, 0.0f64);
        let (mut max, mut max_abs) = (0.0f64, 0.0f64);
        let mut exceeded = false;
        let mut rep = Replicate {
            at_anchor: Vec::with_capacity(anchor_pos.len()),
            max_abs: Vec::with_capacity(anchor_pos.len()),
            max: Vec::with_capacity(anchor_pos.len()),
            exceeded: false,
            crossings: 0,
            reference_crossings: 0,
        };
        let (mut sign, mut sign_r) = (0.0f64, 0.0f64);
        let mut next_anchor = 0;
        for i in 0..last {
            let next = y + w.increment(i);
            if !exceeded && (next >= level || w.bridge_touch(i, level - y, level - next, 0)) {
                exceeded = true;
            }
            y = next;
            yr += sqrt(w.dtheta(i)) * reference.substream(i as u64).normal();
            max = max.max(y);
            max_abs = max_abs.max(y.abs());
            for (s, v, count) in [(&mut sign, y, &mut rep.crossings), (&mut sign_r, yr, &mut rep.reference_crossings)] {
                if v != 0.0 {
                    if *s != 0.0 && v.signum() != *s {
                        *count += 1;
                    }
                    *s = v.signum();
                }
            }
            while next_anchor < anchor_pos.len() && anchor_pos[next_anchor] == i + 1 {
                rep.at_anchor.push(y);
                rep.max_abs.push(max_abs);
                rep.max.push(max);
                next_anchor += 1;
            }
        }
        rep.exceeded = exceeded;
        rep
    });

    let n = config.replicates;
    let mut levels = Vec::with_capacity(config.schedule.len());
    for (k, &s) in config.schedule.iter().enumerate() {
        let small = reps.iter().filter(|r| r.at_anchor[k].abs() / s <= config.ratio_bound).count();
        let norm = sqrt(2.0 * s * ln(ln(s)));
        let mut lil: Vec<f64> = reps.iter().map(|r| r.max_abs[k] / norm).collect();
        lil.sort_by(f64::total_cmp);
        let maxes: Vec<f64> = reps.iter().map(|r| r.max[k]).collect();
        levels.push(LevelSummary {
            sigma: s,
            small_ratio: small as f64 / n as f64,
            lil_mean: mean(&lil),
            lil_quantiles: [quantile(&lil, 0.1), quantile(&lil, 0.5), quantile(&lil, 0.9)],
            running_max_mean: mean(&maxes),
        });
    }
    let sigma_end = *config.schedule.last().expect("nonempty schedule");
    let hits = reps.iter().filter(|r| r.exceeded).count();
    let exceedance = MCEstimate::proportion(hits, n, first_passage_probability(level, sigma_end));
    let crossings = (
        mean(&reps.iter().map(|r| r.crossings as f64).collect::<Vec<_>>()),
        mean(&reps.iter().map(|r| r.reference_crossings as f64).collect::<Vec<_>>()),
    );

    let top = levels.last().expect("nonempty schedule");
    let binomial_z = (exceedance.estimate - exceedance.theory).abs() / binomial_sd(exceedance.theory, n);
    let mut report = TestReport::new("diagnostics");
    report.check(Check::new("slln", top.small_ratio, Rule::AtLeast, 0.99)).check(Check::new(
        "running_max",
        binomial_z,
        Rule::AtMost,
        3.0,
    ));
    report
        .value("exceedance", exceedance.estimate)
        .value("exceedance_theory", exceedance.theory)
        .value("lil_median", top.lil_quantiles[1])
        .value("crossings", crossings.0)
        .value("reference_crossings", crossings.1);
    Ok(DiagnosticsReport { report, levels, exceedance, crossings })
}
