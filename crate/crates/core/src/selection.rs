//! Entropy-rate selection among candidate weak solutions: the local rate
//! `d+/dt int_Omega eta dx + [q]_a^b` on a window and the global rate on the
//! hull of all waves.

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::action::{residual_density, ActionOptions};
use crate::dlm::{make_path, shock_entropy_production};
use crate::entropy::EntropyPair;
use crate::error::{Error, Result};
use crate::field::{PiecewiseField, Side};
use crate::linalg::inf_norm;
use crate::quadrature::{breakpoints, GaussLegendre};

/// Rates closer than this are reported as ties.
pub const TIE_BAND: f64 = 1e-9;
pub const AGREEMENT_TOL: f64 = 1e-10;
const AGREEMENT_SAMPLES: usize = 33;
/// Distance added on both sides of the wave hull for the global rate.
pub const HULL_MARGIN: f64 = 1.0;
const RATE_ORDER: usize = 24;

#[derive(Debug, Clone)]
pub struct Candidate {
    pub label: String,
    pub field: PiecewiseField,
}

impl Candidate {
    pub fn new(label: impl Into<String>, field: PiecewiseField) -> Self {
        Self { label: label.into(), field }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CandidateRate {
    pub label: String,
    pub rate: f64,
    /// Sum of shock productions inside the domain.
    pub shock_rate: f64,
    /// Quadrature of the smooth residual at time `t`.
    pub smooth_rate: f64,
    pub shocks_counted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RankingReport {
    pub pair_id: String,
    pub t: f64,
    pub domain: [f64; 2],
    /// In input order.
    pub rates: Vec<CandidateRate>,
    /// Labels sorted by ascending rate.
    pub ordering: Vec<String>,
    pub ties: Vec<Vec<String>>,
    pub selected: Vec<String>,
    pub tie_band: f64,
    pub agreement_tolerance: f64,
    pub notes: Vec<String>,
}

/// Instantaneous rate at time `t` on `(a, b)`: shock productions of the
/// discontinuities inside plus the smooth residual.
pub fn local_entropy_rate(
    pair: &dyn EntropyPair,
    candidate: &Candidate,
    t: f64,
    domain: (f64, f64),
    options: &ActionOptions,
) -> Result<CandidateRate> {
    let field = &candidate.field;
    field.check_time(t)?;
    let (a, b) = domain;
    if !(a < b) {
        return Err(Error::WindowInvalid(format!("domain ({a}, {b})")));
    }
    let system = field.system().as_ref();
    let mut shock_rate = 0.0;
    let mut shocks_counted = 0;
    for (i, c) in field.curves().iter().enumerate() {
        let x = c.position(t);
        if !c.is_discontinuity() || !(x > a && x < b) {
            continue;
        }
        let (l, r) = field.traces(i, t);
        shocks_counted += 1;
        if inf_norm(&(&r - &l)) == 0.0 {
            continue;
        }
        let path = make_path(&options.path, &l, &r, Some(system))?;
        shock_rate += shock_entropy_production(system, pair, &[1.0], c.speed, &path, options.path_order)?.value;
    }
    let xs = field.curves().iter().map(|c| c.position(t)).chain(field.bumps().iter().flat_map(|bp| bp.x_breaks()));
    let rule = GaussLegendre::new(RATE_ORDER);
    let mut smooth_rate = 0.0;
    for w in breakpoints(a, b, xs).windows(2) {
        let r = field.region_of(t, 0.5 * (w[0] + w[1]));
        smooth_rate += rule.integrate(w[0], w[1], |x| residual_density(field, pair, r, t, x))?;
    }
    Ok(CandidateRate { label: candidate.label.clone(), rate: shock_rate + smooth_rate, shock_rate, smooth_rate, shocks_counted })
}

fn check_agreement(candidates: &[Candidate], t: f64, (a, b): (f64, f64)) -> Result<()> {
    let Some(first) = candidates.first() else {
        return Ok(());
    };
    for k in 0..AGREEMENT_SAMPLES {
        let x = a + (b - a) * (k as f64 + 0.5) / AGREEMENT_SAMPLES as f64;
        let u0 = first.field.value(t, x, Side::Left)?;
        for other in &candidates[1..] {
            let u = other.field.value(t, x, Side::Left)?;
            let diff = inf_norm(&(&u - &u0));
            if diff > AGREEMENT_TOL * (1.0 + inf_norm(&u0)) {
                return Err(Error::CandidatesDisagreeAtT {
                    first: first.label.clone(),
                    second: other.label.clone(),
                    t,
                    x,
                    diff,
                });
            }
        }
    }
    Ok(())
}

fn rank(pair: &dyn EntropyPair, rates: Vec<CandidateRate>, t: f64, domain: (f64, f64), note: String) -> RankingReport {
    let mut sorted: Vec<&CandidateRate> = rates.iter().collect();
    sorted.sort_by(|x, y| x.rate.total_cmp(&y.rate));
    let mut ties: Vec<Vec<String>> = Vec::new();
    let mut group: Vec<&CandidateRate> = Vec::new();
    for c in &sorted {
        if group.first().is_some_and(|g| c.rate - g.rate > TIE_BAND) {
            if group.len() > 1 {
                ties.push(group.iter().map(|g| g.label.clone()).collect());
            }
            group.clear();
        }
        group.push(c);
    }
    if group.len() > 1 {
        ties.push(group.iter().map(|g| g.label.clone()).collect());
    }
    let selected = match sorted.first() {
        Some(min) => sorted.iter().filter(|c| c.rate - min.rate <= TIE_BAND).map(|c| c.label.clone()).collect(),
        None => Vec::new(),
    };
    RankingReport {
        pair_id: pair.id(),
        t,
        domain: [domain.0, domain.1],
        ordering: sorted.iter().map(|c| c.label.clone()).collect(),
        rates,
        ties,
        selected,
        tie_band: TIE_BAND,
        agreement_tolerance: AGREEMENT_TOL,
        notes: vec![note],
    }
}

fn rates(
    pair: &dyn EntropyPair,
    candidates: &[Candidate],
    t: f64,
    domain: (f64, f64),
    options: &ActionOptions,
) -> Result<Vec<CandidateRate>> {
    candidates.par_iter().map(|c| local_entropy_rate(pair, c, t, domain, options)).collect()
}

/// Ranks candidates by their local rate on `domain`, ascending; ties within
/// the band are reported and all tied minima are selected.
pub fn rank_local_maxent(
    pair: &dyn EntropyPair,
    candidates: &[Candidate],
    t: f64,
    domain: (f64, f64),
    options: &ActionOptions,
) -> Result<RankingReport> {
    check_agreement(candidates, t, domain)?;
    let rates = rates(pair, candidates, t, domain, options)?;
    let note = format!("candidates compared on {AGREEMENT_SAMPLES} samples at t={t}, tolerance {AGREEMENT_TOL:e}");
    Ok(rank(pair, rates, t, domain, note))
}

/// Global rate: the domain is the hull of all waves at `t` widened by
/// `HULL_MARGIN`. Candidates must agree at its edges so that boundary
/// fluxes cancel.
pub fn rank_global(
    pair: &dyn EntropyPair,
    candidates: &[Candidate],
    t: f64,
    options: &ActionOptions,
) -> Result<RankingReport> {
    let hull = candidates.iter().filter_map(|c| c.field.wave_hull(t)).fold(None, |acc: Option<(f64, f64)>, (lo, hi)| {
        Some(acc.map_or((lo, hi), |(a, b)| (a.min(lo), b.max(hi))))
    });
    let domain = match hull {
        Some((lo, hi)) => (lo - HULL_MARGIN, hi + HULL_MARGIN),
        None => (-HULL_MARGIN, HULL_MARGIN),
    };
    if let Some(first) = candidates.first() {
        for x in [domain.0, domain.1] {
            let u0 = first.field.value(t, x, Side::Left)?;
            for other in &candidates[1..] {
                let u = other.field.value(t, x, Side::Left)?;
                if inf_norm(&(&u - &u0)) > AGREEMENT_TOL * (1.0 + inf_norm(&u0)) {
                    return Err(Error::NonCompactWaveSupport { x });
                }
            }
        }
    }
    let mut report = rank_local_maxent(pair, candidates, t, domain, options)?;
    report.notes.push(format!("global domain is the wave hull widened by {HULL_MARGIN}"));
    Ok(report)
}
