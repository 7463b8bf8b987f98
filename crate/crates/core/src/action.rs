//! The action `I_eta = iint grad eta(u)^T (u_t + f(u)_x) dx dt` over a
//! space-time window, its boundary form for entropy pairs, the weak-form
//! residual and numerical first variations.

use std::sync::Arc;

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::dlm::{make_path, shock_entropy_production, PathFamily, DEFAULT_ORDER};
use crate::entropy::{AffineShift, EntropyPair};
use crate::error::{Error, Result};
use crate::field::{Bump, Curve, CurveKind, PiecewiseField};
use crate::linalg::{inf_norm, State};
use crate::quadrature::{breakpoints, GaussLegendre};
use crate::system::{flux_eval, jacobian_eval};

pub const SPACE_TIME_ORDER: usize = 24;
pub const SHOCK_TIME_ORDER: usize = 16;
/// Relative Richardson bound on the smooth part before it is reported unconverged.
pub const SMOOTH_TOL: f64 = 1e-6;
pub const BOUNDARY_TOL: f64 = 1e-13;
const BOUNDARY_ORDER: usize = 16;
const BOUNDARY_DEPTH: usize = 14;
pub const ROUTE_TOL: f64 = 1e-8;
/// `|Delta(eps)|` below this counts as zero.
pub const STATIONARY_TOL: f64 = 1e-8;
/// A first-order variation must exceed `NONZERO_FACTOR * eps` at the largest `eps`.
pub const NONZERO_FACTOR: f64 = 1e-4;
pub const ORDER_TOL: f64 = 0.1;
pub const DEFAULT_SCHEDULE: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub t1: f64,
    pub t2: f64,
    pub a: f64,
    pub b: f64,
}

impl Window {
    pub fn new(t1: f64, t2: f64, a: f64, b: f64) -> Result<Self> {
        let w = Self { t1, t2, a, b };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t1, self.t2, self.a, self.b].iter().all(|v| v.is_finite());
        if !finite || !(self.t1 < self.t2) || !(self.a < self.b) {
            return Err(Error::WindowInvalid(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn check_in(&self, field: &PiecewiseField) -> Result<()> {
        self.validate()?;
        if self.t1 < field.t_start() || self.t2 > field.t_end() {
            return Err(Error::WindowInvalid(format!(
                "[{}, {}] leaves the field's validity [{}, {}]",
                self.t1,
                self.t2,
                field.t_start(),
                field.t_end()
            )));
        }
        Ok(())
    }

    /// Strict containment of the bump support.
    pub fn contains(&self, bump: &Bump) -> bool {
        let (tl, th) = bump.t_range();
        let (xl, xh) = bump.x_range();
        tl > self.t1 && th < self.t2 && xl > self.a && xh < self.b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ActionOptions {
    #[serde(default = "default_space_time_order")]
    pub space_time_order: usize,
    #[serde(default = "default_shock_time_order")]
    pub shock_time_order: usize,
    #[serde(default = "default_path")]
    pub path: PathFamily,
    #[serde(default = "default_path_order")]
    pub path_order: usize,
}

fn default_space_time_order() -> usize {
    SPACE_TIME_ORDER
}
fn default_shock_time_order() -> usize {
    SHOCK_TIME_ORDER
}
fn default_path() -> PathFamily {
    PathFamily::Straight
}
fn default_path_order() -> usize {
    DEFAULT_ORDER
}

impl Default for ActionOptions {
    fn default() -> Self {
        Self {
            space_time_order: SPACE_TIME_ORDER,
            shock_time_order: SHOCK_TIME_ORDER,
            path: PathFamily::Straight,
            path_order: DEFAULT_ORDER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ShockPart {
    pub curve: usize,
    pub kind: CurveKind,
    pub t_enter: f64,
    pub t_exit: f64,
    pub contribution: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ActionReport {
    pub system_id: String,
    pub pair_id: String,
    pub window: Window,
    pub total: f64,
    pub smooth_part: f64,
    pub smooth_error: f64,
    pub shock_parts: Vec<ShockPart>,
    /// Boundary form; only for compatible pairs of conservative systems.
    pub boundary_route: Option<f64>,
    pub route_discrepancy: Option<f64>,
    pub space_time_order: usize,
    pub shock_time_order: usize,
    pub path_family: String,
    pub path_order: usize,
}

/// Times in `[t1, t2]` where `curve` crosses any of `xs`.
fn crossing_times<'a>(curve: &'a Curve, xs: impl IntoIterator<Item = f64> + 'a) -> impl Iterator<Item = f64> + 'a {
    xs.into_iter().filter_map(move |x| curve.time_at(x))
}

fn bump_x_breaks(field: &PiecewiseField) -> Vec<f64> {
    field.bumps().iter().flat_map(|b| b.x_breaks()).collect()
}

fn bump_t_breaks(field: &PiecewiseField) -> Vec<f64> {
    field.bumps().iter().flat_map(|b| b.t_breaks()).collect()
}

/// `grad eta(u)^T (u_t + A(u) u_x)` in region `r`.
pub(crate) fn residual_density(field: &PiecewiseField, pair: &dyn EntropyPair, r: usize, t: f64, x: f64) -> Result<f64> {
    let jet = field.region_jet(r, t, x);
    let a = jacobian_eval(field.system().as_ref(), &jet.u, 0)?;
    let g = pair.grad(&jet.u)?;
    Ok(g.dot(&(jet.ut + a * jet.ux)))
}

/// Tensor Gauss quadrature of `g` over the part of region `r` inside the
/// window. Inner nodes are mapped onto `[max(a, X_l(t)), min(b, X_r(t))]`,
/// which places them at fixed similarity coordinates inside fans.
fn region_integral(
    field: &PiecewiseField,
    r: usize,
    window: &Window,
    rule: &GaussLegendre,
    g: &(dyn Fn(usize, f64, f64) -> Result<f64> + Sync),
) -> Result<f64> {
    let curves = field.curves();
    let left = r.checked_sub(1).map(|i| &curves[i]);
    let right = curves.get(r);
    let bx = bump_x_breaks(field);
    let mut tb = bump_t_breaks(field);
    for c in left.into_iter().chain(right) {
        tb.extend(crossing_times(c, [window.a, window.b].into_iter().chain(bx.iter().copied())));
    }
    if let (Some(l), Some(rc)) = (left, right) {
        if l.speed != rc.speed {
            tb.push(l.t0 + (rc.position(l.t0) - l.x0) / (l.speed - rc.speed));
        }
    }
    let t_breaks = breakpoints(window.t1, window.t2, tb);
    let bounds = |t: f64| {
        let lo = left.map_or(window.a, |c| c.position(t).max(window.a));
        let hi = right.map_or(window.b, |c| c.position(t).min(window.b));
        (lo, hi)
    };
    let mut total = 0.0;
    for w in t_breaks.windows(2) {
        for (t, wt) in rule.mapped(w[0], w[1]) {
            let (lo, hi) = bounds(t);
            if !(hi > lo) {
                continue;
            }
            let inner = breakpoints(lo, hi, bx.iter().copied());
            let mut acc = 0.0;
            for p in inner.windows(2) {
                acc += rule.integrate(p[0], p[1], |x| g(r, t, x))?;
            }
            total += wt * acc;
        }
    }
    Ok(total)
}

/// `iint g` over all smooth regions at orders `n` and `n/2`.
fn smooth_integral(
    field: &PiecewiseField,
    window: &Window,
    order: usize,
    g: &(dyn Fn(usize, f64, f64) -> Result<f64> + Sync),
) -> Result<(f64, f64)> {
    let fine = GaussLegendre::new(order);
    let coarse = GaussLegendre::new((order / 2).max(1));
    let parts = (0..field.pieces().len())
        .into_par_iter()
        .map(|r| Ok((region_integral(field, r, window, &fine, g)?, region_integral(field, r, window, &coarse, g)?)))
        .collect::<Result<Vec<_>>>()?;
    let value: f64 = parts.iter().map(|p| p.0).sum();
    let error: f64 = parts.iter().map(|p| (p.0 - p.1).abs()).sum();
    Ok((value, error))
}

/// Time interval during which curve `c` lies strictly inside `(a, b)`.
fn inside_interval(c: &Curve, window: &Window) -> Option<(f64, f64)> {
    let (lo, hi) = if c.speed == 0.0 {
        if c.x0 > window.a && c.x0 < window.b {
            (window.t1, window.t2)
        } else {
            return None;
        }
    } else {
        let ta = c.time_at(window.a).expect("moving curve");
        let tb = c.time_at(window.b).expect("moving curve");
        (ta.min(tb).max(window.t1), ta.max(tb).min(window.t2))
    };
    (hi > lo).then_some((lo, hi))
}

fn shock_part(
    field: &PiecewiseField,
    pair: &dyn EntropyPair,
    i: usize,
    window: &Window,
    options: &ActionOptions,
) -> Result<Option<ShockPart>> {
    let c = &field.curves()[i];
    let Some((t_enter, t_exit)) = inside_interval(c, window) else {
        return Ok(None);
    };
    let system = field.system().as_ref();
    let mut tb = bump_t_breaks(field);
    tb.extend(crossing_times(c, bump_x_breaks(field)));
    let breaks = breakpoints(t_enter, t_exit, tb);
    let production = |t: f64| -> Result<f64> {
        let (l, r) = field.traces(i, t);
        if inf_norm(&(&r - &l)) == 0.0 {
            return Ok(0.0);
        }
        let path = make_path(&options.path, &l, &r, Some(system))?;
        Ok(shock_entropy_production(system, pair, &[1.0], c.speed, &path, options.path_order)?.value)
    };
    let fine = GaussLegendre::new(options.shock_time_order);
    let coarse = GaussLegendre::new((options.shock_time_order / 2).max(1));
    let mut value = 0.0;
    let mut error = 0.0;
    for w in breaks.windows(2) {
        let hi = fine.integrate(w[0], w[1], production)?;
        let lo = coarse.integrate(w[0], w[1], production)?;
        value += hi;
        error += (hi - lo).abs();
    }
    Ok(Some(ShockPart { curve: i, kind: c.kind, t_enter, t_exit, contribution: value, error_estimate: error }))
}

/// Smooth-region quadrature plus the time integral of shock entropy
/// production along every discontinuity inside the window.
pub fn action_interior(
    pair: &dyn EntropyPair,
    field: &PiecewiseField,
    window: &Window,
    options: &ActionOptions,
) -> Result<ActionReport> {
    window.check_in(field)?;
    let density = |r: usize, t: f64, x: f64| residual_density(field, pair, r, t, x);
    let (smooth_part, smooth_error) = smooth_integral(field, window, options.space_time_order, &density)?;
    if smooth_error > SMOOTH_TOL * (1.0 + smooth_part.abs()) {
        return Err(Error::QuadratureNotConverged { value: smooth_part, error: smooth_error });
    }
    let shock_parts = (0..field.curves().len())
        .into_par_iter()
        .filter(|&i| field.curves()[i].is_discontinuity())
        .map(|i| shock_part(field, pair, i, window, options))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let total = smooth_part + shock_parts.iter().map(|s| s.contribution).sum::<f64>();
    let boundary_route = if pair.compatible() && field.system().is_conservative() {
        Some(action_boundary(pair, field, window)?)
    } else {
        None
    };
    Ok(ActionReport {
        system_id: field.system_id().to_string(),
        pair_id: pair.id(),
        window: *window,
        total,
        smooth_part,
        smooth_error,
        shock_parts,
        boundary_route,
        route_discrepancy: boundary_route.map(|b| (total - b).abs()),
        space_time_order: options.space_time_order,
        shock_time_order: options.shock_time_order,
        path_family: options.path.label(),
        path_order: options.path_order,
    })
}

/// Adaptive Gauss quadrature of a vector integrand, refining on the sup norm.
fn adaptive_vec(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    depth: usize,
    f: &dyn Fn(f64) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let apply = |lo: f64, hi: f64| -> Result<Vec<f64>> {
        let mut acc: Option<Vec<f64>> = None;
        for (x, w) in rule.mapped(lo, hi) {
            let v = f(x)?;
            let acc = acc.get_or_insert_with(|| vec![0.0; v.len()]);
            for (s, vi) in acc.iter_mut().zip(v) {
                *s += w * vi;
            }
        }
        Ok(acc.unwrap_or_default())
    };
    fn step(
        apply: &dyn Fn(f64, f64) -> Result<Vec<f64>>,
        a: f64,
        b: f64,
        whole: Vec<f64>,
        depth: usize,
    ) -> Result<Vec<f64>> {
        let mid = 0.5 * (a + b);
        let l = apply(a, mid)?;
        let r = apply(mid, b)?;
        let refined: Vec<f64> = l.iter().zip(&r).map(|(x, y)| x + y).collect();
        let err = refined.iter().zip(&whole).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let scale = 1.0 + refined.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if err <= BOUNDARY_TOL * scale {
            return Ok(refined);
        }
        if depth == 0 {
            return Err(Error::QuadratureNotConverged { value: refined.first().copied().unwrap_or(0.0), error: err });
        }
        let lv = step(apply, a, mid, l, depth - 1)?;
        let rv = step(apply, mid, b, r, depth - 1)?;
        Ok(lv.iter().zip(&rv).map(|(x, y)| x + y).collect())
    }
    let whole = apply(a, b)?;
    step(&apply, a, b, whole, depth)
}

fn state_at(field: &PiecewiseField, t: f64, x: f64) -> State {
    field.region_jet(field.region_of(t, x), t, x).u
}

type VecFn<'a> = dyn Fn(&State) -> Result<Vec<f64>> + Sync + 'a;

/// `int_a^b D(u) dx |_{t1}^{t2} + int_{t1}^{t2} [F(u(t, b)) - F(u(t, a))] dt`,
/// split at wave positions and bump edges.
fn boundary_functional(field: &PiecewiseField, window: &Window, density: &VecFn, flux: &VecFn) -> Result<Vec<f64>> {
    window.check_in(field)?;
    let rule = GaussLegendre::new(BOUNDARY_ORDER);
    let bx = bump_x_breaks(field);
    let bt = bump_t_breaks(field);
    let slice = |t: f64| -> Result<Vec<f64>> {
        let xs = field.curves().iter().map(|c| c.position(t)).chain(bx.iter().copied());
        let breaks = breakpoints(window.a, window.b, xs);
        let mut acc: Option<Vec<f64>> = None;
        for w in breaks.windows(2) {
            let part = adaptive_vec(&rule, w[0], w[1], BOUNDARY_DEPTH, &|x| density(&state_at(field, t, x)))?;
            let acc = acc.get_or_insert_with(|| vec![0.0; part.len()]);
            acc.iter_mut().zip(part).for_each(|(s, p)| *s += p);
        }
        Ok(acc.unwrap_or_default())
    };
    let edge = |x: f64| -> Result<Vec<f64>> {
        let ts = field.curves().iter().filter_map(|c| c.time_at(x)).chain(bt.iter().copied());
        let breaks = breakpoints(window.t1, window.t2, ts);
        let mut acc: Option<Vec<f64>> = None;
        for w in breaks.windows(2) {
            let part = adaptive_vec(&rule, w[0], w[1], BOUNDARY_DEPTH, &|t| flux(&state_at(field, t, x)))?;
            let acc = acc.get_or_insert_with(|| vec![0.0; part.len()]);
            acc.iter_mut().zip(part).for_each(|(s, p)| *s += p);
        }
        Ok(acc.unwrap_or_default())
    };
    let terms = [(window.t2, true), (window.t1, true), (window.b, false), (window.a, false)]
        .into_par_iter()
        .map(|(s, is_time)| if is_time { slice(s) } else { edge(s) })
        .collect::<Result<Vec<_>>>()?;
    let n = terms.iter().map(Vec::len).max().unwrap_or(0);
    Ok((0..n).map(|k| terms[0][k] - terms[1][k] + terms[2][k] - terms[3][k]).collect())
}

/// `int eta dx |_{t1}^{t2} + int [q(b) - q(a)] dt`; requires a compatible pair.
pub fn action_boundary(pair: &dyn EntropyPair, field: &PiecewiseField, window: &Window) -> Result<f64> {
    if !pair.compatible() || !field.system().is_conservative() {
        return Err(Error::PairNotCompatible(pair.id()));
    }
    let v = boundary_functional(field, window, &|u| Ok(vec![pair.eta(u)?]), &|u| Ok(vec![pair.flux(u, 0)?]))?;
    Ok(v[0])
}

/// Per component, `int u dx |_{t1}^{t2} + int [f(u(t, b)) - f(u(t, a))] dt`.
pub fn weak_residual(field: &PiecewiseField, window: &Window) -> Result<Vec<f64>> {
    let system = field.system().as_ref();
    if !system.is_conservative() {
        return Err(Error::NonConservative(system.id().to_string()));
    }
    boundary_functional(field, window, &|u| Ok(u.iter().copied().collect()), &|u| {
        Ok(flux_eval(system, u, 0)?.iter().copied().collect())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct AffineShiftReport {
    pub shift: Vec<f64>,
    pub weak_residual: Vec<f64>,
    /// `<c, weak residual>`.
    pub via_residual: f64,
    /// `I_{eta_c} - I_eta` from two interior evaluations.
    pub direct: f64,
    pub discrepancy: f64,
}

/// `I_{eta_c} - I_eta = <c, weak_residual>`, cross-checked by direct evaluation
/// with the shifted pair.
pub fn affine_shift_action(
    pair: Arc<dyn EntropyPair>,
    shift: &[f64],
    field: &PiecewiseField,
    window: &Window,
    options: &ActionOptions,
) -> Result<AffineShiftReport> {
    let n = field.system().equations();
    if shift.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: shift.len() });
    }
    let residual = weak_residual(field, window)?;
    let via_residual: f64 = shift.iter().zip(&residual).map(|(c, r)| c * r).sum();
    let shifted = AffineShift::new(pair.clone(), field.system().clone(), State::from_column_slice(shift))?;
    let base = action_interior(pair.as_ref(), field, window, options)?;
    let moved = action_interior(&shifted, field, window, options)?;
    let direct = moved.total - base.total;
    Ok(AffineShiftReport {
        shift: shift.to_vec(),
        weak_residual: residual,
        via_residual,
        direct,
        discrepancy: (direct - via_residual).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Stationarity {
    /// Every `|Delta(eps)|` is below the zero threshold.
    Stationary,
    /// Fitted order near 1 and the largest `eps` clears the nonzero threshold.
    FirstOrder,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct FirstVariation {
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Least-squares slope of `ln |Delta|` against `ln eps`.
    pub fitted_order: Option<f64>,
    pub max_abs_delta: f64,
    pub zero_threshold: f64,
    pub nonzero_factor: f64,
    pub classification: Stationarity,
}

fn fit_order(eps: &[f64], deltas: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        eps.iter().zip(deltas).filter(|(e, d)| **e > 0.0 && **d != 0.0).map(|(e, d)| (e.ln(), d.abs().ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `Delta(eps) = I_eta(field + eps d B) - I_eta(field)` over `schedule`. The
/// amplitude stored in `bump` is ignored.
pub fn first_variation(
    pair: &dyn EntropyPair,
    field: &PiecewiseField,
    bump: &Bump,
    schedule: &[f64],
    window: &Window,
    options: &ActionOptions,
) -> Result<FirstVariation> {
    window.check_in(field)?;
    if !window.contains(bump) {
        return Err(Error::SupportViolation(format!("bump support not strictly inside window {window:?}")));
    }
    let base = action_interior(pair, field, window, options)?.total;
    let deltas = schedule
        .par_iter()
        .map(|&eps| {
            if eps == 0.0 {
                return Ok(0.0);
            }
            let perturbed = field.perturb(&bump.with_amplitude(eps))?;
            Ok(action_interior(pair, &perturbed, window, options)?.total - base)
        })
        .collect::<Result<Vec<_>>>()?;
    let fitted_order = fit_order(schedule, &deltas);
    let max_abs_delta = deltas.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let largest = schedule.iter().zip(&deltas).max_by(|a, b| a.0.total_cmp(b.0));
    let classification = if max_abs_delta < STATIONARY_TOL {
        Stationarity::Stationary
    } else if matches!(fitted_order, Some(k) if (k - 1.0).abs() <= ORDER_TOL)
        && matches!(largest, Some((e, d)) if d.abs() > NONZERO_FACTOR * e)
    {
        Stationarity::FirstOrder
    } else {
        Stationarity::Inconclusive
    };
    Ok(FirstVariation {
        epsilons: schedule.to_vec(),
        deltas,
        fitted_order,
        max_abs_delta,
        zero_threshold: STATIONARY_TOL,
        nonzero_factor: NONZERO_FACTOR,
        classification,
    })
}
