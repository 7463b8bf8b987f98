//! Piecewise-smooth candidate weak solutions in one space dimension.
//!
//! A field is a left-to-right sequence of pieces separated by straight wave
//! curves `x = x0 + speed (t - t0)`. Pieces are constants, centred
//! rarefaction fans (closed form in `xi = (x - x0) / (t - t0)`) or
//! travelling waves. Bumps add `eps d B(t, x)` on top of every piece.

mod bump;
mod riemann;

pub use bump::{smoothstep_profile, Bump};
pub use riemann::{
    euler_star_state, make_expansion_shock, solve_riemann_euler, solve_riemann_euler_with, solve_riemann_scalar,
    Primitive1, StarMethod, StarState, WaveChoice,
};

use std::sync::Arc;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inf_norm, to_vec, State};
use crate::system::{flux_eval, ScalarFlux, System};

/// Trace continuity tolerance across fan edges.
pub const TRACE_TOL: f64 = 1e-10;
/// Rankine–Hugoniot tolerance for discontinuities declared exact.
pub const RH_TOL: f64 = 1e-10;
/// Grid used to probe admissibility of a perturbed field on the bump support.
const ADMISSIBILITY_GRID: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Shock,
    Contact,
    FanEdge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Curve {
    pub kind: CurveKind,
    pub t0: f64,
    pub x0: f64,
    pub speed: f64,
    /// Rankine–Hugoniot is enforced at construction.
    #[serde(default)]
    pub exact: bool,
}

impl Curve {
    pub fn new(kind: CurveKind, t0: f64, x0: f64, speed: f64, exact: bool) -> Self {
        Self { kind, t0, x0, speed, exact }
    }

    pub fn position(&self, t: f64) -> f64 {
        self.x0 + self.speed * (t - self.t0)
    }

    pub fn is_discontinuity(&self) -> bool {
        self.kind != CurveKind::FanEdge
    }

    /// Time at which the curve passes through `x`, if it moves.
    pub fn time_at(&self, x: f64) -> Option<f64> {
        (self.speed != 0.0).then(|| self.t0 + (x - self.x0) / self.speed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum FanFamily {
    /// Left-facing wave, characteristic speed `v - c`.
    Left,
    /// Right-facing wave, characteristic speed `v + c`.
    Right,
}

/// Smooth state function of one region.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    Constant(State),
    /// `u = (f')^{-1}(xi)`.
    ScalarFan { flux: ScalarFlux, t0: f64, x0: f64, xi: (f64, f64) },
    /// 1D gamma-law rarefaction anchored at the state ahead of the wave.
    EulerFan { gamma: f64, family: FanFamily, ahead: Primitive1, t0: f64, x0: f64, xi: (f64, f64) },
    /// `u = base + e_k amplitude sin(wavenumber (x - speed t))`.
    Travelling { base: State, component: usize, speed: f64, amplitude: f64, wavenumber: f64 },
}

/// Value and first partial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub u: State,
    pub ut: State,
    pub ux: State,
}

impl Jet {
    fn constant(u: State) -> Self {
        let n = u.len();
        Self { u, ut: State::zeros(n), ux: State::zeros(n) }
    }

    /// From `u(xi)` and `du/dxi` with `xi = (x - x0) / tau`.
    fn similarity(u: State, du: State, xi: f64, tau: f64) -> Self {
        Self { ux: &du / tau, ut: &du * (-xi / tau), u }
    }
}

/// Which side of a fan to use when it degenerates to a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    Lo,
    Hi,
}

fn euler_fan_state(gamma: f64, family: FanFamily, w: &Primitive1, xi: f64) -> (State, State) {
    let g1 = gamma - 1.0;
    let gp = gamma + 1.0;
    let c = (gamma * w.p / w.rho).sqrt();
    let (base, dbase) = match family {
        FanFamily::Left => (2.0 / gp + g1 / (gp * c) * (w.v - xi), -g1 / (gp * c)),
        FanFamily::Right => (2.0 / gp - g1 / (gp * c) * (w.v - xi), g1 / (gp * c)),
    };
    let sign = if family == FanFamily::Left { 1.0 } else { -1.0 };
    let v = 2.0 / gp * (sign * c + 0.5 * g1 * w.v + xi);
    let dv = 2.0 / gp;
    let er = 2.0 / g1;
    let ep = 2.0 * gamma / g1;
    let rho = w.rho * base.powf(er);
    let drho = w.rho * er * base.powf(er - 1.0) * dbase;
    let p = w.p * base.powf(ep);
    let dp = w.p * ep * base.powf(ep - 1.0) * dbase;
    let u = State::from_column_slice(&[rho, rho * v, p / g1 + 0.5 * rho * v * v]);
    let du = State::from_column_slice(&[drho, drho * v + rho * dv, dp / g1 + 0.5 * drho * v * v + rho * v * dv]);
    (u, du)
}

impl Piece {
    fn jet(&self, t: f64, x: f64, degenerate: Edge) -> Jet {
        match self {
            Self::Constant(u) => Jet::constant(u.clone()),
            Self::ScalarFan { flux, t0, x0, xi: (lo, hi) } => {
                let tau = t - t0;
                let value = |xi: f64| State::from_element(1, flux.inverse_df(xi).unwrap_or(f64::NAN));
                if tau <= 0.0 {
                    return Jet::constant(value(if degenerate == Edge::Lo { *lo } else { *hi }));
                }
                let xi = ((x - x0) / tau).clamp(*lo, *hi);
                let u = value(xi);
                let du = State::from_element(1, 1.0 / flux.d2f(u[0]));
                Jet::similarity(u, du, xi, tau)
            }
            Self::EulerFan { gamma, family, ahead, t0, x0, xi: (lo, hi) } => {
                let tau = t - t0;
                if tau <= 0.0 {
                    let xi = if degenerate == Edge::Lo { *lo } else { *hi };
                    return Jet::constant(euler_fan_state(*gamma, *family, ahead, xi).0);
                }
                let xi = ((x - x0) / tau).clamp(*lo, *hi);
                let (u, du) = euler_fan_state(*gamma, *family, ahead, xi);
                Jet::similarity(u, du, xi, tau)
            }
            Self::Travelling { base, component, speed, amplitude, wavenumber } => {
                let phase = wavenumber * (x - speed * t);
                let mut jet = Jet::constant(base.clone());
                jet.u[*component] += amplitude * phase.sin();
                let slope = amplitude * wavenumber * phase.cos();
                jet.ux[*component] = slope;
                jet.ut[*component] = -speed * slope;
                jet
            }
        }
    }

    fn len(&self) -> usize {
        match self {
            Self::Constant(u) | Self::Travelling { base: u, .. } => u.len(),
            Self::ScalarFan { .. } => 1,
            Self::EulerFan { .. } => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Constant(_) => "constant",
            Self::ScalarFan { .. } | Self::EulerFan { .. } => "rarefaction",
            Self::Travelling { .. } => "travelling",
        }
    }

    /// Exact solutions in closed form; residual quadrature is still applied.
    pub fn is_fan(&self) -> bool {
        matches!(self, Self::ScalarFan { .. } | Self::EulerFan { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Result of a point query: a value, or both traces on a discontinuity.
#[derive(Debug, Clone, PartialEq)]
pub enum PointSample {
    Value(State),
    Interface { left: State, right: State },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ShockTrace {
    /// Index of the curve in the field.
    pub curve: usize,
    pub kind: CurveKind,
    pub position: f64,
    pub speed: f64,
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct PiecewiseField {
    system: Arc<dyn System>,
    curves: Vec<Curve>,
    pieces: Vec<Piece>,
    t_start: f64,
    t_end: f64,
    bumps: Vec<Bump>,
}

impl PiecewiseField {
    /// Validates ordering, trace continuity at fan edges and Rankine–Hugoniot
    /// at exact discontinuities. `t_end` is cut back to the first crossing of
    /// two curves.
    pub fn new(
        system: Arc<dyn System>,
        curves: Vec<Curve>,
        pieces: Vec<Piece>,
        t_start: f64,
        t_end: f64,
    ) -> Result<Self> {
        if system.dimension() != 1 {
            return Err(Error::InvalidField(format!("fields are one-dimensional; `{}` has d={}", system.id(), system.dimension())));
        }
        if pieces.len() != curves.len() + 1 {
            return Err(Error::InvalidField(format!("{} curves need {} pieces, got {}", curves.len(), curves.len() + 1, pieces.len())));
        }
        let n = system.equations();
        if let Some(p) = pieces.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: p.len() });
        }
        if let Some(Piece::Travelling { component, .. }) = pieces.iter().find(|p| matches!(p, Piece::Travelling { component, .. } if *component >= n)) {
            return Err(Error::InvalidField(format!("travelling component {component} out of range")));
        }
        if !(t_start.is_finite() && t_end > t_start) || curves.iter().any(|c| !(c.t0.is_finite() && c.x0.is_finite() && c.speed.is_finite())) {
            return Err(Error::InvalidField(format!("invalid time range [{t_start}, {t_end}] or curve data")));
        }
        let mut t_end = t_end;
        for (i, w) in curves.windows(2).enumerate() {
            let gap = w[1].position(t_start) - w[0].position(t_start);
            if gap < -1e-12 * (1.0 + w[0].position(t_start).abs()) {
                return Err(Error::InvalidField(format!("curves {i} and {} are out of order at t={t_start}", i + 1)));
            }
            let closing = w[0].speed - w[1].speed;
            if closing > 0.0 {
                t_end = t_end.min(t_start + gap.max(0.0) / closing);
            }
        }
        if !(t_end > t_start) {
            return Err(Error::InvalidField("curves interact at the start time".into()));
        }
        let field = Self { system, curves, pieces, t_start, t_end, bumps: Vec::new() };
        field.validate_traces()?;
        Ok(field)
    }

    fn probe_time(&self) -> f64 {
        if self.t_end.is_finite() {
            0.5 * (self.t_start + self.t_end)
        } else {
            self.t_start + 1.0
        }
    }

    fn validate_traces(&self) -> Result<()> {
        let t = self.probe_time();
        for (i, c) in self.curves.iter().enumerate() {
            let (l, r) = self.traces(i, t);
            for u in [&l, &r] {
                self.system.admissible(u)?;
            }
            let scale = 1.0 + inf_norm(&l).max(inf_norm(&r));
            if c.kind == CurveKind::FanEdge && inf_norm(&(&r - &l)) > TRACE_TOL * scale {
                return Err(Error::InvalidField(format!("fan edge {i} is not continuous: {:?} vs {:?}", to_vec(&l), to_vec(&r))));
            }
            if c.exact && c.is_discontinuity() && self.system.is_conservative() {
                let res = self.rh_residual(c.speed, &l, &r)?;
                if res > RH_TOL * scale {
                    return Err(Error::InvalidField(format!("curve {i} violates Rankine–Hugoniot by {res:e}")));
                }
            }
        }
        Ok(())
    }

    /// `||-sigma [u] + [f]||_inf`.
    pub fn rh_residual(&self, sigma: f64, minus: &State, plus: &State) -> Result<f64> {
        let jump = plus - minus;
        let fjump = flux_eval(self.system.as_ref(), plus, 0)? - flux_eval(self.system.as_ref(), minus, 0)?;
        Ok(inf_norm(&(fjump - jump * sigma)))
    }

    pub fn system(&self) -> &Arc<dyn System> {
        &self.system
    }

    pub fn system_id(&self) -> &str {
        self.system.id()
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= self.t_start && t <= self.t_end) {
            return Err(Error::OutsideDomain { t, x: f64::NAN });
        }
        Ok(())
    }

    /// Jet of region `r` (between curves `r - 1` and `r`) including bumps.
    pub fn region_jet(&self, r: usize, t: f64, x: f64) -> Jet {
        self.region_jet_edge(r, t, x, Edge::Lo)
    }

    fn region_jet_edge(&self, r: usize, t: f64, x: f64, edge: Edge) -> Jet {
        let mut jet = self.pieces[r].jet(t, x, edge);
        for b in &self.bumps {
            let (du, dut, dux) = b.jet(t, x);
            jet.u += du;
            jet.ut += dut;
            jet.ux += dux;
        }
        jet
    }

    /// Left and right traces on curve `i` at time `t`.
    pub fn traces(&self, i: usize, t: f64) -> (State, State) {
        let x = self.curves[i].position(t);
        (self.region_jet_edge(i, t, x, Edge::Hi).u, self.region_jet_edge(i + 1, t, x, Edge::Lo).u)
    }

    /// Region containing `x` at time `t`, or the span of curves through `x`.
    fn locate(&self, t: f64, x: f64) -> std::result::Result<usize, (usize, usize)> {
        let scale = 1e-14 * (1.0 + x.abs());
        let below = self.curves.iter().take_while(|c| c.position(t) < x - scale).count();
        let on = self.curves[below..].iter().take_while(|c| (c.position(t) - x).abs() <= scale).count();
        if on == 0 {
            Ok(below)
        } else {
            Err((below, below + on))
        }
    }

    /// Region index of a point known to lie strictly inside a region.
    pub fn region_of(&self, t: f64, x: f64) -> usize {
        match self.locate(t, x) {
            Ok(r) => r,
            Err((lo, _)) => lo,
        }
    }

    pub fn sample(&self, t: f64, x: f64) -> Result<PointSample> {
        self.check_time(t).map_err(|_| Error::OutsideDomain { t, x })?;
        if !x.is_finite() {
            return Err(Error::OutsideDomain { t, x });
        }
        Ok(match self.locate(t, x) {
            Ok(r) => PointSample::Value(self.region_jet(r, t, x).u),
            Err((lo, hi)) => {
                let left = self.region_jet_edge(lo, t, x, Edge::Hi).u;
                let right = self.region_jet_edge(hi, t, x, Edge::Lo).u;
                if inf_norm(&(&right - &left)) <= TRACE_TOL * (1.0 + inf_norm(&left)) {
                    PointSample::Value(left)
                } else {
                    PointSample::Interface { left, right }
                }
            }
        })
    }

    /// One-sided value; the side only matters on a discontinuity.
    pub fn value(&self, t: f64, x: f64, side: Side) -> Result<State> {
        Ok(match self.sample(t, x)? {
            PointSample::Value(u) => u,
            PointSample::Interface { left, right } => match side {
                Side::Left => left,
                Side::Right => right,
            },
        })
    }

    /// Discontinuities at time `t` with both traces.
    pub fn shock_data(&self, t: f64) -> Result<Vec<ShockTrace>> {
        self.check_time(t)?;
        Ok(self
            .curves
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_discontinuity())
            .map(|(i, c)| {
                let (l, r) = self.traces(i, t);
                ShockTrace {
                    curve: i,
                    kind: c.kind,
                    position: c.position(t),
                    speed: c.speed,
                    minus: to_vec(&l),
                    plus: to_vec(&r),
                    exact: c.exact,
                }
            })
            .collect())
    }

    /// Adds `bump` on top of the field. Traces and curves are unchanged in
    /// position; the perturbation must stay inside the time domain and keep
    /// every state admissible.
    pub fn perturb(&self, bump: &Bump) -> Result<Self> {
        bump.validate()?;
        let n = self.system.equations();
        if bump.direction.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: bump.direction.len() });
        }
        let (lo, hi) = bump.t_range();
        if !(lo > self.t_start && hi < self.t_end) {
            return Err(Error::SupportViolation(format!(
                "bump time support [{lo}, {hi}] not inside field domain ({}, {})",
                self.t_start, self.t_end
            )));
        }
        let mut out = self.clone();
        out.bumps.push(bump.clone());
        if bump.amplitude != 0.0 {
            out.check_admissible_on(bump)?;
        }
        Ok(out)
    }

    fn check_admissible_on(&self, bump: &Bump) -> Result<()> {
        let (tl, th) = bump.t_range();
        let (xl, xh) = bump.x_range();
        let m = ADMISSIBILITY_GRID;
        for i in 0..=m {
            let t = tl + (th - tl) * i as f64 / m as f64;
            let mut xs: Vec<f64> = (0..=m).map(|k| xl + (xh - xl) * k as f64 / m as f64).collect();
            xs.extend(self.curves.iter().map(|c| c.position(t)).filter(|x| *x > xl && *x < xh));
            for x in xs {
                let states = match self.sample(t, x)? {
                    PointSample::Value(u) => vec![u],
                    PointSample::Interface { left, right } => vec![left, right],
                };
                for u in states {
                    self.system
                        .admissible(&u)
                        .map_err(|e| Error::AdmissibilityViolation(format!("at (t={t}, x={x}): {e}")))?;
                }
            }
        }
        Ok(())
    }

    /// Leftmost and rightmost wave positions at `t`, if any waves exist.
    pub fn wave_hull(&self, t: f64) -> Option<(f64, f64)> {
        let xs = self.curves.iter().map(|c| c.position(t));
        let lo = xs.clone().fold(f64::INFINITY, f64::min);
        let hi = xs.fold(f64::NEG_INFINITY, f64::max);
        (lo <= hi).then_some((lo, hi))
    }
}

/// Serializable summary of a field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct FieldDescription {
    pub system_id: String,
    pub t_start: f64,
    pub t_end: Option<f64>,
    pub curves: Vec<Curve>,
    /// Kind of each region, left to right.
    pub regions: Vec<String>,
    /// State at the left edge of each region, sampled at `t_start + 1`
    /// (or mid-domain for bounded fields).
    pub region_states: Vec<Vec<f64>>,
    pub bumps: Vec<Bump>,
}

impl PiecewiseField {
    pub fn describe(&self) -> FieldDescription {
        let t = self.probe_time();
        let region_states = (0..self.pieces.len())
            .map(|r| {
                let x = if r == 0 {
                    self.curves.first().map_or(0.0, |c| c.position(t)) - 1.0
                } else {
                    self.curves[r - 1].position(t)
                };
                to_vec(&self.region_jet_edge(r, t, x, Edge::Lo).u)
            })
            .collect();
        FieldDescription {
            system_id: self.system.id().to_string(),
            t_start: self.t_start,
            t_end: self.t_end.is_finite().then_some(self.t_end),
            curves: self.curves.clone(),
            regions: self.pieces.iter().map(|p| p.label().to_string()).collect(),
            region_states,
            bumps: self.bumps.clone(),
        }
    }
}

/// Constant field on the whole line.
pub fn constant_field(system: Arc<dyn System>, u: State) -> Result<PiecewiseField> {
    system.admissible(&u)?;
    PiecewiseField::new(system, Vec::new(), vec![Piece::Constant(u)], 0.0, f64::INFINITY)
}

/// Sample of `sample_field` used by tests and the CLI.
pub fn sample_field(field: &PiecewiseField, t: f64, x: f64) -> Result<PointSample> {
    field.sample(t, x)
}

pub fn shock_data(field: &PiecewiseField, t: f64) -> Result<Vec<ShockTrace>> {
    field.shock_data(t)
}

pub fn perturb_field(field: &PiecewiseField, bump: &Bump) -> Result<PiecewiseField> {
    field.perturb(bump)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::state;
    use crate::system::{Euler, ScalarLaw};
    use approx::assert_abs_diff_eq;

    #[test]
    fn euler_fan_derivative_matches_fd() {
        let w = Primitive1 { rho: 1.0, v: 0.2, p: 1.0 };
        for family in [FanFamily::Left, FanFamily::Right] {
            let xi = if family == FanFamily::Left { -0.9 } else { 1.3 };
            let h = 1e-6;
            let (_, du) = euler_fan_state(1.4, family, &w, xi);
            let fd = (euler_fan_state(1.4, family, &w, xi + h).0 - euler_fan_state(1.4, family, &w, xi - h).0) / (2.0 * h);
            assert!(inf_norm(&(du - fd)) < 1e-7);
        }
    }

    #[test]
    fn fan_head_matches_ahead_state() {
        let w = Primitive1 { rho: 1.0, v: 0.2, p: 1.0 };
        let c = (1.4f64).sqrt();
        let (u, _) = euler_fan_state(1.4, FanFamily::Left, &w, 0.2 - c);
        let e = Euler::new(1.4, 1).unwrap();
        assert!(inf_norm(&(u - e.conserved(1.0, &[0.2], 1.0))) < 1e-14);
    }

    #[test]
    fn out_of_order_curves_rejected() {
        let sys: Arc<dyn System> = Arc::new(ScalarLaw::burgers());
        let curves = vec![Curve::new(CurveKind::Shock, 0.0, 1.0, 0.0, false), Curve::new(CurveKind::Shock, 0.0, 0.0, 0.0, false)];
        let pieces = vec![Piece::Constant(state(&[0.0])), Piece::Constant(state(&[1.0])), Piece::Constant(state(&[2.0]))];
        assert!(matches!(PiecewiseField::new(sys, curves, pieces, 0.0, f64::INFINITY), Err(Error::InvalidField(_))));
    }

    #[test]
    fn converging_curves_cut_validity() {
        let sys: Arc<dyn System> = Arc::new(ScalarLaw::burgers());
        let curves = vec![Curve::new(CurveKind::Shock, 0.0, 0.0, 1.0, false), Curve::new(CurveKind::Shock, 0.0, 1.0, 0.0, false)];
        let pieces = vec![Piece::Constant(state(&[2.0])), Piece::Constant(state(&[1.0])), Piece::Constant(state(&[0.0]))];
        let f = PiecewiseField::new(sys, curves, pieces, 0.0, f64::INFINITY).unwrap();
        assert_abs_diff_eq!(f.t_end(), 1.0);
        assert!(matches!(f.sample(1.5, 0.0), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn inexact_rh_flagged() {
        let sys: Arc<dyn System> = Arc::new(ScalarLaw::burgers());
        let curves = vec![Curve::new(CurveKind::Shock, 0.0, 0.0, 0.6, true)];
        let pieces = vec![Piece::Constant(state(&[1.0])), Piece::Constant(state(&[0.0]))];
        assert!(matches!(PiecewiseField::new(sys, curves, pieces, 0.0, f64::INFINITY), Err(Error::InvalidField(_))));
    }
}
