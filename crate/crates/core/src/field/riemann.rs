//! Exact Riemann solutions: convex scalar laws and the 1D gamma-law Euler
//! equations, plus expansion-shock variants.

use std::sync::Arc;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{Curve, CurveKind, FanFamily, Piece, PiecewiseField};
use crate::error::{Error, Result};
use crate::linalg::State;
use crate::system::{Euler, ScalarFlux, ScalarLaw, System};

/// Relative tolerance of the star-pressure Newton iteration.
pub const STAR_TOL: f64 = 1e-12;
const STAR_MAX_ITER: usize = 50;

fn scalar_system(flux: ScalarFlux) -> Result<Arc<dyn System>> {
    Ok(Arc::new(ScalarLaw::new(flux)?))
}

fn constant(u: f64) -> Piece {
    Piece::Constant(State::from_element(1, u))
}

/// Lax–Oleinik solution for a convex flux: shock if `u- > u+`, centred
/// rarefaction if `u- < u+`.
pub fn solve_riemann_scalar(flux: ScalarFlux, u_minus: f64, u_plus: f64, x0: f64) -> Result<PiecewiseField> {
    let (lo, hi) = (u_minus.min(u_plus), u_minus.max(u_plus));
    if !flux.is_strictly_convex_on(lo, hi) {
        return Err(Error::NonConvexFlux { lo, hi });
    }
    let system = scalar_system(flux)?;
    if u_minus == u_plus {
        return PiecewiseField::new(system, Vec::new(), vec![constant(u_minus)], 0.0, f64::INFINITY);
    }
    if u_minus > u_plus {
        let sigma = (flux.f(u_plus) - flux.f(u_minus)) / (u_plus - u_minus);
        let curves = vec![Curve::new(CurveKind::Shock, 0.0, x0, sigma, true)];
        return PiecewiseField::new(system, curves, vec![constant(u_minus), constant(u_plus)], 0.0, f64::INFINITY);
    }
    let xi = (flux.df(u_minus), flux.df(u_plus));
    let curves = vec![
        Curve::new(CurveKind::FanEdge, 0.0, x0, xi.0, true),
        Curve::new(CurveKind::FanEdge, 0.0, x0, xi.1, true),
    ];
    let pieces = vec![constant(u_minus), Piece::ScalarFan { flux, t0: 0.0, x0, xi }, constant(u_plus)];
    PiecewiseField::new(system, curves, pieces, 0.0, f64::INFINITY)
}

/// Single Rankine–Hugoniot discontinuity with `u- < u+`: a weak solution that
/// violates the entropy inequality.
pub fn make_expansion_shock(flux: ScalarFlux, u_minus: f64, u_plus: f64, x0: f64) -> Result<PiecewiseField> {
    if u_minus == u_plus {
        return Err(Error::SameState);
    }
    if u_minus > u_plus {
        return Err(Error::NotExpansive);
    }
    if !flux.is_strictly_convex_on(u_minus, u_plus) {
        return Err(Error::NonConvexFlux { lo: u_minus, hi: u_plus });
    }
    let sigma = (flux.f(u_plus) - flux.f(u_minus)) / (u_plus - u_minus);
    let curves = vec![Curve::new(CurveKind::Shock, 0.0, x0, sigma, true)];
    PiecewiseField::new(scalar_system(flux)?, curves, vec![constant(u_minus), constant(u_plus)], 0.0, f64::INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Primitive1 {
    pub rho: f64,
    pub v: f64,
    pub p: f64,
}

impl Primitive1 {
    fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }
}

/// How to resolve the wave on one side of the contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum WaveChoice {
    /// Lax shock or rarefaction, whichever the data select.
    #[default]
    Admissible,
    /// Always a single Rankine–Hugoniot discontinuity; an expansion shock
    /// where the admissible wave is a rarefaction.
    Discontinuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum StarMethod {
    Newton,
    Bisection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct StarState {
    pub p: f64,
    pub v: f64,
    pub rho_left: f64,
    pub rho_right: f64,
    pub iterations: usize,
    pub method: StarMethod,
}

/// Shock-branch constants `A = 2 / ((gamma+1) rho)`, `B = (gamma-1)/(gamma+1) p`.
fn hugoniot_ab(gamma: f64, w: &Primitive1) -> (f64, f64) {
    (2.0 / ((gamma + 1.0) * w.rho), (gamma - 1.0) / (gamma + 1.0) * w.p)
}

fn uses_shock_branch(p: f64, w: &Primitive1, choice: WaveChoice) -> bool {
    choice == WaveChoice::Discontinuous || p > w.p
}

/// One-sided pressure function and its derivative.
fn side_function(gamma: f64, p: f64, w: &Primitive1, choice: WaveChoice) -> (f64, f64) {
    if uses_shock_branch(p, w, choice) {
        let (a, b) = hugoniot_ab(gamma, w);
        let s = (a / (p + b)).sqrt();
        ((p - w.p) * s, s * (1.0 - 0.5 * (p - w.p) / (b + p)))
    } else {
        let c = w.sound_speed(gamma);
        let r = p / w.p;
        (2.0 * c / (gamma - 1.0) * (r.powf((gamma - 1.0) / (2.0 * gamma)) - 1.0), r.powf(-(gamma + 1.0) / (2.0 * gamma)) / (w.rho * c))
    }
}

fn pressure_function(gamma: f64, p: f64, l: &Primitive1, r: &Primitive1, choice: [WaveChoice; 2]) -> (f64, f64) {
    let (fl, dl) = side_function(gamma, p, l, choice[0]);
    let (fr, dr) = side_function(gamma, p, r, choice[1]);
    (fl + fr + r.v - l.v, dl + dr)
}

/// Star pressure and velocity by Newton on the two-sided pressure function,
/// with bisection as fallback.
pub fn euler_star_state(gamma: f64, left: &Primitive1, right: &Primitive1, choice: [WaveChoice; 2]) -> Result<StarState> {
    for w in [left, right] {
        if !(w.rho > 0.0 && w.p > 0.0 && w.v.is_finite()) {
            return Err(Error::InadmissibleState(format!("{w:?}")));
        }
    }
    let f0 = pressure_function(gamma, 0.0, left, right, choice).0;
    if f0 >= 0.0 {
        return Err(Error::VacuumFormation(f0));
    }
    let (p, iterations, method) = match newton_star(gamma, left, right, choice) {
        Some((p, it)) => (p, it, StarMethod::Newton),
        None => (bisect_star(gamma, left, right, choice)?, 0, StarMethod::Bisection),
    };
    let fl = side_function(gamma, p, left, choice[0]).0;
    let fr = side_function(gamma, p, right, choice[1]).0;
    let v = 0.5 * (left.v + right.v) + 0.5 * (fr - fl);
    let star_density = |w: &Primitive1, c: WaveChoice| {
        if uses_shock_branch(p, w, c) {
            let g = (gamma - 1.0) / (gamma + 1.0);
            let r = p / w.p;
            w.rho * (r + g) / (g * r + 1.0)
        } else {
            w.rho * (p / w.p).powf(1.0 / gamma)
        }
    };
    Ok(StarState {
        p,
        v,
        rho_left: star_density(left, choice[0]),
        rho_right: star_density(right, choice[1]),
        iterations,
        method,
    })
}

fn newton_star(gamma: f64, l: &Primitive1, r: &Primitive1, choice: [WaveChoice; 2]) -> Option<(f64, usize)> {
    let (cl, cr) = (l.sound_speed(gamma), r.sound_speed(gamma));
    let pvrs = 0.5 * (l.p + r.p) - 0.125 * (r.v - l.v) * (l.rho + r.rho) * (cl + cr);
    let mut p = pvrs.max(1e-8 * l.p.min(r.p));
    for it in 1..=STAR_MAX_ITER {
        let (f, df) = pressure_function(gamma, p, l, r, choice);
        if !(df > 0.0 && f.is_finite()) {
            return None;
        }
        let mut next = p - f / df;
        if next <= 0.0 {
            next = 0.1 * p;
        }
        let change = 2.0 * (next - p).abs() / (next + p);
        p = next;
        if change < STAR_TOL * 1e-2 || f == 0.0 {
            return Some((p, it));
        }
        if change < STAR_TOL {
            // one more step puts a quadratically convergent iterate at round-off
            let (f, df) = pressure_function(gamma, p, l, r, choice);
            return Some((p - f / df, it + 1));
        }
    }
    None
}

fn bisect_star(gamma: f64, l: &Primitive1, r: &Primitive1, choice: [WaveChoice; 2]) -> Result<f64> {
    let f = |p: f64| pressure_function(gamma, p, l, r, choice).0;
    let mut lo = 0.0;
    let mut hi = l.p.max(r.p);
    let mut expansions = 0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::NewtonDiverged { iterations: STAR_MAX_ITER, residual: f(hi) });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn euler_1d(euler: &Euler) -> Result<()> {
    if euler.dimension() != 1 {
        return Err(Error::InvalidParameter(format!("Riemann solver needs d=1, got d={}", euler.dimension())));
    }
    Ok(())
}

fn primitive(euler: &Euler, u: &State) -> Result<Primitive1> {
    euler.admissible(u)?;
    let w = euler.primitive(u);
    Ok(Primitive1 { rho: w.rho, v: w.vel[0], p: w.p })
}

/// Exact Riemann solution of the 1D gamma-law Euler equations.
pub fn solve_riemann_euler(euler: &Euler, left: &State, right: &State, x0: f64) -> Result<PiecewiseField> {
    solve_riemann_euler_with(euler, left, right, x0, [WaveChoice::Admissible; 2]).map(|(f, _)| f)
}

pub fn solve_riemann_euler_with(
    euler: &Euler,
    left: &State,
    right: &State,
    x0: f64,
    choice: [WaveChoice; 2],
) -> Result<(PiecewiseField, Option<StarState>)> {
    euler_1d(euler)?;
    let system: Arc<dyn System> = Arc::new(euler.clone());
    let (wl, wr) = (primitive(euler, left)?, primitive(euler, right)?);
    if left == right {
        let field = PiecewiseField::new(system, Vec::new(), vec![Piece::Constant(left.clone())], 0.0, f64::INFINITY)?;
        return Ok((field, None));
    }
    let gamma = euler.gamma();
    let star = euler_star_state(gamma, &wl, &wr, choice)?;
    let mut curves = Vec::new();
    let mut pieces = vec![Piece::Constant(left.clone())];
    let star_l = euler.conserved(star.rho_left, &[star.v], star.p);
    let star_r = euler.conserved(star.rho_right, &[star.v], star.p);

    let edge = |speed| Curve::new(CurveKind::FanEdge, 0.0, x0, speed, true);
    let shock_speed = |w: &Primitive1, sign: f64| {
        let (a, b) = hugoniot_ab(gamma, w);
        w.v + sign * ((star.p + b) / a).sqrt() / w.rho
    };

    if uses_shock_branch(star.p, &wl, choice[0]) {
        curves.push(Curve::new(CurveKind::Shock, 0.0, x0, shock_speed(&wl, -1.0), true));
    } else {
        let head = wl.v - wl.sound_speed(gamma);
        let tail = star.v - (gamma * star.p / star.rho_left).sqrt();
        curves.extend([edge(head), edge(tail)]);
        pieces.push(Piece::EulerFan { gamma, family: FanFamily::Left, ahead: wl, t0: 0.0, x0, xi: (head, tail) });
    }
    pieces.push(Piece::Constant(star_l));
    curves.push(Curve::new(CurveKind::Contact, 0.0, x0, star.v, true));
    pieces.push(Piece::Constant(star_r));
    if uses_shock_branch(star.p, &wr, choice[1]) {
        curves.push(Curve::new(CurveKind::Shock, 0.0, x0, shock_speed(&wr, 1.0), true));
    } else {
        let tail = star.v + (gamma * star.p / star.rho_right).sqrt();
        let head = wr.v + wr.sound_speed(gamma);
        curves.extend([edge(tail), edge(head)]);
        pieces.push(Piece::EulerFan { gamma, family: FanFamily::Right, ahead: wr, t0: 0.0, x0, xi: (tail, head) });
    }
    pieces.push(Piece::Constant(right.clone()));
    let field = PiecewiseField::new(system, curves, pieces, 0.0, f64::INFINITY)?;
    Ok((field, Some(star)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PointSample;
    use approx::assert_abs_diff_eq;

    const BURGERS: ScalarFlux = ScalarFlux::Quadratic { a: 1.0 };

    #[test]
    fn burgers_shock_speed() {
        let f = solve_riemann_scalar(BURGERS, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(f.curves().len(), 1);
        assert_abs_diff_eq!(f.curves()[0].speed, 0.5);
    }

    #[test]
    fn burgers_rarefaction_is_x_over_t() {
        let f = solve_riemann_scalar(BURGERS, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(f.sample(2.0, 1.0).unwrap(), PointSample::Value(State::from_element(1, 0.5)));
    }

    #[test]
    fn equal_scalar_states_constant() {
        let f = solve_riemann_scalar(BURGERS, 0.3, 0.3, 0.0).unwrap();
        assert!(f.curves().is_empty());
    }

    #[test]
    fn concave_flux_rejected() {
        assert!(matches!(
            solve_riemann_scalar(ScalarFlux::Quadratic { a: -1.0 }, 0.0, 1.0, 0.0),
            Err(Error::NonConvexFlux { .. })
        ));
    }

    #[test]
    fn expansion_shock_errors() {
        assert_eq!(make_expansion_shock(BURGERS, 1.0, 1.0, 0.0).unwrap_err(), Error::SameState);
        assert_eq!(make_expansion_shock(BURGERS, 1.0, 0.0, 0.0).unwrap_err(), Error::NotExpansive);
    }

    #[test]
    fn sod_star_state() {
        let l = Primitive1 { rho: 1.0, v: 0.0, p: 1.0 };
        let r = Primitive1 { rho: 0.125, v: 0.0, p: 0.1 };
        let s = euler_star_state(1.4, &l, &r, [WaveChoice::Admissible; 2]).unwrap();
        assert_abs_diff_eq!(s.p, 0.30313, epsilon = 1e-5);
        assert_abs_diff_eq!(s.v, 0.92745, epsilon = 1e-5);
        assert_eq!(s.method, StarMethod::Newton);
    }

    #[test]
    fn vacuum_detected() {
        let l = Primitive1 { rho: 1.0, v: -5.0, p: 0.4 };
        let r = Primitive1 { rho: 1.0, v: 5.0, p: 0.4 };
        assert!(matches!(euler_star_state(1.4, &l, &r, [WaveChoice::Admissible; 2]), Err(Error::VacuumFormation(_))));
    }

    #[test]
    fn bisection_agrees_with_newton() {
        let l = Primitive1 { rho: 1.0, v: 0.0, p: 1.0 };
        let r = Primitive1 { rho: 0.125, v: 0.0, p: 0.1 };
        let s = euler_star_state(1.4, &l, &r, [WaveChoice::Admissible; 2]).unwrap();
        let b = bisect_star(1.4, &l, &r, [WaveChoice::Admissible; 2]).unwrap();
        assert_abs_diff_eq!(s.p, b, epsilon = 1e-13);
    }
}
