//! Lipschitz connecting paths and Dal Maso–LeFloch–Murat products
//! `int_0^1 b(phi)^T phi' ds`, path-dependence probes and shock entropy
//! production.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::entropy::{Convexity, EntropyPair};
use crate::error::{Error, Result};
use crate::linalg::{to_vec, State};
use crate::quadrature::{breakpoints, composite, GaussLegendre};
use crate::system::{check_state, jacobian_eval, System};

pub const DEFAULT_ORDER: usize = 16;
pub const CONVERGENCE_TOL: f64 = 1e-8;
pub const PATH_SPREAD_TOL: f64 = 1e-8;
/// Uniform panel refinements tried before reporting non-convergence.
pub const MAX_PANEL_HALVINGS: usize = 6;
/// Tolerance for `||n|| = 1`.
const NORMAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathFamily {
    /// Volpert segment `(1-s) u- + s u+`.
    Straight,
    /// Bezier curve with the given interior control states.
    Bezier { controls: Vec<Vec<f64>> },
    /// Quadratic Bezier whose control is the midpoint displaced by
    /// `factor` times the cyclically shifted jump.
    Bulged { factor: f64 },
    /// Moves one component at a time, in `order`, each over an equal slice of `[0, 1]`.
    Reordered { order: Vec<usize> },
}

impl PathFamily {
    pub fn label(&self) -> String {
        match self {
            Self::Straight => "straight".into(),
            Self::Bezier { controls } => format!("bezier{}", controls.len()),
            Self::Bulged { factor } => format!("bulged({factor})"),
            Self::Reordered { order } => {
                format!("reordered({})", order.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Path {
    id: String,
    family: PathFamily,
    points: Vec<State>,
    order: Vec<usize>,
}

fn de_casteljau(points: &[State], s: f64) -> State {
    let mut pts = points.to_vec();
    let n = pts.len();
    for r in 1..n {
        for i in 0..n - r {
            pts[i] = &pts[i] * (1.0 - s) + &pts[i + 1] * s;
        }
    }
    pts.swap_remove(0)
}

impl Path {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn family(&self) -> &PathFamily {
        &self.family
    }

    pub fn start(&self) -> &State {
        &self.points[0]
    }

    pub fn end(&self) -> &State {
        self.points.last().expect("path has endpoints")
    }

    pub fn phi(&self, s: f64) -> State {
        match self.family {
            PathFamily::Reordered { .. } => {
                let (a, b) = (self.start(), self.end());
                let m = self.order.len() as f64;
                let mut u = a.clone();
                for (i, &k) in self.order.iter().enumerate() {
                    let t = (s * m - i as f64).clamp(0.0, 1.0);
                    u[k] = (1.0 - t) * a[k] + t * b[k];
                }
                u
            }
            _ if s == 0.0 => self.start().clone(),
            _ if s == 1.0 => self.end().clone(),
            _ => de_casteljau(&self.points, s),
        }
    }

    pub fn dphi(&self, s: f64) -> State {
        match self.family {
            PathFamily::Reordered { .. } => {
                let (a, b) = (self.start(), self.end());
                let m = self.order.len();
                let i = ((s * m as f64).floor() as usize).min(m - 1);
                let k = self.order[i];
                let mut d = State::zeros(a.len());
                d[k] = (b[k] - a[k]) * m as f64;
                d
            }
            _ => {
                let n = self.points.len() - 1;
                let diffs: Vec<State> = self.points.windows(2).map(|w| (&w[1] - &w[0]) * n as f64).collect();
                de_casteljau(&diffs, s)
            }
        }
    }

    /// Kinks of `phi` in `(0, 1)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.family {
            PathFamily::Reordered { .. } => {
                let m = self.order.len();
                (1..m).map(|i| i as f64 / m as f64).collect()
            }
            _ => Vec::new(),
        }
    }
}

/// Builds a path from `u_minus` to `u_plus`, probing admissibility on the
/// quadrature nodes when a system is supplied.
pub fn make_path(family: &PathFamily, u_minus: &State, u_plus: &State, system: Option<&dyn System>) -> Result<Path> {
    let n = u_minus.len();
    if u_plus.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u_plus.len() });
    }
    let mut points = vec![u_minus.clone()];
    let mut order = Vec::new();
    match family {
        PathFamily::Straight => {}
        PathFamily::Bezier { controls } => {
            for c in controls {
                if c.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: c.len() });
                }
                let cs = State::from_column_slice(c);
                if let Some(sys) = system {
                    check_state(sys, &cs)?;
                }
                points.push(cs);
            }
        }
        PathFamily::Bulged { factor } => {
            let jump = u_plus - u_minus;
            let shifted = State::from_fn(n, |i, _| jump[(i + 1) % n]);
            points.push((u_minus + u_plus) * 0.5 + shifted * *factor);
        }
        PathFamily::Reordered { order: o } => {
            let mut seen = vec![false; n];
            for &k in o {
                if k >= n || seen[k] {
                    return Err(Error::InvalidPath(format!("order {o:?} is not a permutation of 0..{n}")));
                }
                seen[k] = true;
            }
            if o.len() != n {
                return Err(Error::InvalidPath(format!("order {o:?} is not a permutation of 0..{n}")));
            }
            order = o.clone();
        }
    }
    points.push(u_plus.clone());
    let path = Path { id: family.label(), family: family.clone(), points, order };
    if let Some(sys) = system {
        check_state(sys, u_minus)?;
        check_state(sys, u_plus)?;
        let rule = GaussLegendre::new(DEFAULT_ORDER);
        let breaks = breakpoints(0.0, 1.0, path.breakpoints());
        for w in breaks.windows(2) {
            for (s, _) in rule.mapped(w[0], w[1]) {
                check_state(sys, &path.phi(s)).map_err(|e| match e {
                    Error::InadmissibleState(m) => Error::InadmissibleState(format!("path {} at s={s}: {m}", path.id)),
                    other => other,
                })?;
            }
        }
    }
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct JumpAmplitude {
    pub value: f64,
    pub path_id: String,
    pub quadrature_order: usize,
    pub error_estimate: f64,
}

/// `int_0^1 g(phi(s), phi'(s)) ds` at `order` and `order / 2`, split at the
/// path kinks; panels are halved until the two rules agree.
pub fn path_integral(
    path: &Path,
    order: usize,
    mut g: impl FnMut(&State, &State) -> Result<f64>,
) -> Result<JumpAmplitude> {
    let fine = GaussLegendre::new(order);
    let coarse = GaussLegendre::new((order / 2).max(1));
    let mut breaks = breakpoints(0.0, 1.0, path.breakpoints());
    let mut est = composite(&fine, &coarse, &breaks, |s| g(&path.phi(s), &path.dphi(s)))?;
    for _ in 0..MAX_PANEL_HALVINGS {
        if est.error <= CONVERGENCE_TOL * (1.0 + est.value.abs()) {
            return Ok(JumpAmplitude {
                value: est.value,
                path_id: path.id.clone(),
                quadrature_order: order,
                error_estimate: est.error,
            });
        }
        breaks = halve(&breaks);
        est = composite(&fine, &coarse, &breaks, |s| g(&path.phi(s), &path.dphi(s)))?;
    }
    Err(Error::QuadratureNotConverged { value: est.value, error: est.error })
}

fn halve(breaks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * breaks.len());
    for w in breaks.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.extend(breaks.last());
    out
}

/// `int_0^1 b(phi)^T phi' ds`.
pub fn jump_amplitude(b: impl Fn(&State) -> Result<State>, path: &Path, order: usize) -> Result<JumpAmplitude> {
    path_integral(path, order, |u, du| Ok(b(u)?.dot(du)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum PathVerdict {
    PathIndependent,
    PathDependent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ProbeReport {
    pub amplitudes: Vec<JumpAmplitude>,
    pub max_spread: f64,
    pub threshold: f64,
    pub verdict: PathVerdict,
}

pub fn perfect_derivative_probe(
    b: impl Fn(&State) -> Result<State>,
    paths: &[Path],
    order: usize,
) -> Result<ProbeReport> {
    let amplitudes = paths.iter().map(|p| jump_amplitude(&b, p, order)).collect::<Result<Vec<_>>>()?;
    Ok(probe_report(amplitudes))
}

fn probe_report(amplitudes: Vec<JumpAmplitude>) -> ProbeReport {
    let lo = amplitudes.iter().map(|a| a.value).fold(f64::INFINITY, f64::min);
    let hi = amplitudes.iter().map(|a| a.value).fold(f64::NEG_INFINITY, f64::max);
    let max_spread = if amplitudes.is_empty() { 0.0 } else { hi - lo };
    let verdict = if max_spread <= PATH_SPREAD_TOL { PathVerdict::PathIndependent } else { PathVerdict::PathDependent };
    ProbeReport { amplitudes, max_spread, threshold: PATH_SPREAD_TOL, verdict }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ShockProduction {
    /// Path route when available, otherwise the closed form.
    pub value: f64,
    pub path_route: Option<f64>,
    /// `-sigma [eta] + [q . n]`, only for compatible pairs.
    pub closed_form: Option<f64>,
    pub discrepancy: Option<f64>,
    pub error_estimate: f64,
    pub path_id: String,
    pub state_minus: Vec<f64>,
    pub state_plus: Vec<f64>,
    pub speed: f64,
}

fn check_normal(system: &dyn System, normal: &[f64]) -> Result<()> {
    if normal.len() != system.dimension() {
        return Err(Error::DimensionMismatch { expected: system.dimension(), got: normal.len() });
    }
    let norm = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= NORMAL_TOL) {
        return Err(Error::InvalidNormal(norm));
    }
    Ok(())
}

/// `-sigma [eta] + [q . n]` with `[.] = (+) - (-)`.
pub fn closed_form_production(
    pair: &dyn EntropyPair,
    normal: &[f64],
    sigma: f64,
    u_minus: &State,
    u_plus: &State,
) -> Result<f64> {
    let mut qn = 0.0;
    for (j, &nj) in normal.iter().enumerate() {
        if nj != 0.0 {
            qn += nj * (pair.flux(u_plus, j)? - pair.flux(u_minus, j)?);
        }
    }
    Ok(-sigma * (pair.eta(u_plus)? - pair.eta(u_minus)?) + qn)
}

/// `E = int_0^1 grad eta(phi)^T (-sigma I + sum_j n_j A_j(phi)) phi' ds`,
/// cross-checked against the closed form for compatible pairs. Lipschitz-only
/// observables use the closed form alone.
pub fn shock_entropy_production(
    system: &dyn System,
    pair: &dyn EntropyPair,
    normal: &[f64],
    sigma: f64,
    path: &Path,
    order: usize,
) -> Result<ShockProduction> {
    check_normal(system, normal)?;
    let (u_minus, u_plus) = (path.start(), path.end());
    check_state(system, u_minus)?;
    check_state(system, u_plus)?;
    let compatible = pair.compatible() && system.is_conservative();
    let closed_form = if compatible { Some(closed_form_production(pair, normal, sigma, u_minus, u_plus)?) } else { None };
    let (path_route, error_estimate) = if pair.convexity() == Convexity::LipschitzOnly {
        (None, 0.0)
    } else {
        let amp = path_integral(path, order, |u, du| {
            let g = pair.grad(u)?;
            let mut w = du * (-sigma);
            for (j, &nj) in normal.iter().enumerate() {
                if nj != 0.0 {
                    w += jacobian_eval(system, u, j)? * du * nj;
                }
            }
            Ok(g.dot(&w))
        })?;
        (Some(amp.value), amp.error_estimate)
    };
    let value = match (path_route, closed_form) {
        (Some(p), _) => p,
        (None, Some(c)) => c,
        (None, None) => return Err(Error::PairNotCompatible(pair.id())),
    };
    let discrepancy = match (path_route, closed_form) {
        (Some(p), Some(c)) => Some((p - c).abs()),
        _ => None,
    };
    Ok(ShockProduction {
        value,
        path_route,
        closed_form,
        discrepancy,
        error_estimate,
        path_id: path.id.clone(),
        state_minus: to_vec(u_minus),
        state_plus: to_vec(u_plus),
        speed: sigma,
    })
}

/// Shock production over several paths, reported as a path-independence probe.
pub fn production_probe(
    system: &dyn System,
    pair: &dyn EntropyPair,
    normal: &[f64],
    sigma: f64,
    paths: &[Path],
    order: usize,
) -> Result<ProbeReport> {
    let amplitudes = paths
        .iter()
        .map(|p| {
            let sp = shock_entropy_production(system, pair, normal, sigma, p, order)?;
            Ok(JumpAmplitude { value: sp.value, path_id: sp.path_id, quadrature_order: order, error_estimate: sp.error_estimate })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(probe_report(amplitudes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::state;

    #[test]
    fn straight_scalar_path() {
        let p = make_path(&PathFamily::Straight, &state(&[0.0]), &state(&[1.0]), None).unwrap();
        assert_eq!(p.phi(0.3)[0], 0.3);
        assert_eq!(p.phi(0.0)[0], 0.0);
        assert_eq!(p.phi(1.0)[0], 1.0);
    }

    #[test]
    fn bezier_midpoint() {
        let fam = PathFamily::Bezier { controls: vec![vec![1.0, 0.0]] };
        let p = make_path(&fam, &state(&[0.0, 0.0]), &state(&[1.0, 1.0]), None).unwrap();
        assert_eq!(p.phi(0.5), state(&[0.75, 0.25]));
    }

    #[test]
    fn reordered_moves_one_component_at_a_time() {
        let fam = PathFamily::Reordered { order: vec![1, 0] };
        let p = make_path(&fam, &state(&[0.0, 0.0]), &state(&[2.0, 4.0]), None).unwrap();
        assert_eq!(p.phi(0.25), state(&[0.0, 2.0]));
        assert_eq!(p.phi(0.75), state(&[1.0, 4.0]));
        assert_eq!(p.dphi(0.75), state(&[4.0, 0.0]));
        assert!(make_path(&PathFamily::Reordered { order: vec![0, 0] }, &state(&[0.0, 0.0]), &state(&[1.0, 1.0]), None).is_err());
    }

    #[test]
    fn line_integrals_closed_form() {
        let b = |u: &State| Ok(state(&[u[1], 0.0]));
        let (a, z) = (state(&[0.0, 0.0]), state(&[1.0, 1.0]));
        let straight = make_path(&PathFamily::Straight, &a, &z, None).unwrap();
        let parabola = make_path(&PathFamily::Bezier { controls: vec![vec![0.5, 0.0]] }, &a, &z, None).unwrap();
        assert!((jump_amplitude(b, &straight, 16).unwrap().value - 0.5).abs() < 1e-15);
        assert!((jump_amplitude(b, &parabola, 16).unwrap().value - 1.0 / 3.0).abs() < 1e-15);
        let probe = perfect_derivative_probe(b, &[straight, parabola], 16).unwrap();
        assert_eq!(probe.verdict, PathVerdict::PathDependent);
        assert!((probe.max_spread - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_normal() {
        let sys = crate::system::ScalarLaw::burgers();
        let pair = crate::system::ScalarQuadratic::new(sys.flux_kind());
        let p = make_path(&PathFamily::Straight, &state(&[1.0]), &state(&[0.0]), None).unwrap();
        assert!(matches!(
            shock_entropy_production(&sys, &pair, &[0.5], 0.5, &p, 16),
            Err(Error::InvalidNormal(_))
        ));
    }
}
