//! Numerical verification of entropy compatibility, symmetrization, the
//! potential structure, convexity and homogeneity.

use std::collections::BTreeMap;

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::entropy::{potential_eval, Convexity, EntropyPair};
use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::{
    eigenvalues_sorted, inf_norm, mat_inf_norm, min_eigenvalue, nullspace, sym_from_coords, sym_index, to_vec,
    Matrix, State,
};
use crate::system::{check_state, flux_eval, jacobian_eval, System};

pub const ENTROPY_PAIR_TOL: f64 = 1e-6;
pub const SYMMETRIZER_TOL_ANALYTIC: f64 = 1e-10;
pub const SYMMETRIZER_TOL_FD: f64 = 1e-6;
pub const POTENTIAL_TOL: f64 = 1e-5;
pub const HOMOGENEITY_TOL: f64 = 1e-8;
pub const CONVEXITY_MARGIN: f64 = 1e-12;
pub const NULLSPACE_REL_TOL: f64 = 1e-10;
/// Relative cut for the curl constraints, which carry FD second derivatives.
pub const CURL_REL_TOL: f64 = 1e-7;
/// Number of states at which the gradient must be forced to zero before a
/// system is reported numerically non-entropic.
pub const MIN_REFUTATION_STATES: usize = 20;
const MAX_WITNESSES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Witness {
    pub state: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CheckReport {
    pub check_id: String,
    pub system_id: String,
    pub pair_id: Option<String>,
    pub states_tested: usize,
    pub skipped: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Per-state outcome: `None` marks a skipped state.
type Sample = Option<(State, f64)>;

fn assemble(
    check_id: &str,
    system: &dyn System,
    pair: Option<&dyn EntropyPair>,
    samples: Vec<Sample>,
    threshold: f64,
) -> CheckReport {
    let skipped = samples.iter().filter(|s| s.is_none()).count();
    let mut tested: Vec<(State, f64)> = samples.into_iter().flatten().collect();
    let max_residual = tested.iter().map(|(_, r)| *r).fold(0.0_f64, |a, r| if r.is_nan() { f64::NAN } else { a.max(r) });
    let verdict = if !tested.is_empty() && max_residual <= threshold { Verdict::Pass } else { Verdict::Fail };
    let states_tested = tested.len();
    tested.sort_by(|a, b| b.1.total_cmp(&a.1));
    let witnesses = tested
        .into_iter()
        .take(MAX_WITNESSES)
        .map(|(u, r)| Witness { state: to_vec(&u), residual: r })
        .collect();
    let mut notes = Vec::new();
    if skipped > 0 {
        notes.push(format!("{skipped} states skipped"));
    }
    CheckReport {
        check_id: check_id.into(),
        system_id: system.id().into(),
        pair_id: pair.map(|p| p.id()),
        states_tested,
        skipped,
        max_residual,
        threshold,
        verdict,
        witnesses,
        metrics: BTreeMap::new(),
        notes,
    }
}

/// Maps inadmissible or non-smooth states to a skip; other errors propagate.
fn per_state<F>(states: &[State], f: F) -> Result<Vec<Sample>>
where
    F: Fn(&State) -> Result<Option<f64>> + Sync,
{
    states
        .par_iter()
        .map(|u| match f(u) {
            Ok(Some(r)) => Ok(Some((u.clone(), r))),
            Ok(None) | Err(Error::InadmissibleState(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// `max_j || grad(eta)^T A_j - FD grad(q_j)^T ||_inf`.
pub fn check_entropy_pair(system: &dyn System, pair: &dyn EntropyPair, states: &[State]) -> Result<CheckReport> {
    let samples = per_state(states, |u| {
        check_state(system, u)?;
        if near_kink(pair, u) {
            return Ok(None);
        }
        let g = pair.grad(u)?;
        let mut r = 0.0_f64;
        for j in 0..system.dimension() {
            let lhs = jacobian_eval(system, u, j)?.transpose() * &g;
            let dq = fd::gradient(|w| pair.flux(w, j), u)?;
            r = r.max(inf_norm(&(lhs - dq)));
        }
        Ok(Some(r))
    })?;
    let mut rep = assemble("entropy_pair", system, Some(pair), samples, ENTROPY_PAIR_TOL);
    if !pair.compatible() {
        rep.notes.push("pair is registered as not compatible".into());
    }
    Ok(rep)
}

/// True when a Lipschitz-only observable has a kink inside the FD stencil.
fn near_kink(pair: &dyn EntropyPair, u: &State) -> bool {
    if pair.convexity() != Convexity::LipschitzOnly {
        return false;
    }
    let Ok(g0) = pair.grad(u) else { return true };
    if !pair.smooth_at(u) {
        return true;
    }
    (0..u.len()).any(|k| {
        let h = fd::first_order_step(u[k]);
        [-h, h].iter().any(|d| {
            let mut w = u.clone();
            w[k] += d;
            !pair.smooth_at(&w) || pair.grad(&w).map_or(true, |g| g != g0)
        })
    })
}

fn require_strict(pair: &dyn EntropyPair) -> Result<()> {
    if pair.convexity() != Convexity::Strict {
        return Err(Error::NotStrictlyConvex(pair.id()));
    }
    Ok(())
}

/// `max_j || H A_j - A_j^T H ||_inf` with `H` the registered Hessian.
pub fn check_symmetrizer(system: &dyn System, pair: &dyn EntropyPair, states: &[State]) -> Result<CheckReport> {
    require_strict(pair)?;
    let samples = per_state(states, |u| {
        check_state(system, u)?;
        let h = pair.hess(u)?;
        let mut r = 0.0_f64;
        for j in 0..system.dimension() {
            let a = jacobian_eval(system, u, j)?;
            r = r.max(mat_inf_norm(&(&h * &a - a.transpose() * &h)));
        }
        Ok(Some(r))
    })?;
    let tol = if system.has_analytic_jacobian() { SYMMETRIZER_TOL_ANALYTIC } else { SYMMETRIZER_TOL_FD };
    Ok(assemble("symmetrizer", system, Some(pair), samples, tol))
}

/// `||FD grad psi_0(v) - u(v)||` and `||FD grad psi_j(v) - f_j(u(v))||` at
/// `v = grad(eta)(u)`.
pub fn check_godunov_potentials(
    system: &dyn System,
    pair: &dyn EntropyPair,
    states: &[State],
) -> Result<CheckReport> {
    require_strict(pair)?;
    let d = system.dimension();
    let samples = per_state(states, |u| {
        check_state(system, u)?;
        let v = pair.grad(u)?;
        let base = potential_eval(system, pair, &v, Some(u))?;
        let mut r = inf_norm(&(&base.u - u));
        let g0 = fd::gradient(|w| Ok(potential_eval(system, pair, w, Some(u))?.psi0), &v)?;
        r = r.max(inf_norm(&(g0 - &base.u)));
        for j in 0..d {
            let gj = fd::gradient(|w| Ok(potential_eval(system, pair, w, Some(u))?.psi[j]), &v)?;
            r = r.max(inf_norm(&(gj - flux_eval(system, &base.u, j)?)));
            // psi_j + q_j = <v, f_j> is the defining identity.
            let ident = base.psi[j] + pair.flux(&base.u, j)? - v.dot(&flux_eval(system, &base.u, j)?);
            r = r.max(ident.abs());
        }
        Ok(Some(r))
    })?;
    Ok(assemble("godunov_potentials", system, Some(pair), samples, POTENTIAL_TOL))
}

/// 32 log-spaced magnitudes in `[1e-3, 10]`, per sign.
pub fn default_lambda_grid() -> Vec<f64> {
    let n = 32;
    let mags: Vec<f64> = (0..n).map(|i| 10f64.powf(-3.0 + 4.0 * i as f64 / (n - 1) as f64)).collect();
    let mut grid: Vec<f64> = mags.iter().rev().map(|m| -m).collect();
    grid.extend(mags);
    grid
}

/// Minimum Hessian eigenvalue of `pair` on `states`. With a `lambda_grid`,
/// also scans `I - lambda A(u)` (the Hessian of `|u|^2/2 - lambda zeta`) and
/// reports the contiguous range around zero where it stays positive.
pub fn check_convexity(
    system: &dyn System,
    pair: &dyn EntropyPair,
    states: &[State],
    lambda_grid: Option<&[f64]>,
) -> Result<CheckReport> {
    if pair.convexity() == Convexity::LipschitzOnly {
        return Err(Error::HessianUnavailable(pair.id()));
    }
    let samples = per_state(states, |u| {
        check_state(system, u)?;
        Ok(Some(-min_eigenvalue(&pair.hess(u)?)))
    })?;
    let min_eig = samples.iter().flatten().map(|(_, r)| -r).fold(f64::INFINITY, f64::min);
    // Residual is `-min eig`; the threshold demands a strictly positive margin.
    let mut rep = assemble("convexity", system, Some(pair), samples, -CONVEXITY_MARGIN);
    if rep.states_tested > 0 {
        rep.max_residual = -min_eig;
        rep.verdict = if rep.max_residual <= rep.threshold { Verdict::Pass } else { Verdict::Fail };
        rep.metrics.insert("min_eigenvalue".into(), min_eig);
    }
    if let Some(grid) = lambda_grid {
        let n = system.equations();
        let ok = |lambda: f64| -> Result<bool> {
            for u in states {
                if check_state(system, u).is_err() {
                    continue;
                }
                for j in 0..system.dimension() {
                    let a = jacobian_eval(system, u, j)?;
                    if !(min_eigenvalue(&(Matrix::identity(n, n) - a * lambda)) > 0.0) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        };
        let mut pos: Vec<f64> = grid.iter().copied().filter(|l| *l > 0.0).collect();
        pos.sort_by(f64::total_cmp);
        let mut neg: Vec<f64> = grid.iter().copied().filter(|l| *l < 0.0).collect();
        neg.sort_by(|a, b| b.total_cmp(a));
        let mut hi = 0.0;
        for l in pos {
            if !ok(l)? {
                break;
            }
            hi = l;
        }
        let mut lo = 0.0;
        for l in neg {
            if !ok(l)? {
                break;
            }
            lo = l;
        }
        rep.metrics.insert("lambda_lo".into(), lo);
        rep.metrics.insert("lambda_hi".into(), hi);
        rep.metrics.insert("lambda_grid_points".into(), grid.len() as f64);
    }
    Ok(rep)
}

/// Least-squares exponent of `g(lambda) = lambda^beta g(1)` from
/// `ln ||g(lambda)|| - ln ||g(1)||` against `ln lambda`.
fn fit_exponent(base: f64, scaled: &[(f64, f64)]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &(lambda, norm) in scaled {
        let x = lambda.ln();
        num += x * (norm.ln() - base.ln());
        den += x * x;
    }
    num / den
}

fn power_residual(base: &State, scaled: &[(f64, State)], beta: f64) -> f64 {
    let scale = inf_norm(base).max(f64::MIN_POSITIVE);
    scaled
        .iter()
        .map(|(l, s)| inf_norm(&(s - base * l.powf(beta))) / (scale * l.powf(beta)))
        .fold(0.0, f64::max)
}

struct Fit {
    exponents: Vec<f64>,
    residual: f64,
}

fn fit_map(u: &State, scalings: &[f64], g: impl Fn(&State) -> Result<State>) -> Result<Option<Fit>> {
    let base = g(u)?;
    let bn = base.norm();
    if bn == 0.0 {
        return Ok(None);
    }
    let scaled: Vec<(f64, State)> = scalings.iter().map(|&l| Ok((l, g(&(u * l))?))).collect::<Result<_>>()?;
    let norms: Vec<(f64, f64)> = scaled.iter().map(|(l, s)| (*l, s.norm())).collect();
    let beta = fit_exponent(bn, &norms);
    Ok(Some(Fit { exponents: vec![beta], residual: power_residual(&base, &scaled, beta) }))
}

#[derive(Default)]
struct Extremes {
    lo: f64,
    hi: f64,
    seen: bool,
}

impl Extremes {
    fn add(&mut self, x: f64) {
        if !self.seen {
            self.lo = x;
            self.hi = x;
            self.seen = true;
        } else {
            self.lo = self.lo.min(x);
            self.hi = self.hi.max(x);
        }
    }
    fn insert(&self, m: &mut BTreeMap<String, f64>, key: &str) {
        if self.seen {
            m.insert(format!("{key}_min"), self.lo);
            m.insert(format!("{key}_max"), self.hi);
        }
    }
}

/// Largest identity residual and named degree fits at one state.
type StateFits = (f64, Vec<(String, f64)>);

/// Fits flux degrees, checks Euler's identity `A_j u = beta f_j`, and for a
/// homogeneous pair of degree `beta_eta` the entropy-variable degrees
/// `grad eta(lambda u) = lambda^(beta_eta - 1) grad eta(u)` and
/// `u(lambda v) = lambda^(1/(beta_eta - 1)) u(v)`.
pub fn check_homogeneity(
    system: &dyn System,
    pair: Option<&dyn EntropyPair>,
    states: &[State],
    scalings: &[f64],
) -> Result<CheckReport> {
    if scalings.iter().any(|l| !(*l > 0.0) || *l == 1.0) {
        return Err(Error::InvalidParameter("scalings must be positive and different from 1".into()));
    }
    if states.iter().any(|u| u.iter().all(|x| *x == 0.0)) {
        return Err(Error::ZeroState);
    }
    let d = system.dimension();
    let target = pair.and_then(|p| p.homogeneity_degree());
    let per: Vec<Result<Option<StateFits>>> = states
        .par_iter()
        .map(|u| {
            check_state(system, u)?;
            let mut r = 0.0_f64;
            let mut fits = Vec::new();
            for j in 0..d {
                if let Some(f) = fit_map(u, scalings, |w| system.flux(w, j))? {
                    r = r.max(f.residual).max((f.exponents[0] - 1.0).abs());
                    fits.push(("flux_degree".to_string(), f.exponents[0]));
                }
                let a = jacobian_eval(system, u, j)?;
                let fj = system.flux(u, j)?;
                let euler = inf_norm(&(a * u - &fj)) / inf_norm(&fj).max(1.0);
                let tol_scale = if system.has_analytic_jacobian() { 1.0 } else { HOMOGENEITY_TOL / SYMMETRIZER_TOL_FD };
                fits.push(("euler_identity".to_string(), euler));
                r = r.max(euler * tol_scale);
            }
            if let Some(f) = fit_map(u, scalings, |w| system.temporal_flux(w))? {
                r = r.max(f.residual).max((f.exponents[0] - 1.0).abs());
                fits.push(("temporal_flux_degree".to_string(), f.exponents[0]));
            }
            if let (Some(p), Some(beta)) = (pair, target) {
                let fwd = beta - 1.0;
                if let Some(f) = fit_map(u, scalings, |w| p.grad(w))? {
                    r = r.max(f.residual).max((f.exponents[0] - fwd).abs());
                    fits.push(("entropy_var_degree".to_string(), 1.0 / f.exponents[0]));
                }
                if p.convexity() == Convexity::Strict {
                    let v = p.grad(u)?;
                    let inv = 1.0 / fwd;
                    let invert = |w: &State| -> Result<State> {
                        let guess = u * (w.norm() / v.norm()).powf(inv);
                        crate::entropy::from_entropy_vars(system, p, w, Some(&guess))
                    };
                    if let Some(f) = fit_map(&v, scalings, invert)? {
                        r = r.max(f.residual).max((f.exponents[0] - inv).abs());
                        fits.push(("inverse_map_degree".to_string(), f.exponents[0]));
                    }
                }
            }
            Ok(Some((r, fits)))
        })
        .collect();
    let mut samples = Vec::new();
    let mut ext: BTreeMap<String, Extremes> = BTreeMap::new();
    for (u, res) in states.iter().zip(per) {
        match res {
            Ok(Some((r, fits))) => {
                samples.push(Some((u.clone(), r)));
                for (k, v) in fits {
                    ext.entry(k).or_default().add(v);
                }
            }
            Ok(None) | Err(Error::InadmissibleState(_)) => samples.push(None),
            Err(e) => return Err(e),
        }
    }
    let mut rep = assemble("homogeneity", system, pair, samples, HOMOGENEITY_TOL);
    for (k, e) in &ext {
        e.insert(&mut rep.metrics, k);
    }
    if let Some(beta) = target {
        rep.metrics.insert("pair_degree".into(), beta);
        rep.metrics.insert("expected_entropy_var_degree".into(), 1.0 / (beta - 1.0));
    }
    if pair.is_some() && target.is_none() {
        rep.notes.push("pair has no registered homogeneity degree".into());
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum SearchVerdict {
    Entropic,
    NonEntropic,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SearchReport {
    pub check_id: String,
    pub system_id: String,
    pub states_tested: usize,
    pub skipped: usize,
    pub nullspace_dim_min: usize,
    pub nullspace_dim_max: usize,
    /// Upper-triangle entries of `H` not forced to zero at some state.
    pub pattern: Vec<(usize, usize)>,
    pub pattern_label: String,
    /// Smallest dimension of the admissible `grad(eta)` space over states.
    pub gradient_freedom_min: usize,
    pub forced_zero_states: usize,
    pub min_curl_singular_value: f64,
    pub pd_witness_states: usize,
    /// Smallest eigenvalue of the best candidate over states; null when some
    /// state admits no candidate symmetrizer.
    pub pd_min_eigenvalue: Option<f64>,
    pub verdict: SearchVerdict,
    pub notes: Vec<String>,
}

struct StateSearch {
    h_basis: Matrix,
    g_freedom: usize,
    curl_sigma_min: f64,
    pd_eig: f64,
}

/// Symmetric-coordinate constraint matrix of `H A_j = A_j^T H` for all `j`.
fn symmetrizer_constraints(jacs: &[Matrix]) -> Matrix {
    let n = jacs[0].nrows();
    let idx = sym_index(n);
    let rows = jacs.len() * n * n;
    let mut c = Matrix::zeros(rows, idx.len());
    for (k, _) in idx.iter().enumerate() {
        let mut coords = vec![0.0; idx.len()];
        coords[k] = 1.0;
        let e = sym_from_coords(n, &coords);
        for (j, a) in jacs.iter().enumerate() {
            let r = &e * a - a.transpose() * &e;
            for (p, x) in r.iter().enumerate() {
                c[(j * n * n + p, k)] = *x;
            }
        }
    }
    c
}

/// Rows `sum_l (d_k A_j[l,i] - d_i A_j[l,k]) g_l` for `i < k`: the part of
/// `D(A_j^T g)` that must be symmetric beyond the symmetrizer condition.
fn curl_constraints(system: &dyn System, u: &State) -> Result<Matrix> {
    let n = system.equations();
    let mut da: Vec<Vec<Matrix>> = Vec::with_capacity(system.dimension());
    for j in 0..system.dimension() {
        let mut per_k = Vec::with_capacity(n);
        for k in 0..n {
            let h = fd::first_order_step(u[k]);
            let mut up = u.clone();
            up[k] += h;
            let mut dn = u.clone();
            dn[k] -= h;
            per_k.push((jacobian_eval(system, &up, j)? - jacobian_eval(system, &dn, j)?) / (2.0 * h));
        }
        da.push(per_k);
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |k| (i, k))).collect();
    let mut c = Matrix::zeros(pairs.len() * system.dimension(), n);
    for (j, dj) in da.iter().enumerate() {
        for (r, &(i, k)) in pairs.iter().enumerate() {
            for l in 0..n {
                c[(j * pairs.len() + r, l)] = dj[k][(l, i)] - dj[i][(l, k)];
            }
        }
    }
    Ok(c)
}

fn lies_in_span(basis: &Matrix, h: &Matrix) -> bool {
    let n = h.nrows();
    let coords: Vec<f64> = sym_index(n).iter().map(|&(a, b)| h[(a, b)]).collect();
    let x = State::from_vec(coords);
    if basis.ncols() == 0 {
        return false;
    }
    let proj = basis * (basis.transpose() * &x);
    inf_norm(&(&x - proj)) <= 1e-8 * inf_norm(&x).max(1e-300)
}

/// Maximizes the smallest eigenvalue over unit-norm combinations of the
/// nullspace basis by projected subgradient ascent.
fn best_min_eigenvalue(basis: &Matrix, n: usize) -> f64 {
    let m = basis.ncols();
    if m == 0 {
        return f64::NEG_INFINITY;
    }
    let mat = |c: &State| sym_from_coords(n, (basis * c).as_slice());
    let mut c = State::from_element(m, 0.0);
    let id: Vec<f64> = sym_index(n).iter().map(|&(a, b)| if a == b { 1.0 } else { 0.0 }).collect();
    let id_c = basis.transpose() * State::from_vec(id);
    c += if id_c.norm() > 1e-12 { id_c } else { State::from_element(m, 1.0) };
    c /= c.norm();
    let mut best = f64::NEG_INFINITY;
    for it in 0..300 {
        let h = mat(&c);
        let eig = nalgebra::SymmetricEigen::new(h);
        let (imin, lmin) = eig.eigenvalues.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &l)| if l < acc.1 { (i, l) } else { acc });
        best = best.max(lmin);
        let w = eig.eigenvectors.column(imin).into_owned();
        let grad = State::from_fn(m, |i, _| {
            let bi = sym_from_coords(n, basis.column(i).as_slice());
            (w.transpose() * bi * &w)[(0, 0)]
        });
        c += grad * (0.5 / (1.0 + it as f64).sqrt());
        c /= c.norm();
    }
    best
}

/// Solves `{H A_j = A_j^T H, H = H^T}` by nullspace at each state,
/// intersects sparsity patterns, and tests integrability through the curl
/// constraints on `g = grad(eta)`. `registered` Hessians serve as positive
/// definite witnesses when they lie in the computed nullspace.
pub fn symmetrizer_search(
    system: &dyn System,
    states: &[State],
    registered: &[&dyn EntropyPair],
) -> Result<SearchReport> {
    let n = system.equations();
    if n > 8 {
        return Err(Error::InvalidParameter(format!("symmetrizer search supports N <= 8, got {n}")));
    }
    let per: Vec<Result<Option<StateSearch>>> = states
        .par_iter()
        .map(|u| {
            if let Err(e) = check_state(system, u) {
                return match e {
                    Error::InadmissibleState(_) => Ok(None),
                    other => Err(other),
                };
            }
            let jacs: Vec<Matrix> = (0..system.dimension()).map(|j| jacobian_eval(system, u, j)).collect::<Result<_>>()?;
            let (h_basis, _) = nullspace(&symmetrizer_constraints(&jacs), NULLSPACE_REL_TOL);
            let curl = curl_constraints(system, u)?;
            let (g_freedom, curl_sigma_min) = if curl.nrows() == 0 {
                (n, 0.0)
            } else {
                let scale = jacs.iter().map(mat_inf_norm).fold(1.0, f64::max);
                let sv = curl.clone().svd(false, false).singular_values;
                let cut = CURL_REL_TOL * scale;
                let rank = sv.iter().filter(|s| **s > cut).count();
                let smin = if curl.nrows() >= n { sv.iter().copied().fold(f64::INFINITY, f64::min) } else { 0.0 };
                (n - rank, smin)
            };
            let mut pd_eig = f64::NEG_INFINITY;
            for p in registered {
                if p.convexity() != Convexity::Strict {
                    continue;
                }
                if let Ok(h) = p.hess(u) {
                    if lies_in_span(&h_basis, &h) {
                        pd_eig = pd_eig.max(eigenvalues_sorted(&h)[0]);
                    }
                }
            }
            if !(pd_eig > 0.0) {
                pd_eig = pd_eig.max(best_min_eigenvalue(&h_basis, n));
            }
            Ok(Some(StateSearch { h_basis, g_freedom, curl_sigma_min, pd_eig }))
        })
        .collect();

    let idx = sym_index(n);
    let mut free = vec![false; idx.len()];
    let (mut tested, mut skipped, mut forced, mut pd_states) = (0, 0, 0, 0);
    let (mut dmin, mut dmax, mut gmin) = (usize::MAX, 0, usize::MAX);
    let (mut smin, mut pd_min) = (f64::INFINITY, f64::INFINITY);
    for r in per {
        let Some(s) = r? else {
            skipped += 1;
            continue;
        };
        tested += 1;
        dmin = dmin.min(s.h_basis.ncols());
        dmax = dmax.max(s.h_basis.ncols());
        for (k, f) in free.iter_mut().enumerate() {
            if s.h_basis.row(k).iter().any(|x| x.abs() > 1e-8) {
                *f = true;
            }
        }
        gmin = gmin.min(s.g_freedom);
        smin = smin.min(s.curl_sigma_min);
        if s.g_freedom == 0 {
            forced += 1;
        }
        if s.pd_eig > 0.0 {
            pd_states += 1;
        }
        pd_min = pd_min.min(s.pd_eig);
    }
    if tested == 0 {
        return Err(Error::InvalidParameter("no admissible states for symmetrizer search".into()));
    }
    let pattern: Vec<(usize, usize)> = idx.iter().zip(&free).filter(|(_, f)| **f).map(|(p, _)| *p).collect();
    let pattern_label = if pattern.len() == idx.len() {
        "full"
    } else if pattern.iter().all(|(a, b)| a == b) {
        "diagonal"
    } else {
        "structured"
    };
    let mut notes = vec![format!("sampling-based verdict over {tested} states")];
    let verdict = if forced == tested && tested >= MIN_REFUTATION_STATES {
        notes.push("numerically non-entropic: every admissible gradient vanishes".into());
        SearchVerdict::NonEntropic
    } else if forced == tested {
        notes.push(format!("gradient forced to zero but fewer than {MIN_REFUTATION_STATES} states sampled"));
        SearchVerdict::Inconclusive
    } else if forced == 0 && pd_states == tested {
        SearchVerdict::Entropic
    } else {
        SearchVerdict::Inconclusive
    };
    if skipped > 0 {
        notes.push(format!("{skipped} states skipped"));
    }
    Ok(SearchReport {
        check_id: "symmetrizer_search".into(),
        system_id: system.id().into(),
        states_tested: tested,
        skipped,
        nullspace_dim_min: dmin,
        nullspace_dim_max: dmax,
        pattern,
        pattern_label: pattern_label.into(),
        gradient_freedom_min: gmin,
        forced_zero_states: forced,
        min_curl_singular_value: smin,
        pd_witness_states: pd_states,
        pd_min_eigenvalue: pd_min.is_finite().then_some(pd_min),
        verdict,
        notes,
    })
}
