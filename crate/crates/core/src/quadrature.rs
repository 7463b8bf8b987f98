//! Gauss–Legendre quadrature: fixed rules, composite rules over breakpoints
//! and a simple adaptive bisection driver.

use crate::error::{Error, Result};
use crate::linalg::State;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule with `n` nodes, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in self.mapped(a, b) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }

    pub fn integrate_vec(
        &self,
        a: f64,
        b: f64,
        len: usize,
        mut f: impl FnMut(f64) -> Result<State>,
    ) -> Result<State> {
        let mut acc = State::zeros(len);
        for (x, w) in self.mapped(a, b) {
            acc += f(x)? * w;
        }
        Ok(acc)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Sorted, deduplicated breakpoints restricted to `[a, b]`, always including
/// the endpoints.
pub fn breakpoints(a: f64, b: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let scale = 1.0 + a.abs().max(b.abs());
    let mut pts: Vec<f64> = extra.into_iter().filter(|x| x.is_finite() && *x > a && *x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * scale);
    pts
}

/// Value and error estimate of a composite rule: `|Q_n - Q_{n/2}|` summed over
/// panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

pub fn composite(
    fine: &GaussLegendre,
    coarse: &GaussLegendre,
    breaks: &[f64],
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<Estimate> {
    let mut value = 0.0;
    let mut error = 0.0;
    for w in breaks.windows(2) {
        let hi = fine.integrate(w[0], w[1], &mut f)?;
        let lo = coarse.integrate(w[0], w[1], &mut f)?;
        value += hi;
        error += (hi - lo).abs();
    }
    Ok(Estimate { value, error })
}

/// Adaptive bisection: a panel is accepted when the rule on the panel agrees
/// with the rule on its two halves within `tol * (1 + |value|)`.
pub fn adaptive(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: usize,
    f: &mut dyn FnMut(f64) -> Result<f64>,
) -> Result<Estimate> {
    let whole = rule.integrate(a, b, &mut *f)?;
    adaptive_step(rule, a, b, whole, tol, max_depth, f)
}

fn adaptive_step(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    f: &mut dyn FnMut(f64) -> Result<f64>,
) -> Result<Estimate> {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, &mut *f)?;
    let right = rule.integrate(mid, b, &mut *f)?;
    let refined = left + right;
    let err = (refined - whole).abs();
    if err <= tol * (1.0 + refined.abs()) {
        return Ok(Estimate { value: refined, error: err });
    }
    if depth == 0 {
        return Err(Error::QuadratureNotConverged { value: refined, error: err });
    }
    let l = adaptive_step(rule, a, mid, left, tol, depth - 1, f)?;
    let r = adaptive_step(rule, mid, b, right, tol, depth - 1, f)?;
    Ok(Estimate { value: l.value + r.value, error: l.error + r.error })
}
