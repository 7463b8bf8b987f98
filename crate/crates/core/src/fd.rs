//! Central finite differences used as independent oracles.
//!
//! Gradient and Jacobian steps are `max(1, |u_k|) * eps^(1/3)`; Hessian steps
//! are `max(1, |u_k|) * eps^(1/4)`.

use crate::error::Result;
use crate::linalg::{Matrix, State};

pub fn first_order_step(x: f64) -> f64 {
    x.abs().max(1.0) * f64::EPSILON.cbrt()
}

pub fn second_order_step(x: f64) -> f64 {
    x.abs().max(1.0) * f64::EPSILON.powf(0.25)
}

pub fn derivative(f: impl Fn(f64) -> Result<f64>, x: f64) -> Result<f64> {
    let h = first_order_step(x);
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

pub fn gradient(f: impl Fn(&State) -> Result<f64>, u: &State) -> Result<State> {
    let mut g = State::zeros(u.len());
    let mut w = u.clone();
    for k in 0..u.len() {
        let h = first_order_step(u[k]);
        w[k] = u[k] + h;
        let fp = f(&w)?;
        w[k] = u[k] - h;
        let fm = f(&w)?;
        w[k] = u[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Jacobian `J[(i, k)] = d f_i / d u_k` of a vector map.
pub fn jacobian(f: impl Fn(&State) -> Result<State>, u: &State) -> Result<Matrix> {
    let n = u.len();
    let mut w = u.clone();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let h = first_order_step(u[k]);
        w[k] = u[k] + h;
        let fp = f(&w)?;
        w[k] = u[k] - h;
        let fm = f(&w)?;
        w[k] = u[k];
        cols.push((fp - fm) / (2.0 * h));
    }
    let m = cols.first().map_or(0, |c| c.len());
    Ok(Matrix::from_fn(m, n, |i, k| cols[k][i]))
}

pub fn hessian(f: impl Fn(&State) -> Result<f64>, u: &State) -> Result<Matrix> {
    let n = u.len();
    let mut h = Matrix::zeros(n, n);
    let mut w = u.clone();
    let f0 = f(u)?;
    for a in 0..n {
        let ha = second_order_step(u[a]);
        w[a] = u[a] + ha;
        let fp = f(&w)?;
        w[a] = u[a] - ha;
        let fm = f(&w)?;
        w[a] = u[a];
        h[(a, a)] = (fp - 2.0 * f0 + fm) / (ha * ha);
        for b in (a + 1)..n {
            let hb = second_order_step(u[b]);
            let mut eval = |sa: f64, sb: f64| {
                w[a] = u[a] + sa * ha;
                w[b] = u[b] + sb * hb;
                let v = f(&w);
                w[a] = u[a];
                w[b] = u[b];
                v
            };
            let v = (eval(1.0, 1.0)? - eval(1.0, -1.0)? - eval(-1.0, 1.0)? + eval(-1.0, -1.0)?)
                / (4.0 * ha * hb);
            h[(a, b)] = v;
            h[(b, a)] = v;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::state;

    #[test]
    fn gradient_of_cubic() {
        let f = |u: &State| Ok(u[0].powi(3) + u[0] * u[1]);
        let g = gradient(f, &state(&[2.0, -1.0])).unwrap();
        assert!((g[0] - 11.0).abs() < 1e-8);
        assert!((g[1] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn hessian_of_quadratic_form() {
        let f = |u: &State| Ok(u[0] * u[0] + 3.0 * u[0] * u[1] - u[1] * u[1]);
        let h = hessian(f, &state(&[0.3, 0.7])).unwrap();
        assert!((h[(0, 0)] - 2.0).abs() < 1e-6);
        assert!((h[(0, 1)] - 3.0).abs() < 1e-6);
        assert!((h[(1, 1)] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn jacobian_layout() {
        let f = |u: &State| Ok(state(&[u[0] * u[1], u[1]]));
        let j = jacobian(f, &state(&[2.0, 5.0])).unwrap();
        assert!((j[(0, 0)] - 5.0).abs() < 1e-8);
        assert!((j[(0, 1)] - 2.0).abs() < 1e-8);
        assert!(j[(1, 0)].abs() < 1e-8);
    }
}
