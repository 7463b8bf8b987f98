//! Scalar laws `u_t + f(u)_x = 0` with convex flux, the quadratic entropy
//! and the Kruzhkov family `|u - c|`.

use crate::entropy::{Convexity, EntropyPair};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, State};
use crate::system::{SampleRng, System};
use rand::RngExt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarFlux {
    /// `f(u) = a u^2 / 2`; Burgers for `a = 1`.
    Quadratic { a: f64 },
    /// `f(u) = exp(k u) / k`.
    Exponential { k: f64 },
}

impl ScalarFlux {
    pub fn f(&self, u: f64) -> f64 {
        match *self {
            Self::Quadratic { a } => 0.5 * a * u * u,
            Self::Exponential { k } => (k * u).exp() / k,
        }
    }
    pub fn df(&self, u: f64) -> f64 {
        match *self {
            Self::Quadratic { a } => a * u,
            Self::Exponential { k } => (k * u).exp(),
        }
    }
    pub fn d2f(&self, u: f64) -> f64 {
        match *self {
            Self::Quadratic { a } => a,
            Self::Exponential { k } => k * (k * u).exp(),
        }
    }
    /// `(f')^{-1}(xi)`, when `xi` is in the range of `f'`.
    pub fn inverse_df(&self, xi: f64) -> Option<f64> {
        match *self {
            Self::Quadratic { a } => Some(xi / a),
            Self::Exponential { k } => (xi > 0.0).then(|| xi.ln() / k),
        }
    }
    /// `q(u) = int_0^u s f'(s) ds`, the flux of `eta = u^2 / 2`.
    pub fn quadratic_entropy_flux(&self, u: f64) -> f64 {
        match *self {
            Self::Quadratic { a } => a * u * u * u / 3.0,
            Self::Exponential { k } => (k * u).exp() * (u / k - 1.0 / (k * k)) + 1.0 / (k * k),
        }
    }
    pub fn is_strictly_convex_on(&self, lo: f64, hi: f64) -> bool {
        (0..=16).all(|i| self.d2f(lo + (hi - lo) * i as f64 / 16.0) > 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct ScalarLaw {
    id: &'static str,
    flux: ScalarFlux,
}

impl ScalarLaw {
    pub fn burgers() -> Self {
        Self { id: "burgers", flux: ScalarFlux::Quadratic { a: 1.0 } }
    }

    pub fn new(flux: ScalarFlux) -> Result<Self> {
        match flux {
            ScalarFlux::Quadratic { a } if a > 0.0 => {
                Ok(Self { id: if a == 1.0 { "burgers" } else { "scalar_quadratic" }, flux })
            }
            ScalarFlux::Exponential { k } if k > 0.0 => Ok(Self { id: "scalar_exp", flux }),
            _ => Err(Error::InvalidParameter(format!("flux {flux:?} is not strictly convex"))),
        }
    }

    pub fn flux_kind(&self) -> ScalarFlux {
        self.flux
    }
}

impl System for ScalarLaw {
    fn id(&self) -> &str {
        self.id
    }
    fn equations(&self) -> usize {
        1
    }
    fn dimension(&self) -> usize {
        1
    }
    fn params(&self) -> Vec<(&'static str, f64)> {
        match self.flux {
            ScalarFlux::Quadratic { a } => vec![("a", a)],
            ScalarFlux::Exponential { k } => vec![("k", k)],
        }
    }
    fn flux(&self, u: &State, _j: usize) -> Result<State> {
        Ok(State::from_element(1, self.flux.f(u[0])))
    }
    fn analytic_jacobian(&self, u: &State, _j: usize) -> Option<Matrix> {
        Some(Matrix::from_element(1, 1, self.flux.df(u[0])))
    }
    fn has_analytic_jacobian(&self) -> bool {
        true
    }
    fn sample_state(&self, rng: &mut SampleRng) -> State {
        let range = match self.flux {
            ScalarFlux::Quadratic { .. } => 2.0,
            ScalarFlux::Exponential { .. } => 1.0,
        };
        State::from_element(1, rng.random_range(-range..range))
    }
}

/// `eta = u^2 / 2`.
#[derive(Debug, Clone)]
pub struct ScalarQuadratic {
    flux: ScalarFlux,
}

impl ScalarQuadratic {
    pub fn new(flux: ScalarFlux) -> Self {
        Self { flux }
    }
}

impl EntropyPair for ScalarQuadratic {
    fn id(&self) -> String {
        "quadratic".into()
    }
    fn convexity(&self) -> Convexity {
        Convexity::Strict
    }
    fn eta(&self, u: &State) -> Result<f64> {
        Ok(0.5 * u[0] * u[0])
    }
    fn grad(&self, u: &State) -> Result<State> {
        Ok(u.clone())
    }
    fn hess(&self, _u: &State) -> Result<Matrix> {
        Ok(Matrix::identity(1, 1))
    }
    fn flux(&self, u: &State, _j: usize) -> Result<f64> {
        Ok(self.flux.quadratic_entropy_flux(u[0]))
    }
    fn inverse_guess(&self, v: &State) -> Option<State> {
        Some(v.clone())
    }
}

/// Kruzhkov entropy `|u - c|` with flux `sign(u - c) (f(u) - f(c))`.
#[derive(Debug, Clone)]
pub struct Kruzhkov {
    flux: ScalarFlux,
    c: f64,
}

impl Kruzhkov {
    pub fn new(flux: ScalarFlux, c: f64) -> Self {
        Self { flux, c }
    }
    pub fn c(&self) -> f64 {
        self.c
    }
}

impl EntropyPair for Kruzhkov {
    fn id(&self) -> String {
        "kruzhkov".into()
    }
    fn convexity(&self) -> Convexity {
        Convexity::LipschitzOnly
    }
    fn eta(&self, u: &State) -> Result<f64> {
        Ok((u[0] - self.c).abs())
    }
    fn grad(&self, u: &State) -> Result<State> {
        // Right-sided derivative at the kink.
        let s = if u[0] >= self.c { 1.0 } else { -1.0 };
        Ok(State::from_element(1, s))
    }
    fn hess(&self, _u: &State) -> Result<Matrix> {
        Err(Error::HessianUnavailable(self.id()))
    }
    fn flux(&self, u: &State, _j: usize) -> Result<f64> {
        let s = (u[0] - self.c).signum();
        let s = if u[0] == self.c { 0.0 } else { s };
        Ok(s * (self.flux.f(u[0]) - self.flux.f(self.c)))
    }
    fn smooth_at(&self, u: &State) -> bool {
        u[0] != self.c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::state;
    use crate::system::{flux_eval, jacobian_eval};

    #[test]
    fn burgers_flux_and_jacobian() {
        let b = ScalarLaw::burgers();
        assert_eq!(flux_eval(&b, &state(&[0.0]), 0).unwrap()[0], 0.0);
        assert_eq!(jacobian_eval(&b, &state(&[2.0]), 0).unwrap()[(0, 0)], 2.0);
    }

    #[test]
    fn kruzhkov_values() {
        let k = Kruzhkov::new(ScalarFlux::Quadratic { a: 1.0 }, 0.5);
        let u = state(&[1.0]);
        assert_eq!(k.eta(&u).unwrap(), 0.5);
        assert!((k.flux(&u, 0).unwrap() - 0.375).abs() < 1e-15);
        assert!(!k.smooth_at(&state(&[0.5])));
        assert_eq!(k.grad(&state(&[0.5])).unwrap()[0], 1.0);
    }

    #[test]
    fn exponential_entropy_flux_derivative() {
        let f = ScalarFlux::Exponential { k: 1.5 };
        for u in [-0.7, 0.0, 0.4] {
            let h = 1e-5;
            let dq = (f.quadratic_entropy_flux(u + h) - f.quadratic_entropy_flux(u - h)) / (2.0 * h);
            assert!((dq - u * f.df(u)).abs() < 1e-8);
        }
        assert_eq!(f.inverse_df(-1.0), None);
    }
}
