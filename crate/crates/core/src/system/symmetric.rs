//! Symmetric demo system `u_t + (u |u|^2)_x = 0`, N = 2, with symmetric
//! Jacobian `|u|^2 I + 2 u u^T` and flux potential `zeta = |u|^4 / 4`.

use crate::entropy::{Convexity, EntropyPair};
use crate::error::Result;
use crate::linalg::{Matrix, State};
use crate::system::{SampleRng, System};
use rand::RngExt;

#[derive(Debug, Clone, Copy)]
pub struct SymmetricCubic;

impl SymmetricCubic {
    pub fn jacobian(u: &State) -> Matrix {
        Matrix::identity(2, 2) * u.norm_squared() + u * u.transpose() * 2.0
    }
}

impl System for SymmetricCubic {
    fn id(&self) -> &str {
        "symmetric_demo"
    }
    fn equations(&self) -> usize {
        2
    }
    fn dimension(&self) -> usize {
        1
    }
    fn flux(&self, u: &State, _j: usize) -> Result<State> {
        Ok(u * u.norm_squared())
    }
    fn analytic_jacobian(&self, u: &State, _j: usize) -> Option<Matrix> {
        Some(Self::jacobian(u))
    }
    fn has_analytic_jacobian(&self) -> bool {
        true
    }
    /// Uniform in the unit disk, where `eta_lambda` is convex for `lambda < 1/3`.
    fn sample_state(&self, rng: &mut SampleRng) -> State {
        loop {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            if a * a + b * b < 1.0 {
                return State::from_column_slice(&[a, b]);
            }
        }
    }
}

/// `eta = |u|^2 / 2`, `q = 3 |u|^4 / 4`.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricQuadratic;

impl EntropyPair for SymmetricQuadratic {
    fn id(&self) -> String {
        "quadratic".into()
    }
    fn convexity(&self) -> Convexity {
        Convexity::Strict
    }
    fn eta(&self, u: &State) -> Result<f64> {
        Ok(0.5 * u.norm_squared())
    }
    fn grad(&self, u: &State) -> Result<State> {
        Ok(u.clone())
    }
    fn hess(&self, u: &State) -> Result<Matrix> {
        Ok(Matrix::identity(u.len(), u.len()))
    }
    fn flux(&self, u: &State, _j: usize) -> Result<f64> {
        Ok(0.75 * u.norm_squared().powi(2))
    }
    fn inverse_guess(&self, v: &State) -> Option<State> {
        Some(v.clone())
    }
}

/// `eta_lambda = |u|^2 / 2 - lambda zeta(u)` with Hessian `I - lambda A(u)`,
/// convex where `lambda A(u) < I`.
#[derive(Debug, Clone, Copy)]
pub struct EtaLambda {
    pub lambda: f64,
}

impl EntropyPair for EtaLambda {
    fn id(&self) -> String {
        "eta_lambda".into()
    }
    fn convexity(&self) -> Convexity {
        Convexity::Strict
    }
    fn eta(&self, u: &State) -> Result<f64> {
        let r2 = u.norm_squared();
        Ok(0.5 * r2 - self.lambda * 0.25 * r2 * r2)
    }
    fn grad(&self, u: &State) -> Result<State> {
        Ok(u * (1.0 - self.lambda * u.norm_squared()))
    }
    fn hess(&self, u: &State) -> Result<Matrix> {
        Ok(Matrix::identity(2, 2) - SymmetricCubic::jacobian(u) * self.lambda)
    }
    /// `3|u|^4/4 - lambda |f|^2 / 2` with `|f|^2 = |u|^6`.
    fn flux(&self, u: &State, _j: usize) -> Result<f64> {
        let r2 = u.norm_squared();
        Ok(0.75 * r2 * r2 - 0.5 * self.lambda * r2 * r2 * r2)
    }
    fn inverse_guess(&self, v: &State) -> Option<State> {
        Some(v.clone())
    }
}
