//! The completely non-conservative 3x3 system
//! `u_t + diag(u2, u3, u1) u_x = 0`. It has no flux; only the quasi-linear
//! coefficient matrix is available.

use crate::entropy::{Convexity, EntropyPair};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, State};
use crate::system::{SampleRng, System};
use rand::RngExt;

#[derive(Debug, Clone, Copy)]
pub struct Rozhdestvenskii;

impl System for Rozhdestvenskii {
    fn id(&self) -> &str {
        "rozhdestvenskii"
    }
    fn equations(&self) -> usize {
        3
    }
    fn dimension(&self) -> usize {
        1
    }
    fn flux(&self, _u: &State, _j: usize) -> Result<State> {
        Err(Error::NonConservative(self.id().into()))
    }
    fn analytic_jacobian(&self, u: &State, _j: usize) -> Option<Matrix> {
        Some(Matrix::from_diagonal(&State::from_column_slice(&[u[1], u[2], u[0]])))
    }
    fn has_analytic_jacobian(&self) -> bool {
        true
    }
    fn is_conservative(&self) -> bool {
        false
    }
    fn sample_state(&self, rng: &mut SampleRng) -> State {
        State::from_fn(3, |_, _| rng.random_range(-2.0..2.0))
    }
}

/// Candidate observable `|u|^2 / 2` with `q = 0`. Not an entropy of this
/// system; registered to exhibit the failure of compatibility.
#[derive(Debug, Clone, Copy)]
pub struct RozhdestvenskiiQuadratic;

impl EntropyPair for RozhdestvenskiiQuadratic {
    fn id(&self) -> String {
        "quadratic".into()
    }
    fn convexity(&self) -> Convexity {
        Convexity::Strict
    }
    fn compatible(&self) -> bool {
        false
    }
    fn eta(&self, u: &State) -> Result<f64> {
        Ok(0.5 * u.norm_squared())
    }
    fn grad(&self, u: &State) -> Result<State> {
        Ok(u.clone())
    }
    fn hess(&self, _u: &State) -> Result<Matrix> {
        Ok(Matrix::identity(3, 3))
    }
    fn flux(&self, _u: &State, _j: usize) -> Result<f64> {
        Ok(0.0)
    }
    fn inverse_guess(&self, v: &State) -> Option<State> {
        Some(v.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::state;
    use crate::system::{flux_eval, jacobian_eval};

    #[test]
    fn diagonal_coefficients() {
        let a = jacobian_eval(&Rozhdestvenskii, &state(&[1.0, 2.0, 3.0]), 0).unwrap();
        assert_eq!(a, Matrix::from_diagonal(&state(&[2.0, 3.0, 1.0])));
    }

    #[test]
    fn no_flux() {
        assert!(matches!(
            flux_eval(&Rozhdestvenskii, &state(&[1.0, 2.0, 3.0]), 0),
            Err(Error::NonConservative(_))
        ));
    }
}
