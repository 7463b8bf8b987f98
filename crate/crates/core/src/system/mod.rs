//! Conservation-law systems `u_t + sum_j f_j(u)_{x_j} = 0` and their
//! quasi-linear Jacobians `A_j = df_j/du`.

mod euler;
mod isentropic;
pub mod registry;
mod rozhdestvenskii;
mod scalar;
mod symmetric;
mod ultrarel;

pub use euler::{Euler, EulerEntropy, EntropyGenerator};
pub use isentropic::{IsentropicEnergy, IsentropicEuler};
pub use registry::{build_pair, build_system, catalog, PairInfo, Params, SystemInfo};
pub use rozhdestvenskii::{Rozhdestvenskii, RozhdestvenskiiQuadratic};
pub use scalar::{Kruzhkov, ScalarFlux, ScalarLaw, ScalarQuadratic};
pub use symmetric::{EtaLambda, SymmetricCubic, SymmetricQuadratic};
pub use ultrarel::UltraRelativistic;

use std::fmt;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::{all_finite, Matrix, State};

pub type SampleRng = ChaCha8Rng;

/// Euler admissibility floors for density and specific internal energy.
pub const RHO_MIN: f64 = 1e-12;
pub const E_MIN: f64 = 1e-12;

pub trait System: Send + Sync + fmt::Debug {
    fn id(&self) -> &str;
    /// Number of equations `N`.
    fn equations(&self) -> usize;
    /// Space dimension `d`.
    fn dimension(&self) -> usize;
    fn params(&self) -> Vec<(&'static str, f64)> {
        Vec::new()
    }
    /// Rejects states outside the admissible set; finiteness is checked by
    /// the callers in this module.
    fn admissible(&self, _u: &State) -> Result<()> {
        Ok(())
    }
    /// Spatial flux `f_j(u)` with 0-based direction `j`.
    fn flux(&self, u: &State, j: usize) -> Result<State>;
    fn analytic_jacobian(&self, _u: &State, _j: usize) -> Option<Matrix> {
        None
    }
    fn has_analytic_jacobian(&self) -> bool;
    /// Time-derivative flux; identity for systems written in conserved variables.
    fn temporal_flux(&self, u: &State) -> Result<State> {
        Ok(u.clone())
    }
    fn is_conservative(&self) -> bool {
        true
    }
    /// Draws a state from a fixed, moderate region of the admissible set.
    fn sample_state(&self, rng: &mut SampleRng) -> State;
}

/// Validates shape, finiteness and admissibility of `u`.
pub fn check_state(system: &dyn System, u: &State) -> Result<()> {
    if u.len() != system.equations() {
        return Err(Error::DimensionMismatch { expected: system.equations(), got: u.len() });
    }
    if !all_finite(u) {
        return Err(Error::InadmissibleState(format!("non-finite entries in {:?}", u.as_slice())));
    }
    system.admissible(u)
}

fn check_direction(system: &dyn System, j: usize) -> Result<()> {
    if j >= system.dimension() {
        return Err(Error::InvalidDirection { index: j, dim: system.dimension() });
    }
    Ok(())
}

pub fn flux_eval(system: &dyn System, u: &State, j: usize) -> Result<State> {
    check_direction(system, j)?;
    check_state(system, u)?;
    system.flux(u, j)
}

/// `A_j(u)`: the registered analytic Jacobian when available, otherwise a
/// central finite-difference Jacobian of the flux.
pub fn jacobian_eval(system: &dyn System, u: &State, j: usize) -> Result<Matrix> {
    check_direction(system, j)?;
    check_state(system, u)?;
    match system.analytic_jacobian(u, j) {
        Some(a) => Ok(a),
        None => fd_jacobian(system, u, j),
    }
}

pub fn fd_jacobian(system: &dyn System, u: &State, j: usize) -> Result<Matrix> {
    fd::jacobian(|w| system.flux(w, j), u)
}

/// Normal Jacobian `sum_j n_j A_j(u)`.
pub fn normal_jacobian(system: &dyn System, u: &State, normal: &[f64]) -> Result<Matrix> {
    let n = system.equations();
    let mut a = Matrix::zeros(n, n);
    for (j, &nj) in normal.iter().enumerate() {
        if nj != 0.0 {
            a += jacobian_eval(system, u, j)? * nj;
        }
    }
    Ok(a)
}

pub fn normal_flux(system: &dyn System, u: &State, normal: &[f64]) -> Result<State> {
    let mut f = State::zeros(system.equations());
    for (j, &nj) in normal.iter().enumerate() {
        if nj != 0.0 {
            f += flux_eval(system, u, j)? * nj;
        }
    }
    Ok(f)
}

pub fn sample_states(system: &dyn System, count: usize, seed: u64) -> Vec<State> {
    use rand::SeedableRng;
    let mut rng = SampleRng::seed_from_u64(seed);
    (0..count).map(|_| system.sample_state(&mut rng)).collect()
}
