//! Ultra-relativistic Euler in the variables `(p, m)`, `vel = m / p`,
//! `E = 3p + p|vel|^2`. Temporal and spatial fluxes are both homogeneous of
//! degree one; no entropy pair is registered.

use crate::error::{Error, Result};
use crate::linalg::State;
use crate::system::{SampleRng, System};
use rand::RngExt;

#[derive(Debug, Clone)]
pub struct UltraRelativistic {
    dim: usize,
}

impl UltraRelativistic {
    pub fn new(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        Ok(Self { dim })
    }

    fn lorentz(&self, u: &State) -> (f64, f64) {
        let p = u[0];
        let v2: f64 = (1..=self.dim).map(|k| (u[k] / p).powi(2)).sum();
        ((1.0 + v2).sqrt(), v2)
    }

    pub fn energy(&self, u: &State) -> f64 {
        let (_, v2) = self.lorentz(u);
        3.0 * u[0] + u[0] * v2
    }
}

impl System for UltraRelativistic {
    fn id(&self) -> &str {
        "ultra_relativistic"
    }
    fn equations(&self) -> usize {
        self.dim + 1
    }
    fn dimension(&self) -> usize {
        self.dim
    }
    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("dim", self.dim as f64)]
    }
    fn admissible(&self, u: &State) -> Result<()> {
        if !(u[0] > 0.0) {
            return Err(Error::InadmissibleState(format!("pressure {} must be positive", u[0])));
        }
        Ok(())
    }
    /// Rows `4 m_k vel_j + p delta_jk`, then `4 m_j sqrt(1+|vel|^2)`.
    fn flux(&self, u: &State, j: usize) -> Result<State> {
        let p = u[0];
        let (w, _) = self.lorentz(u);
        let vj = u[j + 1] / p;
        let mut f = State::zeros(self.dim + 1);
        for k in 0..self.dim {
            f[k] = 4.0 * u[k + 1] * vj;
        }
        f[j] += p;
        f[self.dim] = 4.0 * u[j + 1] * w;
        Ok(f)
    }
    fn has_analytic_jacobian(&self) -> bool {
        false
    }
    /// Rows `4 m_k sqrt(1+|vel|^2)`, then `E`.
    fn temporal_flux(&self, u: &State) -> Result<State> {
        let (w, _) = self.lorentz(u);
        let mut f = State::zeros(self.dim + 1);
        for k in 0..self.dim {
            f[k] = 4.0 * u[k + 1] * w;
        }
        f[self.dim] = self.energy(u);
        Ok(f)
    }
    fn sample_state(&self, rng: &mut SampleRng) -> State {
        let p: f64 = rng.random_range(0.5..2.0);
        let mut u = State::zeros(self.dim + 1);
        u[0] = p;
        for k in 1..=self.dim {
            u[k] = p * rng.random_range(-1.0..1.0);
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::state;

    #[test]
    fn fluxes_at_rest() {
        let s = UltraRelativistic::new(1).unwrap();
        let u = state(&[1.0, 0.0]);
        assert_eq!(s.temporal_flux(&u).unwrap(), state(&[0.0, 3.0]));
        assert_eq!(s.flux(&u, 0).unwrap(), state(&[1.0, 0.0]));
    }
}
