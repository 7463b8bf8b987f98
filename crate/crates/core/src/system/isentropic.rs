//! Isentropic gamma-law Euler `(rho, m)` with `p = kappa rho^gamma` and the
//! mechanical energy entropy.

use crate::entropy::{Convexity, EntropyPair};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, State};
use crate::system::{SampleRng, System, RHO_MIN};
use rand::RngExt;

#[derive(Debug, Clone)]
pub struct IsentropicEuler {
    gamma: f64,
    kappa: f64,
    dim: usize,
}

impl IsentropicEuler {
    pub fn new(gamma: f64, kappa: f64, dim: usize) -> Result<Self> {
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be at least 1, got {gamma}")));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidParameter(format!("isentropic dimension must be 1 or 2, got {dim}")));
        }
        Ok(Self { gamma, kappa, dim })
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.kappa * rho.powf(self.gamma)
    }

    fn dpressure(&self, rho: f64) -> f64 {
        self.kappa * self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// Internal energy density `rho e(rho)` and its first derivative.
    fn internal(&self, rho: f64) -> (f64, f64) {
        if self.gamma == 1.0 {
            (self.kappa * rho * rho.ln(), self.kappa * (rho.ln() + 1.0))
        } else {
            let g1 = self.gamma - 1.0;
            (self.pressure(rho) / g1, self.kappa * self.gamma * rho.powf(g1) / g1)
        }
    }
}

impl System for IsentropicEuler {
    fn id(&self) -> &str {
        "isentropic_euler"
    }
    fn equations(&self) -> usize {
        self.dim + 1
    }
    fn dimension(&self) -> usize {
        self.dim
    }
    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("gamma", self.gamma), ("kappa", self.kappa), ("dim", self.dim as f64)]
    }
    fn admissible(&self, u: &State) -> Result<()> {
        if !(u[0] >= RHO_MIN) {
            return Err(Error::InadmissibleState(format!("density {} below floor {RHO_MIN}", u[0])));
        }
        Ok(())
    }
    fn flux(&self, u: &State, j: usize) -> Result<State> {
        let rho = u[0];
        let vj = u[j + 1] / rho;
        let mut f = State::zeros(self.dim + 1);
        f[0] = u[j + 1];
        for k in 1..=self.dim {
            f[k] = u[k] * vj;
        }
        f[j + 1] += self.pressure(rho);
        Ok(f)
    }
    fn analytic_jacobian(&self, u: &State, j: usize) -> Option<Matrix> {
        let n = self.dim + 1;
        let rho = u[0];
        let vj = u[j + 1] / rho;
        let mut a = Matrix::zeros(n, n);
        a[(0, j + 1)] = 1.0;
        for k in 1..=self.dim {
            let vk = u[k] / rho;
            a[(k, 0)] = -vk * vj;
            a[(k, k)] += vj;
            a[(k, j + 1)] += vk;
        }
        a[(j + 1, 0)] += self.dpressure(rho);
        Some(a)
    }
    fn has_analytic_jacobian(&self) -> bool {
        true
    }
    fn sample_state(&self, rng: &mut SampleRng) -> State {
        let rho: f64 = rng.random_range(0.5..2.0);
        let mut u = State::zeros(self.dim + 1);
        u[0] = rho;
        for k in 1..=self.dim {
            u[k] = rho * rng.random_range(-1.0..1.0);
        }
        u
    }
}

/// `eta = |m|^2 / (2 rho) + rho e(rho)`, `q_j = v_j (eta + p)`.
#[derive(Debug, Clone)]
pub struct IsentropicEnergy {
    system: IsentropicEuler,
}

impl IsentropicEnergy {
    pub fn new(system: &IsentropicEuler) -> Self {
        Self { system: system.clone() }
    }
}

impl EntropyPair for IsentropicEnergy {
    fn id(&self) -> String {
        "energy".into()
    }
    fn convexity(&self) -> Convexity {
        Convexity::Strict
    }
    fn eta(&self, u: &State) -> Result<f64> {
        let rho = u[0];
        let m2: f64 = u.rows(1, self.system.dim).norm_squared();
        Ok(0.5 * m2 / rho + self.system.internal(rho).0)
    }
    fn grad(&self, u: &State) -> Result<State> {
        let rho = u[0];
        let mut g = State::zeros(u.len());
        let mut v2 = 0.0;
        for k in 1..u.len() {
            let vk = u[k] / rho;
            g[k] = vk;
            v2 += vk * vk;
        }
        g[0] = -0.5 * v2 + self.system.internal(rho).1;
        Ok(g)
    }
    fn hess(&self, u: &State) -> Result<Matrix> {
        let rho = u[0];
        let n = u.len();
        let mut h = Matrix::zeros(n, n);
        let mut v2 = 0.0;
        for k in 1..n {
            let vk = u[k] / rho;
            v2 += vk * vk;
            h[(0, k)] = -vk / rho;
            h[(k, 0)] = -vk / rho;
            h[(k, k)] = 1.0 / rho;
        }
        h[(0, 0)] = v2 / rho + self.system.dpressure(rho) / rho;
        Ok(h)
    }
    fn flux(&self, u: &State, j: usize) -> Result<f64> {
        Ok(u[j + 1] / u[0] * (self.eta(u)? + self.system.pressure(u[0])))
    }
    fn inverse_guess(&self, v: &State) -> Option<State> {
        let sys = &self.system;
        let v2: f64 = v.rows(1, sys.dim).norm_squared();
        let w = v[0] + 0.5 * v2;
        let rho = if sys.gamma == 1.0 {
            (w / sys.kappa - 1.0).exp()
        } else {
            let g1 = sys.gamma - 1.0;
            if !(w > 0.0) {
                return None;
            }
            (w * g1 / (sys.kappa * sys.gamma)).powf(1.0 / g1)
        };
        let mut u = State::zeros(v.len());
        u[0] = rho;
        for k in 1..v.len() {
            u[k] = rho * v[k];
        }
        u.iter().all(|x| x.is_finite()).then_some(u)
    }
}
