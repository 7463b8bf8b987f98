//! Compressible gamma-law Euler equations in conserved variables
//! `(rho, m_1..m_d, E)` and the entropy family `eta = -rho h(S)` with
//! `S = ln(p rho^-gamma)`.

use crate::entropy::{Convexity, EntropyPair};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, State};
use crate::system::{SampleRng, System, E_MIN, RHO_MIN};
use rand::RngExt;

#[derive(Debug, Clone)]
pub struct Euler {
    gamma: f64,
    dim: usize,
}

/// Primitive view of an Euler state.
#[derive(Debug, Clone)]
pub struct Primitive {
    pub rho: f64,
    pub vel: Vec<f64>,
    pub p: f64,
}

impl Euler {
    pub fn new(gamma: f64, dim: usize) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("euler dimension must be 1, 2 or 3, got {dim}")));
        }
        Ok(Self { gamma, dim })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pressure(&self, u: &State) -> f64 {
        let rho = u[0];
        let m2: f64 = (1..=self.dim).map(|k| u[k] * u[k]).sum();
        (self.gamma - 1.0) * (u[self.dim + 1] - 0.5 * m2 / rho)
    }

    pub fn primitive(&self, u: &State) -> Primitive {
        let rho = u[0];
        Primitive { rho, vel: (1..=self.dim).map(|k| u[k] / rho).collect(), p: self.pressure(u) }
    }

    pub fn conserved(&self, rho: f64, vel: &[f64], p: f64) -> State {
        let d = self.dim;
        let mut u = State::zeros(d + 2);
        u[0] = rho;
        let mut v2 = 0.0;
        for k in 0..d {
            let vk = vel.get(k).copied().unwrap_or(0.0);
            u[k + 1] = rho * vk;
            v2 += vk * vk;
        }
        u[d + 1] = p / (self.gamma - 1.0) + 0.5 * rho * v2;
        u
    }

    pub fn sound_speed(&self, u: &State) -> f64 {
        (self.gamma * self.pressure(u) / u[0]).sqrt()
    }

    /// `S = ln p - gamma ln rho`.
    pub fn specific_entropy(&self, u: &State) -> f64 {
        self.pressure(u).ln() - self.gamma * u[0].ln()
    }

    fn grad_p(&self, u: &State) -> State {
        let d = self.dim;
        let g1 = self.gamma - 1.0;
        let rho = u[0];
        let mut g = State::zeros(d + 2);
        let mut v2 = 0.0;
        for k in 1..=d {
            let vk = u[k] / rho;
            v2 += vk * vk;
            g[k] = -g1 * vk;
        }
        g[0] = 0.5 * g1 * v2;
        g[d + 1] = g1;
        g
    }

    fn hess_p(&self, u: &State) -> Matrix {
        let d = self.dim;
        let g1 = self.gamma - 1.0;
        let rho = u[0];
        let mut h = Matrix::zeros(d + 2, d + 2);
        let mut v2 = 0.0;
        for k in 1..=d {
            let vk = u[k] / rho;
            v2 += vk * vk;
            h[(0, k)] = g1 * vk / rho;
            h[(k, 0)] = g1 * vk / rho;
            h[(k, k)] = -g1 / rho;
        }
        h[(0, 0)] = -g1 * v2 / rho;
        h
    }

    /// Gradient and Hessian of `S` with respect to the conserved variables.
    pub fn entropy_derivatives(&self, u: &State) -> (State, Matrix) {
        let n = self.dim + 2;
        let p = self.pressure(u);
        let rho = u[0];
        let gp = self.grad_p(u);
        let mut gs = &gp / p;
        gs[0] -= self.gamma / rho;
        let mut hs = self.hess_p(u) / p - &gp * gp.transpose() / (p * p);
        hs[(0, 0)] += self.gamma / (rho * rho);
        debug_assert_eq!(hs.nrows(), n);
        (gs, hs)
    }
}

impl System for Euler {
    fn id(&self) -> &str {
        "euler"
    }
    fn equations(&self) -> usize {
        self.dim + 2
    }
    fn dimension(&self) -> usize {
        self.dim
    }
    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("gamma", self.gamma), ("dim", self.dim as f64)]
    }
    fn admissible(&self, u: &State) -> Result<()> {
        let rho = u[0];
        if !(rho >= RHO_MIN) {
            return Err(Error::InadmissibleState(format!("density {rho} below floor {RHO_MIN}")));
        }
        let e = self.pressure(u) / ((self.gamma - 1.0) * rho);
        if !(e >= E_MIN) {
            return Err(Error::InadmissibleState(format!("specific internal energy {e} below floor {E_MIN}")));
        }
        Ok(())
    }
    fn flux(&self, u: &State, j: usize) -> Result<State> {
        let d = self.dim;
        let rho = u[0];
        let p = self.pressure(u);
        let vj = u[j + 1] / rho;
        let mut f = State::zeros(d + 2);
        f[0] = u[j + 1];
        for k in 1..=d {
            f[k] = u[k] * vj;
        }
        f[j + 1] += p;
        f[d + 1] = (u[d + 1] + p) * vj;
        Ok(f)
    }
    fn analytic_jacobian(&self, u: &State, j: usize) -> Option<Matrix> {
        let d = self.dim;
        let n = d + 2;
        let rho = u[0];
        let p = self.pressure(u);
        let gp = self.grad_p(u);
        let vj = u[j + 1] / rho;
        let mut a = Matrix::zeros(n, n);
        a[(0, j + 1)] = 1.0;
        for k in 1..=d {
            let vk = u[k] / rho;
            a[(k, 0)] = -vk * vj;
            a[(k, k)] += vj;
            a[(k, j + 1)] += vk;
        }
        for l in 0..n {
            a[(j + 1, l)] += gp[l];
        }
        let enth = (u[d + 1] + p) / rho;
        for l in 0..n {
            a[(d + 1, l)] = gp[l] * vj;
        }
        a[(d + 1, 0)] -= enth * vj;
        a[(d + 1, j + 1)] += enth;
        a[(d + 1, d + 1)] += vj;
        Some(a)
    }
    fn has_analytic_jacobian(&self) -> bool {
        true
    }
    fn sample_state(&self, rng: &mut SampleRng) -> State {
        let rho = rng.random_range(0.5..2.0);
        let vel: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = rng.random_range(0.5..2.0);
        self.conserved(rho, &vel, p)
    }
}

/// Generator `h` in `eta = -rho h(S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyGenerator {
    /// `h(S) = S`, the physical entropy `-rho S`.
    Physical,
    /// `h(S) = (gamma+1)/(gamma-1) exp(S/(gamma+1))`.
    Tadmor,
    /// `h(S) = exp(S/(alpha+gamma))`, i.e. `eta = -(p rho^alpha)^(1/(alpha+gamma))`.
    Homogeneous { alpha: f64 },
}

#[derive(Debug, Clone)]
pub struct EulerEntropy {
    system: Euler,
    generator: EntropyGenerator,
}

impl EulerEntropy {
    pub fn new(system: &Euler, generator: EntropyGenerator) -> Result<Self> {
        if let EntropyGenerator::Homogeneous { alpha } = generator {
            if !(alpha >= 0.0) {
                return Err(Error::InvalidParameter(format!("alpha must be non-negative, got {alpha}")));
            }
        }
        Ok(Self { system: system.clone(), generator })
    }

    pub fn generator(&self) -> EntropyGenerator {
        self.generator
    }

    /// `(h, h', h'')` at `S`.
    fn h(&self, s: f64) -> (f64, f64, f64) {
        let g = self.system.gamma;
        match self.generator {
            EntropyGenerator::Physical => (s, 1.0, 0.0),
            EntropyGenerator::Tadmor => {
                let e = (s / (g + 1.0)).exp();
                ((g + 1.0) / (g - 1.0) * e, e / (g - 1.0), e / ((g - 1.0) * (g + 1.0)))
            }
            EntropyGenerator::Homogeneous { alpha } => {
                let k = alpha + g;
                let e = (s / k).exp();
                (e, e / k, e / (k * k))
            }
        }
    }

    /// Recovers `S` from `G = v_rho - v_E |vel|^2 / 2 = gamma h'(S) - h(S)`.
    fn entropy_from_g(&self, gfun: f64) -> Option<f64> {
        let g = self.system.gamma;
        let s = match self.generator {
            EntropyGenerator::Physical => g - gfun,
            EntropyGenerator::Tadmor => (g + 1.0) * (-gfun * (g - 1.0)).ln(),
            EntropyGenerator::Homogeneous { alpha } if alpha > 0.0 => {
                (alpha + g) * (-gfun * (alpha + g) / alpha).ln()
            }
            EntropyGenerator::Homogeneous { .. } => return None,
        };
        s.is_finite().then_some(s)
    }
}

impl EntropyPair for EulerEntropy {
    fn id(&self) -> String {
        match self.generator {
            EntropyGenerator::Physical => "neg_rho_s".into(),
            EntropyGenerator::Tadmor => "tadmor".into(),
            EntropyGenerator::Homogeneous { .. } => "homogeneous".into(),
        }
    }
    fn convexity(&self) -> Convexity {
        match self.generator {
            EntropyGenerator::Homogeneous { alpha: 0.0 } => Convexity::Degenerate,
            _ => Convexity::Strict,
        }
    }
    fn eta(&self, u: &State) -> Result<f64> {
        let s = self.system.specific_entropy(u);
        Ok(-u[0] * self.h(s).0)
    }
    fn grad(&self, u: &State) -> Result<State> {
        let s = self.system.specific_entropy(u);
        let (h, h1, _) = self.h(s);
        let (gs, _) = self.system.entropy_derivatives(u);
        let mut g = gs * (-u[0] * h1);
        g[0] -= h;
        Ok(g)
    }
    fn hess(&self, u: &State) -> Result<Matrix> {
        let rho = u[0];
        let s = self.system.specific_entropy(u);
        let (_, h1, h2) = self.h(s);
        let (gs, hs) = self.system.entropy_derivatives(u);
        let n = gs.len();
        let mut e0 = State::zeros(n);
        e0[0] = 1.0;
        let cross = &e0 * gs.transpose() + &gs * e0.transpose();
        Ok(cross * (-h1) - &gs * gs.transpose() * (rho * h2) - hs * (rho * h1))
    }
    fn flux(&self, u: &State, j: usize) -> Result<f64> {
        Ok(u[j + 1] / u[0] * self.eta(u)?)
    }
    /// `beta_alpha = (alpha+1)/(alpha+gamma)` for the homogeneous family.
    fn homogeneity_degree(&self) -> Option<f64> {
        match self.generator {
            EntropyGenerator::Homogeneous { alpha } => Some((alpha + 1.0) / (alpha + self.system.gamma)),
            _ => None,
        }
    }
    fn inverse_guess(&self, v: &State) -> Option<State> {
        let d = self.system.dim;
        let g = self.system.gamma;
        let ve = v[d + 1];
        if !(ve < 0.0) {
            return None;
        }
        let vel: Vec<f64> = (1..=d).map(|k| -v[k] / ve).collect();
        let v2: f64 = vel.iter().map(|x| x * x).sum();
        let s = self.entropy_from_g(v[0] - 0.5 * ve * v2)?;
        let (_, h1, _) = self.h(s);
        let rho_over_p = -ve / ((g - 1.0) * h1);
        let rho = (rho_over_p * s.exp()).powf(1.0 / (1.0 - g));
        let p = rho.powf(g) * s.exp();
        let u = self.system.conserved(rho, &vel, p);
        u.iter().all(|x| x.is_finite()).then_some(u)
    }
}
