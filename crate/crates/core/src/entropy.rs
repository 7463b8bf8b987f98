//! Entropy pairs `(eta, q)`, affine shifts, entropy variables and the
//! Godunov–Mock potentials `psi_0`, `psi_j`.

use std::fmt;
use std::sync::Arc;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::{inf_norm, Matrix, State};
use crate::system::{check_state, flux_eval, System};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Convexity {
    Strict,
    Degenerate,
    LipschitzOnly,
}

pub trait EntropyPair: Send + Sync + fmt::Debug {
    fn id(&self) -> String;
    fn convexity(&self) -> Convexity;
    /// Whether `grad(eta)^T A_j = grad(q_j)^T` is declared to hold.
    fn compatible(&self) -> bool {
        true
    }
    fn eta(&self, u: &State) -> Result<f64>;
    fn grad(&self, u: &State) -> Result<State>;
    fn hess(&self, u: &State) -> Result<Matrix>;
    /// Entropy flux `q_j(u)`, 0-based direction.
    fn flux(&self, u: &State, j: usize) -> Result<f64>;
    fn smooth_at(&self, _u: &State) -> bool {
        true
    }
    /// Starting point for inverting `grad(eta)(u) = v`; exact for pairs with
    /// a closed-form inverse.
    fn inverse_guess(&self, _v: &State) -> Option<State> {
        None
    }
    /// Degree `beta` with `eta(lambda u) = lambda^beta eta(u)`, when known.
    fn homogeneity_degree(&self) -> Option<f64> {
        None
    }
}

/// Values of a pair at one state.
#[derive(Debug, Clone)]
pub struct EntropyEval {
    pub eta: f64,
    pub grad: State,
    pub hess: Option<Matrix>,
    pub flux: Vec<f64>,
    /// Set at kinks of Lipschitz-only observables; `grad` is then the
    /// right-sided value.
    pub one_sided: bool,
    /// `||grad - FD grad||_inf` when requested.
    pub fd_residual: Option<f64>,
}

pub fn entropy_pair_eval(
    system: &dyn System,
    pair: &dyn EntropyPair,
    u: &State,
    fd_check: bool,
) -> Result<EntropyEval> {
    check_state(system, u)?;
    let eta = pair.eta(u)?;
    let grad = pair.grad(u)?;
    let hess = match pair.convexity() {
        Convexity::LipschitzOnly => None,
        _ => Some(pair.hess(u)?),
    };
    let flux = (0..system.dimension()).map(|j| pair.flux(u, j)).collect::<Result<Vec<_>>>()?;
    let one_sided = !pair.smooth_at(u);
    let fd_residual = if fd_check && !one_sided {
        let g = fd::gradient(|w| pair.eta(w), u)?;
        Some(inf_norm(&(&g - &grad)))
    } else {
        None
    };
    Ok(EntropyEval { eta, grad, hess, flux, one_sided, fd_residual })
}

/// `eta_c(u) = eta(u) + <c, u>` with flux `q_j + <c, f_j(u)>`.
#[derive(Debug, Clone)]
pub struct AffineShift {
    base: Arc<dyn EntropyPair>,
    system: Arc<dyn System>,
    shift: State,
}

impl AffineShift {
    pub fn new(base: Arc<dyn EntropyPair>, system: Arc<dyn System>, shift: State) -> Result<Self> {
        if shift.len() != system.equations() {
            return Err(Error::DimensionMismatch { expected: system.equations(), got: shift.len() });
        }
        Ok(Self { base, system, shift })
    }

    pub fn shift(&self) -> &State {
        &self.shift
    }
}

impl EntropyPair for AffineShift {
    fn id(&self) -> String {
        format!("{}+shift", self.base.id())
    }
    fn convexity(&self) -> Convexity {
        self.base.convexity()
    }
    fn compatible(&self) -> bool {
        self.base.compatible() && self.system.is_conservative()
    }
    fn eta(&self, u: &State) -> Result<f64> {
        Ok(self.base.eta(u)? + self.shift.dot(u))
    }
    fn grad(&self, u: &State) -> Result<State> {
        Ok(self.base.grad(u)? + &self.shift)
    }
    fn hess(&self, u: &State) -> Result<Matrix> {
        self.base.hess(u)
    }
    fn flux(&self, u: &State, j: usize) -> Result<f64> {
        let base = self.base.flux(u, j)?;
        if self.shift.iter().all(|c| *c == 0.0) {
            return Ok(base);
        }
        Ok(base + self.shift.dot(&self.system.flux(u, j)?))
    }
    fn smooth_at(&self, u: &State) -> bool {
        self.base.smooth_at(u)
    }
    fn inverse_guess(&self, v: &State) -> Option<State> {
        self.base.inverse_guess(&(v - &self.shift))
    }
}

fn require_strict(pair: &dyn EntropyPair) -> Result<()> {
    if pair.convexity() != Convexity::Strict {
        return Err(Error::NotStrictlyConvex(pair.id()));
    }
    Ok(())
}

/// Entropy variables `v = grad(eta)(u)`.
pub fn to_entropy_vars(system: &dyn System, pair: &dyn EntropyPair, u: &State) -> Result<State> {
    require_strict(pair)?;
    check_state(system, u)?;
    pair.grad(u)
}

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;

/// Inverts `grad(eta)(u) = v` by damped Newton on the strictly convex merit
/// `eta(u) - <v, u>`, backtracking on inadmissible or non-decreasing trials.
pub fn from_entropy_vars(
    system: &dyn System,
    pair: &dyn EntropyPair,
    v: &State,
    guess: Option<&State>,
) -> Result<State> {
    require_strict(pair)?;
    if v.len() != system.equations() {
        return Err(Error::DimensionMismatch { expected: system.equations(), got: v.len() });
    }
    let mut u = match guess.cloned().or_else(|| pair.inverse_guess(v)) {
        Some(g) if check_state(system, &g).is_ok() => g,
        _ => {
            let mut rng = <crate::system::SampleRng as rand::SeedableRng>::seed_from_u64(0);
            system.sample_state(&mut rng)
        }
    };
    let tol = NEWTON_TOL * inf_norm(v).max(1.0);
    let merit = |w: &State| -> Result<f64> { Ok(pair.eta(w)? - v.dot(w)) };
    let mut g = pair.grad(&u)? - v;
    let mut res = inf_norm(&g);
    for _ in 0..NEWTON_MAX_ITER {
        if res <= tol {
            return Ok(u);
        }
        let h = pair.hess(&u)?;
        let step = match h.clone().cholesky() {
            Some(c) => -c.solve(&g),
            None => match h.lu().solve(&(-&g)) {
                Some(s) => s,
                None => -g.clone(),
            },
        };
        let m0 = merit(&u)?;
        let slope = g.dot(&step);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &u + &step * alpha;
            if check_state(system, &trial).is_ok() {
                let gt = pair.grad(&trial)? - v;
                let rt = inf_norm(&gt);
                let mt = merit(&trial)?;
                if mt <= m0 + 1e-4 * alpha * slope || rt < res {
                    u = trial;
                    g = gt;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res <= tol {
        Ok(u)
    } else {
        Err(Error::NewtonDiverged { iterations: NEWTON_MAX_ITER, residual: res })
    }
}

/// Potentials `psi_0(v) = <v, u(v)> - eta(u(v))` and
/// `psi_j(v) = <v, f_j(u(v))> - q_j(u(v))`.
#[derive(Debug, Clone)]
pub struct PotentialValues {
    pub u: State,
    pub psi0: f64,
    pub psi: Vec<f64>,
}

pub fn potential_eval(
    system: &dyn System,
    pair: &dyn EntropyPair,
    v: &State,
    guess: Option<&State>,
) -> Result<PotentialValues> {
    let u = from_entropy_vars(system, pair, v, guess)?;
    let psi0 = v.dot(&u) - pair.eta(&u)?;
    let psi = (0..system.dimension())
        .map(|j| Ok(v.dot(&flux_eval(system, &u, j)?) - pair.flux(&u, j)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(PotentialValues { u, psi0, psi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::state;
    use crate::system::{Euler, EulerEntropy, EntropyGenerator, ScalarLaw, ScalarQuadratic, SymmetricCubic, SymmetricQuadratic};
    use proptest::prelude::*;

    #[test]
    fn quadratic_identity_map() {
        let sys = SymmetricCubic;
        let pair = SymmetricQuadratic;
        let u = state(&[0.3, -0.4]);
        assert_eq!(to_entropy_vars(&sys, &pair, &u).unwrap(), u);
        let back = from_entropy_vars(&sys, &pair, &u, None).unwrap();
        assert!((back - &u).norm() < 1e-14);
        let p = potential_eval(&sys, &pair, &u, None).unwrap();
        assert!((p.psi0 - 0.5 * u.norm_squared()).abs() < 1e-14);
    }

    #[test]
    fn kruzhkov_rejected_for_entropy_vars() {
        let sys = ScalarLaw::burgers();
        let pair = crate::system::Kruzhkov::new(sys.flux_kind(), 0.5);
        assert!(matches!(
            to_entropy_vars(&sys, &pair, &state(&[1.0])),
            Err(Error::NotStrictlyConvex(_))
        ));
    }

    #[test]
    fn burgers_pair_values() {
        let sys = ScalarLaw::burgers();
        let ev = entropy_pair_eval(&sys, &ScalarQuadratic::new(sys.flux_kind()), &state(&[1.0]), true).unwrap();
        assert_eq!(ev.eta, 0.5);
        assert!((ev.flux[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!(ev.fd_residual.unwrap() < 1e-9);
    }

    #[test]
    fn newton_from_poor_guess_converges() {
        let sys = Euler::new(1.4, 1).unwrap();
        let pair = EulerEntropy::new(&sys, EntropyGenerator::Physical).unwrap();
        let u = state(&[1.7, -0.9, 3.0]);
        let v = to_entropy_vars(&sys, &pair, &u).unwrap();
        let back = from_entropy_vars(&sys, &pair, &v, Some(&state(&[1.0, 0.0, 2.5]))).unwrap();
        assert!((back - u).amax() < 1e-10);
    }

    proptest! {
        #[test]
        fn affine_shift_closure(c0 in -3.0..3.0f64, c1 in -3.0..3.0f64, u0 in -1.0..1.0f64, u1 in -1.0..1.0f64) {
            let sys: Arc<dyn System> = Arc::new(SymmetricCubic);
            let base: Arc<dyn EntropyPair> = Arc::new(SymmetricQuadratic);
            let c = state(&[c0, c1]);
            let shifted = AffineShift::new(base.clone(), sys.clone(), c.clone()).unwrap();
            let u = state(&[u0, u1]);
            prop_assert!((shifted.grad(&u).unwrap() - base.grad(&u).unwrap() - &c).amax() < 1e-15);
            prop_assert_eq!(shifted.hess(&u).unwrap(), base.hess(&u).unwrap());
            let expect = base.eta(&u).unwrap() + c.dot(&u);
            prop_assert!((shifted.eta(&u).unwrap() - expect).abs() < 1e-14);
        }
    }
}
