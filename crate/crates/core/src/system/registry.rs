//! String-keyed construction of systems and entropy pairs.

use std::collections::BTreeMap;
use std::sync::Arc;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::entropy::{AffineShift, Convexity, EntropyPair};
use crate::error::{Error, Result};
use crate::linalg::State;
use crate::system::*;

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct PairInfo {
    pub id: String,
    pub convexity: Convexity,
    pub compatible: bool,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SystemInfo {
    pub id: String,
    pub equations: String,
    pub dimensions: Vec<usize>,
    pub conservative: bool,
    pub analytic_jacobian: bool,
    pub params: Params,
    pub pairs: Vec<PairInfo>,
}

fn params(items: &[(&str, f64)]) -> Params {
    items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn pair(id: &str, convexity: Convexity, compatible: bool, p: &[(&str, f64)]) -> PairInfo {
    PairInfo { id: id.into(), convexity, compatible, params: params(p) }
}

pub fn catalog() -> Vec<SystemInfo> {
    use Convexity::*;
    let scalar_pairs = || vec![pair("quadratic", Strict, true, &[]), pair("kruzhkov", LipschitzOnly, true, &[("c", 0.0)])];
    vec![
        SystemInfo {
            id: "burgers".into(),
            equations: "1".into(),
            dimensions: vec![1],
            conservative: true,
            analytic_jacobian: true,
            params: Params::new(),
            pairs: scalar_pairs(),
        },
        SystemInfo {
            id: "scalar_exp".into(),
            equations: "1".into(),
            dimensions: vec![1],
            conservative: true,
            analytic_jacobian: true,
            params: params(&[("k", 1.0)]),
            pairs: scalar_pairs(),
        },
        SystemInfo {
            id: "symmetric_demo".into(),
            equations: "2".into(),
            dimensions: vec![1],
            conservative: true,
            analytic_jacobian: true,
            params: Params::new(),
            pairs: vec![pair("quadratic", Strict, true, &[]), pair("eta_lambda", Strict, true, &[("lambda", 0.25)])],
        },
        SystemInfo {
            id: "rozhdestvenskii".into(),
            equations: "3".into(),
            dimensions: vec![1],
            conservative: false,
            analytic_jacobian: true,
            params: Params::new(),
            pairs: vec![pair("quadratic", Strict, false, &[])],
        },
        SystemInfo {
            id: "isentropic_euler".into(),
            equations: "d+1".into(),
            dimensions: vec![1, 2],
            conservative: true,
            analytic_jacobian: true,
            params: params(&[("gamma", 1.4), ("kappa", 1.0), ("dim", 1.0)]),
            pairs: vec![pair("energy", Strict, true, &[])],
        },
        SystemInfo {
            id: "euler".into(),
            equations: "d+2".into(),
            dimensions: vec![1, 2, 3],
            conservative: true,
            analytic_jacobian: true,
            params: params(&[("gamma", 1.4), ("dim", 1.0)]),
            pairs: vec![
                pair("neg_rho_s", Strict, true, &[]),
                pair("tadmor", Strict, true, &[]),
                pair("homogeneous", Strict, true, &[("alpha", 1.0)]),
            ],
        },
        SystemInfo {
            id: "ultra_relativistic".into(),
            equations: "d+1".into(),
            dimensions: vec![1, 2, 3],
            conservative: true,
            analytic_jacobian: false,
            params: params(&[("dim", 1.0)]),
            pairs: vec![],
        },
    ]
}

/// Merges user parameters over registered defaults, rejecting unknown keys.
fn resolve(defaults: &Params, given: &Params, what: &str) -> Result<Params> {
    let mut out = defaults.clone();
    for (k, v) in given {
        if !defaults.contains_key(k) {
            return Err(Error::InvalidParameter(format!("unknown parameter '{k}' for {what}")));
        }
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("parameter '{k}' for {what} is not finite")));
        }
        out.insert(k.clone(), *v);
    }
    Ok(out)
}

fn as_dim(x: f64) -> Result<usize> {
    if x.fract() != 0.0 || x < 1.0 {
        return Err(Error::InvalidParameter(format!("dim must be a positive integer, got {x}")));
    }
    Ok(x as usize)
}

fn info(id: &str) -> Result<SystemInfo> {
    catalog().into_iter().find(|s| s.id == id).ok_or_else(|| Error::UnknownSystem(id.into()))
}

pub fn build_system(id: &str, given: &Params) -> Result<Arc<dyn System>> {
    let p = resolve(&info(id)?.params, given, id)?;
    Ok(match id {
        "burgers" => Arc::new(ScalarLaw::burgers()),
        "scalar_exp" => Arc::new(ScalarLaw::new(ScalarFlux::Exponential { k: p["k"] })?),
        "symmetric_demo" => Arc::new(SymmetricCubic),
        "rozhdestvenskii" => Arc::new(Rozhdestvenskii),
        "isentropic_euler" => Arc::new(IsentropicEuler::new(p["gamma"], p["kappa"], as_dim(p["dim"])?)?),
        "euler" => Arc::new(Euler::new(p["gamma"], as_dim(p["dim"])?)?),
        "ultra_relativistic" => Arc::new(UltraRelativistic::new(as_dim(p["dim"])?)?),
        _ => return Err(Error::UnknownSystem(id.into())),
    })
}

fn system_param(system: &dyn System, key: &str) -> f64 {
    system.params().into_iter().find(|(k, _)| *k == key).map(|(_, v)| v).unwrap_or(f64::NAN)
}

fn scalar_flux(system: &dyn System) -> ScalarFlux {
    match system.id() {
        "scalar_exp" => ScalarFlux::Exponential { k: system_param(system, "k") },
        _ => ScalarFlux::Quadratic { a: 1.0 },
    }
}

/// Builds pair `pair_id` of `system`; a non-empty `shift` wraps it as
/// `eta + <c, u>`.
pub fn build_pair(
    system: &Arc<dyn System>,
    pair_id: &str,
    given: &Params,
    shift: Option<&[f64]>,
) -> Result<Arc<dyn EntropyPair>> {
    let sid = system.id().to_string();
    let sys_info = info(&sid)?;
    let pinfo = sys_info
        .pairs
        .iter()
        .find(|p| p.id == pair_id)
        .ok_or_else(|| Error::UnknownPair { system: sid.clone(), pair: pair_id.into() })?;
    let p = resolve(&pinfo.params, given, pair_id)?;
    let sys = system.as_ref();
    let base: Arc<dyn EntropyPair> = match (sid.as_str(), pair_id) {
        ("burgers" | "scalar_exp", "quadratic") => Arc::new(ScalarQuadratic::new(scalar_flux(sys))),
        ("burgers" | "scalar_exp", "kruzhkov") => Arc::new(Kruzhkov::new(scalar_flux(sys), p["c"])),
        ("symmetric_demo", "quadratic") => Arc::new(SymmetricQuadratic),
        ("symmetric_demo", "eta_lambda") => Arc::new(EtaLambda { lambda: p["lambda"] }),
        ("rozhdestvenskii", "quadratic") => Arc::new(RozhdestvenskiiQuadratic),
        ("isentropic_euler", "energy") => {
            let s = IsentropicEuler::new(
                system_param(sys, "gamma"),
                system_param(sys, "kappa"),
                system_param(sys, "dim") as usize,
            )?;
            Arc::new(IsentropicEnergy::new(&s))
        }
        ("euler", _) => {
            let s = Euler::new(system_param(sys, "gamma"), system_param(sys, "dim") as usize)?;
            let gen = match pair_id {
                "neg_rho_s" => EntropyGenerator::Physical,
                "tadmor" => EntropyGenerator::Tadmor,
                _ => EntropyGenerator::Homogeneous { alpha: p["alpha"] },
            };
            Arc::new(EulerEntropy::new(&s, gen)?)
        }
        _ => return Err(Error::UnknownPair { system: sid, pair: pair_id.into() }),
    };
    match shift {
        Some(c) if !c.is_empty() => Ok(Arc::new(AffineShift::new(base, system.clone(), State::from_column_slice(c))?)),
        _ => Ok(base),
    }
}
