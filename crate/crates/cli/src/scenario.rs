//! Scenario files: typed model, embedded schema and loading.

use std::path::Path;

use entrolab_core::action::{Stationarity, Window};
use entrolab_core::checks::SearchVerdict;
use entrolab_core::dlm::PathFamily;
use entrolab_core::field::{Bump, Curve, WaveChoice};
use entrolab_core::system::registry::Params;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const SCENARIO_SCHEMA: &str = include_str!("../schemas/scenario.schema.json");

fn default_count() -> usize {
    100
}

fn default_normal() -> Vec<f64> {
    vec![1.0]
}

fn default_scalings() -> Vec<f64> {
    vec![0.5, 2.0, 10.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Must be 1.
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub system: SystemSpec,
    /// Entropy pairs; the first one is the default wherever a pair is needed.
    #[serde(default)]
    pub pairs: Vec<PairSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub states: StateSpec,
    /// Empty means every check applicable to the declared pairs.
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub fields: Vec<FieldSpec>,
    #[serde(default)]
    pub windows: Vec<Window>,
    /// Connecting paths for products; empty means the straight segment.
    #[serde(default)]
    pub paths: Vec<PathFamily>,
    #[serde(default)]
    pub variations: Vec<VariationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonSpec>,
    #[serde(default)]
    pub products: Vec<ProductSpec>,
    #[serde(default)]
    pub expect: Expectations,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub id: String,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub id: String,
    #[serde(default)]
    pub params: Params,
    /// Adds `<c, u>` to the entropy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    /// Number of seeded random states.
    #[serde(default = "default_count")]
    pub count: usize,
    /// Extra states in conserved variables.
    #[serde(default)]
    pub explicit: Vec<Vec<f64>>,
}

impl Default for StateSpec {
    fn default() -> Self {
        Self { count: default_count(), explicit: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    EntropyPair,
    Symmetrizer,
    GodunovPotentials,
    Convexity {
        /// Also scan `|u|^2/2 - lambda zeta` over the default grid.
        #[serde(default)]
        lambda_scan: bool,
    },
    Homogeneity {
        #[serde(default = "default_scalings")]
        scalings: Vec<f64>,
    },
    SymmetrizerSearch,
}

impl CheckSpec {
    pub fn id(&self) -> &'static str {
        match self {
            Self::EntropyPair => "entropy_pair",
            Self::Symmetrizer => "symmetrizer",
            Self::GodunovPotentials => "godunov_potentials",
            Self::Convexity { .. } => "convexity",
            Self::Homogeneity { .. } => "homogeneity",
            Self::SymmetrizerSearch => "symmetrizer_search",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub label: String,
    pub field: FieldKind,
    /// Optional perturbation `eps d B` applied to the field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<Bump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldKind {
    /// Exact Riemann solution for scalar laws and one-dimensional Euler.
    Riemann {
        left: Vec<f64>,
        right: Vec<f64>,
        #[serde(default)]
        x0: f64,
        /// States given as `(rho, v, p)` instead of conserved variables.
        #[serde(default)]
        primitive: bool,
        /// Euler only: wave resolution on each side of the contact.
        #[serde(default)]
        waves: [WaveChoice; 2],
    },
    /// Single expansion shock (scalar) or both waves discontinuous (Euler).
    ExpansionShock {
        left: Vec<f64>,
        right: Vec<f64>,
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        primitive: bool,
    },
    Constant {
        state: Vec<f64>,
        #[serde(default)]
        primitive: bool,
    },
    CustomPiecewise {
        curves: Vec<Curve>,
        pieces: Vec<PieceSpec>,
        #[serde(default)]
        t_start: f64,
        /// Omitted means unbounded.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_end: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PieceSpec {
    Constant { state: Vec<f64> },
    /// Centred rarefaction of a scalar law between similarity speeds `xi`.
    ScalarFan { t0: f64, x0: f64, xi: [f64; 2] },
    /// `base + amplitude sin(wavenumber (x - speed t)) e_component`.
    Travelling { base: Vec<f64>, component: usize, speed: f64, amplitude: f64, wavenumber: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct VariationSpec {
    /// Label of an entry in `fields`.
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    pub window: Window,
    pub bump: Bump,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Stationarity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum RankMode {
    #[default]
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ComparisonSpec {
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub mode: RankMode,
    /// Required for local ranking.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    /// Field labels; empty means all fields.
    #[serde(default)]
    pub candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_selected: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProductSpec {
    /// `b(u) = M u`.
    Linear { matrix: Vec<Vec<f64>>, left: Vec<f64>, right: Vec<f64> },
    /// `b(u) = grad eta(u)`, a perfect derivative.
    EntropyGradient {
        left: Vec<f64>,
        right: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pair: Option<String>,
    },
    /// Entropy production of a jump travelling at `sigma` along `normal`.
    ShockProduction {
        left: Vec<f64>,
        right: Vec<f64>,
        sigma: f64,
        #[serde(default = "default_normal")]
        normal: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pair: Option<String>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    /// Asserted verdict of the symmetrizer search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<SearchVerdict>,
    /// Asserted outcome of every path probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_independent: Option<bool>,
    /// Upper bound on every weak-residual component.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_weak_residual: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
}

pub fn scenario_schema() -> Value {
    serde_json::to_value(schemars::schema_for!(Scenario)).expect("schema serializes")
}

/// Formats every schema violation as `instance path (schema path): message`.
pub fn schema_errors(schema: &Value, instance: &Value) -> Vec<String> {
    let validator = jsonschema::validator_for(schema).expect("shipped schema compiles");
    validator
        .iter_errors(instance)
        .map(|e| {
            let at = e.instance_path().to_string();
            let at = if at.is_empty() { "/".to_string() } else { at };
            format!("{at} (schema {}): {e}", e.schema_path())
        })
        .collect()
}

pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("{origin}: malformed JSON: {e}")))?;
    let shipped: Value = serde_json::from_str(SCENARIO_SCHEMA).expect("shipped schema is JSON");
    let errors = schema_errors(&shipped, &value);
    if !errors.is_empty() {
        return Err(CliError::Input(format!("{origin}: schema violation\n  {}", errors.join("\n  "))));
    }
    let scenario: Scenario =
        serde_json::from_value(value).map_err(|e| CliError::Input(format!("{origin}: {e}")))?;
    if scenario.schema_version != SCHEMA_VERSION {
        return Err(CliError::Input(format!(
            "{origin}: /schema_version: unsupported version {}, expected {SCHEMA_VERSION}",
            scenario.schema_version
        )));
    }
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: cannot read scenario: {e}", path.display())))?;
    parse_scenario(&text, &path.display().to_string())
}
