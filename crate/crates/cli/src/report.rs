//! Report documents emitted by every command.

use entrolab_core::action::{ActionReport, FirstVariation, Window};
use entrolab_core::checks::{CheckReport, SearchReport};
use entrolab_core::dlm::{ProbeReport, ShockProduction};
use entrolab_core::field::{FieldDescription, ShockTrace, StarState};
use entrolab_core::selection::RankingReport;
use entrolab_core::system::registry::SystemInfo;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::scenario::schema_errors;

pub const REPORT_SCHEMA: &str = include_str!("../schemas/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub status: Status,
    /// One line per failed check or assertion.
    pub failures: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub systems: Option<Vec<SystemInfo>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub riemann: Option<Vec<RiemannEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<ActionEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_residuals: Option<Vec<ResidualEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variations: Option<Vec<VariationEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<RankingReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub products: Option<Vec<ProductEntry>>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: crate::scenario::SCHEMA_VERSION,
            command: command.into(),
            description: None,
            system_id: None,
            seed: None,
            status: Status::Ok,
            failures: Vec::new(),
            systems: None,
            checks: None,
            riemann: None,
            actions: None,
            weak_residuals: None,
            variations: None,
            ranking: None,
            products: None,
        }
    }

    pub fn fail(&mut self, msg: impl Into<String>) {
        self.status = Status::Failed;
        self.failures.push(msg.into());
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Failed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CheckEntry {
    pub check: String,
    pub pair_id: Option<String>,
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<CheckReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RiemannEntry {
    pub label: String,
    pub description: FieldDescription,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarState>,
    /// Time at which `shocks` are sampled.
    pub t: f64,
    pub shocks: Vec<ShockTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub field: String,
    pub report: ActionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ResidualEntry {
    pub field: String,
    pub window: Window,
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct VariationEntry {
    pub field: String,
    pub pair_id: String,
    pub variation: FirstVariation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ProductEntry {
    pub index: usize,
    pub kind: String,
    pub probe: ProbeReport,
    /// Per-path detail for shock productions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub productions: Vec<ShockProduction>,
}

pub fn report_schema() -> Value {
    serde_json::to_value(schemars::schema_for!(Report)).expect("schema serializes")
}

/// Serializes `report` as pretty JSON after checking that every float is
/// finite and that the document validates against the shipped schema.
pub fn render(report: &Report) -> Result<String, CliError> {
    let value = serde_json::to_value(report).map_err(|e| CliError::Report(e.to_string()))?;
    let shipped: Value = serde_json::from_str(REPORT_SCHEMA).expect("shipped schema is JSON");
    let errors = schema_errors(&shipped, &value);
    if !errors.is_empty() {
        return Err(CliError::Report(errors.join("; ")));
    }
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Report(e.to_string()))?;
    text.push('\n');
    Ok(text)
}
