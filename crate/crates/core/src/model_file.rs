//! Versioned JSON model files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{Factor, Variable};
use crate::ingest::{BucketMaps, ScheduleConfig};
use crate::network::{BayesNet, Dag};
use crate::rail::{FitMode, RailBreakModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    pub states: Vec<String>,
}

/// One CPT, values row-major over `scope` (last fastest). The child is `variable`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub variable: String,
    pub scope: Vec<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub source: String,
    pub fit_mode: FitMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bucket_maps: Option<BucketMaps>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl Provenance {
    pub fn new(source: impl Into<String>, fit_mode: FitMode) -> Self {
        Self {
            source: source.into(),
            fit_mode,
            alpha: None,
            bucket_maps: None,
            schedule: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            notes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub variables: Vec<VariableSpec>,
    pub edges: Vec<[String; 2]>,
    pub tables: Vec<TableSpec>,
    pub provenance: Provenance,
}

impl ModelFile {
    pub fn from_model(model: &RailBreakModel, provenance: Provenance) -> Self {
        let net = model.network();
        Self {
            schema_version: SCHEMA_VERSION,
            variables: net
                .variables()
                .iter()
                .map(|v| VariableSpec {
                    name: v.name().to_string(),
                    states: v.states().to_vec(),
                })
                .collect(),
            edges: net
                .dag()
                .edges()
                .iter()
                .map(|(p, c)| [p.clone(), c.clone()])
                .collect(),
            tables: net
                .variables()
                .iter()
                .zip(net.cpts())
                .map(|(v, cpt)| TableSpec {
                    variable: v.name().to_string(),
                    scope: cpt.scope_names().iter().map(|s| s.to_string()).collect(),
                    values: cpt.values().to_vec(),
                })
                .collect(),
            provenance,
        }
    }

    pub fn to_model(&self) -> Result<RailBreakModel> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let variables: Vec<Variable> = self
            .variables
            .iter()
            .map(|v| Variable::new(v.name.clone(), v.states.iter().cloned()))
            .collect::<Result<_>>()?;
        let lookup = |name: &str| {
            variables
                .iter()
                .find(|v| v.name() == name)
                .cloned()
                .ok_or_else(|| {
                    Error::Schema(format!("table references undeclared variable `{name}`"))
                })
        };
        let dag = Dag::new(
            variables.iter().map(|v| v.name().to_string()),
            self.edges.iter().map(|[p, c]| (p.clone(), c.clone())),
        )?;
        let mut cpts = BTreeMap::new();
        for t in &self.tables {
            let scope = t
                .scope
                .iter()
                .map(|n| lookup(n))
                .collect::<Result<Vec<_>>>()?;
            let factor = Factor::new(scope, t.values.clone())?;
            if cpts.insert(t.variable.clone(), factor).is_some() {
                return Err(Error::Schema(format!("two tables for `{}`", t.variable)));
            }
        }
        let model = RailBreakModel::from_network(BayesNet::new(dag, cpts)?)?;
        if model.mode() != self.provenance.fit_mode {
            return Err(Error::Schema(format!(
                "structure is {} but provenance says {}",
                model.mode(),
                self.provenance.fit_mode
            )));
        }
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("invalid JSON: {e}")))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::Schema(format!(
                    "unsupported schema version {v} (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(Error::Schema("missing schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
