use std::path::Path;

use railbreak_core::{reference_schedule, BucketMaps, ScheduleConfig, DEFAULT_ALPHA};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

/// Bucket maps, schedule and smoothing shared by `synth`, `fit` and `query`.
///
/// ```toml
/// alpha = 1.0
///
/// [schedule]
/// trains_per_day = 182.64840182648402
/// period_start = "2014-01-01"
/// period_end = "2014-12-31"
///
/// [buckets]
/// morning = [4, 11]
///
/// [buckets.seasons]
/// early_summer = [10, 11, 12]
/// late_summer = [1, 2, 3]
/// winter = [4, 5, 6, 7]
/// late_winter = [8, 9]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "reference_schedule")]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub buckets: BucketMaps,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            schedule: reference_schedule(),
            buckets: BucketMaps::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: Config =
            toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        if !(config.alpha.is_finite() && config.alpha >= 0.0) {
            return Err(CliError::Usage(format!(
                "config: alpha must be >= 0, got {}",
                config.alpha
            )));
        }
        Ok(config)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                Self::from_toml(&text)
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
