use std::path::{Path, PathBuf};

use intelligibility::MetricConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_ENV: &str = "INTELLIGIBILITY_CONFIG";

/// Everything a config file may set. Command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub metrics: Option<Vec<String>>,
    pub manifests: Vec<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<u64>,
    pub align: Option<bool>,
    pub bootstrap: Option<usize>,
    pub coverage: Option<f64>,
    pub refit: Option<bool>,
    /// Front-end and per-metric overrides.
    pub metric_config: Option<MetricConfig>,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let is_toml = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let parsed: Result<Self, String> = if is_toml {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        let cfg = parsed.map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        if cfg.threads == Some(0) {
            return Err(CliError::Usage("config: threads must be at least 1".into()));
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };
        Ok(Self {
            manifests: cfg.manifests.into_iter().map(resolve).collect(),
            output_dir: cfg.output_dir.map(resolve),
            ..cfg
        })
    }

    /// The explicit path, else the one named by the environment, else none.
    pub fn discover(explicit: Option<&Path>) -> Result<Self, CliError> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }
}
