use std::path::{Path, PathBuf};

use agentmesh_core::{RetryPolicy, RuntimeConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Service configuration file (JSON). Relative paths are resolved against the
/// directory containing the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind_address: String,
    #[serde(default)]
    pub auth_tokens: Vec<String>,
    /// Serve without authentication. Must be set explicitly.
    #[serde(default)]
    pub auth_disabled: bool,
    pub card_dir: PathBuf,
    pub tool_dir: PathBuf,
    pub fixture_path: PathBuf,
    pub alias_path: PathBuf,
    /// Request log, one JSON object per line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_path: Option<PathBuf>,
    /// Task event log, one JSON object per state change.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_log_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retry: Option<RetryPolicy>,
}

impl ServiceConfig {
    /// A config serving the standard data layout under `data_dir`.
    pub fn for_data_dir(data_dir: &Path, bind_address: &str, auth_tokens: Vec<String>) -> Self {
        let rc = RuntimeConfig::from_data_dir(data_dir);
        ServiceConfig {
            bind_address: bind_address.to_string(),
            auth_tokens,
            auth_disabled: false,
            card_dir: rc.card_dir,
            tool_dir: rc.tool_dir,
            fixture_path: rc.fixture_path,
            alias_path: rc.alias_path,
            log_path: None,
            task_log_path: None,
            retry: None,
        }
    }

    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: ServiceConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        resolve(&mut cfg.card_dir);
        resolve(&mut cfg.tool_dir);
        resolve(&mut cfg.fixture_path);
        resolve(&mut cfg.alias_path);
        if let Some(p) = cfg.log_path.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.task_log_path.as_mut() {
            resolve(p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.bind_address.rsplit_once(':') {
            Some((host, port)) if !host.is_empty() && port.parse::<u16>().is_ok() => {}
            _ => {
                return Err(ConfigError::Invalid(format!(
                    "bind_address {:?} is not host:port",
                    self.bind_address
                )))
            }
        }
        if !self.auth_disabled && self.auth_tokens.iter().all(|t| t.is_empty()) {
            return Err(ConfigError::Invalid(
                "at least one non-empty auth token is required unless auth_disabled is true".into(),
            ));
        }
        if let Some(r) = &self.retry {
            RetryPolicy::new(r.max_attempts, r.backoff_base_ms)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    pub fn runtime_config(&self) -> RuntimeConfig {
        RuntimeConfig {
            card_dir: self.card_dir.clone(),
            tool_dir: self.tool_dir.clone(),
            fixture_path: self.fixture_path.clone(),
            alias_path: self.alias_path.clone(),
            task_log: self.task_log_path.clone(),
            retry: self.retry.unwrap_or_default(),
            strict_params: false,
        }
    }
}
