use serde::{Deserialize, Serialize};

use crate::oracle::OracleErrorModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    OpenaiCompatible,
    AnthropicCompatible,
    Oracle,
}

impl ProviderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProviderKind::OpenaiCompatible => "openai_compatible",
            ProviderKind::AnthropicCompatible => "anthropic_compatible",
            ProviderKind::Oracle => "oracle",
        }
    }
}

/// One model endpoint. Secrets are referenced by environment variable name
/// and read at request time; they never live in the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub model_id: String,
    #[serde(default)]
    pub base_url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default = "defaults::max_retries")]
    pub max_retries: u32,
    #[serde(default = "defaults::requests_per_minute")]
    pub requests_per_minute: u32,
    #[serde(default = "defaults::timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "defaults::max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "defaults::backoff_base_ms")]
    pub backoff_base_ms: u64,
    /// Maximum requests in flight at once, enforced by the caller.
    #[serde(default = "defaults::concurrency")]
    pub concurrency: usize,
    #[serde(default = "defaults::anthropic_version")]
    pub anthropic_version: String,
    /// Error model for `kind = "oracle"`; ignored otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleErrorModel>,
}

mod defaults {
    pub fn max_retries() -> u32 {
        5
    }
    pub fn requests_per_minute() -> u32 {
        60
    }
    pub fn timeout_secs() -> u64 {
        120
    }
    pub fn max_tokens() -> u32 {
        1024
    }
    pub fn backoff_base_ms() -> u64 {
        1000
    }
    pub fn concurrency() -> usize {
        4
    }
    pub fn anthropic_version() -> String {
        "2023-06-01".into()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("provider `{model_id}`: {reason}")]
pub struct ConfigError {
    pub model_id: String,
    pub reason: String,
}

impl ProviderConfig {
    pub fn oracle(model_id: &str, errors: OracleErrorModel) -> Self {
        Self {
            kind: ProviderKind::Oracle,
            model_id: model_id.to_string(),
            base_url: String::new(),
            api_key_env: None,
            max_retries: defaults::max_retries(),
            requests_per_minute: defaults::requests_per_minute(),
            timeout_secs: defaults::timeout_secs(),
            temperature: 0.0,
            max_tokens: defaults::max_tokens(),
            backoff_base_ms: defaults::backoff_base_ms(),
            concurrency: defaults::concurrency(),
            anthropic_version: defaults::anthropic_version(),
            oracle: Some(errors),
        }
    }

    pub fn http(kind: ProviderKind, model_id: &str, base_url: &str) -> Self {
        Self {
            kind,
            base_url: base_url.to_string(),
            oracle: None,
            ..Self::oracle(model_id, OracleErrorModel::default())
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |reason: String| {
            Err(ConfigError {
                model_id: self.model_id.clone(),
                reason,
            })
        };
        if self.model_id.trim().is_empty() {
            return fail("model_id is empty".into());
        }
        if self.requests_per_minute == 0 {
            return fail("requests_per_minute must be positive".into());
        }
        if self.concurrency == 0 {
            return fail("concurrency must be positive".into());
        }
        if self.timeout_secs == 0 {
            return fail("timeout_secs must be positive".into());
        }
        // Benchmark runs are greedy so that cached answers are reproducible.
        if self.temperature != 0.0 {
            return fail(format!("temperature must be 0, got {}", self.temperature));
        }
        match self.kind {
            ProviderKind::Oracle => {
                if let Some(model) = &self.oracle {
                    model.validate().or_else(fail)?;
                }
            }
            _ => {
                if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
                    return fail(format!("base_url `{}` is not an http(s) URL", self.base_url));
                }
            }
        }
        Ok(())
    }
}
