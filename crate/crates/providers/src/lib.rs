//! Model endpoints: HTTP clients with retry and rate limiting, and an
//! offline oracle that answers from ground truth.

use std::sync::Arc;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use bindbench_core::TaskInstance;

pub mod clock;
pub mod config;
pub mod http;
pub mod oracle;
pub mod ratelimit;

pub use clock::{Clock, SystemClock, VirtualClock};
pub use config::{ConfigError, ProviderConfig, ProviderKind};
pub use http::HttpProvider;
pub use oracle::{oracle_answer, oracle_answer_salted, OracleErrorModel};
pub use ratelimit::TokenBucket;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelResponse {
    /// Response text exactly as returned.
    pub raw_text: String,
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_id: Option<String>,
    #[serde(default)]
    pub truncated: bool,
    pub attempts: u32,
}

/// One query: an encoded PNG, the prompt, and the instance it came from
/// (only the oracle looks at the instance).
#[derive(Debug, Clone, Copy)]
pub struct ModelRequest<'a> {
    pub image_png: &'a [u8],
    pub prompt: &'a str,
    pub instance: &'a TaskInstance,
}

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("environment variable `{var}` is not set")]
    MissingSecret { var: String },
    #[error("request rejected with HTTP {status}: {body}")]
    Request { status: u16, body: String },
    #[error("transport error after {attempts} attempts: {last}")]
    Transport { attempts: u32, last: String },
    #[error("timed out after {attempts} attempts ({after_secs} s each)")]
    Timeout { attempts: u32, after_secs: u64 },
    #[error("unexpected response body: {0}")]
    Malformed(String),
}

#[async_trait]
pub trait Provider: Send + Sync {
    fn config(&self) -> &ProviderConfig;

    fn model_id(&self) -> &str {
        &self.config().model_id
    }

    /// Whether answers are computed locally (and need no caching).
    fn is_local(&self) -> bool {
        false
    }

    async fn send(&self, req: &ModelRequest<'_>) -> Result<ModelResponse, ProviderError>;
}

pub struct OracleProvider {
    config: ProviderConfig,
    errors: OracleErrorModel,
}

impl OracleProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        config.validate()?;
        let errors = config.oracle.clone().unwrap_or_default();
        Ok(Self { config, errors })
    }
}

#[async_trait]
impl Provider for OracleProvider {
    fn config(&self) -> &ProviderConfig {
        &self.config
    }

    fn is_local(&self) -> bool {
        true
    }

    async fn send(&self, req: &ModelRequest<'_>) -> Result<ModelResponse, ProviderError> {
        Ok(ModelResponse {
            raw_text: oracle_answer_salted(req.instance, &self.errors, req.prompt),
            latency_ms: 0,
            usage: None,
            request_id: None,
            truncated: false,
            attempts: 1,
        })
    }
}

pub fn build_provider(config: &ProviderConfig) -> Result<Arc<dyn Provider>, ProviderError> {
    build_provider_with_clock(config, Arc::new(SystemClock::default()))
}

pub fn build_provider_with_clock(
    config: &ProviderConfig,
    clock: Arc<dyn Clock>,
) -> Result<Arc<dyn Provider>, ProviderError> {
    Ok(match config.kind {
        ProviderKind::Oracle => Arc::new(OracleProvider::new(config.clone())?),
        _ => Arc::new(HttpProvider::with_clock(config.clone(), clock)?),
    })
}
