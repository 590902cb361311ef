//! Clients for OpenAI- and Anthropic-style chat endpoints.

use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use async_trait::async_trait;
use base64::Engine;
use rand::Rng;
use serde_json::{json, Value};

use crate::clock::{Clock, SystemClock};
use crate::config::{ProviderConfig, ProviderKind};
use crate::ratelimit::TokenBucket;
use crate::{ModelRequest, ModelResponse, Provider, ProviderError, Usage};

const EXCERPT_CHARS: usize = 200;
const MAX_BACKOFF: Duration = Duration::from_secs(120);

pub struct HttpProvider {
    config: ProviderConfig,
    client: reqwest::Client,
    bucket: TokenBucket,
    clock: Arc<dyn Clock>,
    attempt_times: Mutex<Vec<Duration>>,
}

enum Failure {
    Timeout,
    Transport(String),
    Status(u16, String),
}

impl HttpProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        Self::with_clock(config, Arc::new(SystemClock::default()))
    }

    pub fn with_clock(config: ProviderConfig, clock: Arc<dyn Clock>) -> Result<Self, ProviderError> {
        config.validate()?;
        if config.kind == ProviderKind::Oracle {
            return Err(ProviderError::Config(crate::config::ConfigError {
                model_id: config.model_id.clone(),
                reason: "oracle providers have no HTTP endpoint".into(),
            }));
        }
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ProviderError::Transport {
                attempts: 0,
                last: e.to_string(),
            })?;
        Ok(Self {
            bucket: TokenBucket::per_minute(config.requests_per_minute),
            config,
            client,
            clock,
            attempt_times: Mutex::new(Vec::new()),
        })
    }

    /// Clock readings at which each attempt was released by the rate limiter.
    pub fn attempt_times(&self) -> Vec<Duration> {
        self.attempt_times.lock().expect("attempt log").clone()
    }

    fn url(&self) -> String {
        let base = self.config.base_url.trim_end_matches('/');
        match self.config.kind {
            ProviderKind::AnthropicCompatible => format!("{base}/v1/messages"),
            _ => format!("{base}/chat/completions"),
        }
    }

    fn body(&self, req: &ModelRequest<'_>) -> Value {
        let data = base64::engine::general_purpose::STANDARD.encode(req.image_png);
        let c = &self.config;
        match c.kind {
            ProviderKind::AnthropicCompatible => json!({
                "model": c.model_id,
                "max_tokens": c.max_tokens,
                "temperature": c.temperature,
                "messages": [{
                    "role": "user",
                    "content": [
                        {"type": "image", "source": {"type": "base64", "media_type": "image/png", "data": data}},
                        {"type": "text", "text": req.prompt},
                    ],
                }],
            }),
            _ => json!({
                "model": c.model_id,
                "temperature": c.temperature,
                "max_tokens": c.max_tokens,
                "messages": [{
                    "role": "user",
                    "content": [
                        {"type": "text", "text": req.prompt},
                        {"type": "image_url", "image_url": {"url": format!("data:image/png;base64,{data}")}},
                    ],
                }],
            }),
        }
    }

    fn request(&self, body: &Value, secret: Option<&str>) -> reqwest::RequestBuilder {
        let mut rb = self.client.post(self.url()).json(body);
        match self.config.kind {
            ProviderKind::AnthropicCompatible => {
                rb = rb.header("anthropic-version", &self.config.anthropic_version);
                if let Some(key) = secret {
                    rb = rb.header("x-api-key", key);
                }
            }
            _ => {
                if let Some(key) = secret {
                    rb = rb.bearer_auth(key);
                }
            }
        }
        rb
    }

    fn secret(&self) -> Result<Option<String>, ProviderError> {
        match &self.config.api_key_env {
            None => Ok(None),
            Some(var) => match std::env::var(var) {
                Ok(v) if !v.is_empty() => Ok(Some(v)),
                _ => Err(ProviderError::MissingSecret { var: var.clone() }),
            },
        }
    }

    /// `base * 2^(retry-1)`, scaled by a random factor in [0.8, 1.2).
    fn backoff(&self, retry: u32, retry_after: Option<Duration>) -> Duration {
        let base = Duration::from_millis(self.config.backoff_base_ms);
        let exp = base.saturating_mul(1u32 << (retry - 1).min(16)).min(MAX_BACKOFF);
        let jitter = rand::thread_rng().gen_range(0.8..1.2);
        let delay = exp.mul_f64(jitter);
        retry_after.map_or(delay, |ra| ra.max(delay))
    }

    fn decode(&self, text: &str, attempts: u32, latency: Duration) -> Result<ModelResponse, ProviderError> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| ProviderError::Malformed(format!("{e}: {}", excerpt(text))))?;
        let missing = |what: &str| ProviderError::Malformed(format!("missing {what}: {}", excerpt(text)));
        let (raw_text, usage, truncated) = match self.config.kind {
            ProviderKind::AnthropicCompatible => {
                let content = v["content"].as_array().ok_or_else(|| missing("content"))?;
                let text = content
                    .iter()
                    .find(|b| b["type"] == "text")
                    .and_then(|b| b["text"].as_str())
                    .ok_or_else(|| missing("content[].text"))?;
                let usage = usage_from(&v["usage"], "input_tokens", "output_tokens");
                (text.to_string(), usage, v["stop_reason"] == "max_tokens")
            }
            _ => {
                let choice = &v["choices"][0];
                let text = choice["message"]["content"]
                    .as_str()
                    .ok_or_else(|| missing("choices[0].message.content"))?;
                let usage = usage_from(&v["usage"], "prompt_tokens", "completion_tokens");
                (text.to_string(), usage, choice["finish_reason"] == "length")
            }
        };
        Ok(ModelResponse {
            raw_text,
            latency_ms: latency.as_millis() as u64,
            usage,
            request_id: v["id"].as_str().map(str::to_string),
            truncated,
            attempts,
        })
    }
}

fn usage_from(v: &Value, prompt: &str, completion: &str) -> Option<Usage> {
    Some(Usage {
        prompt_tokens: v[prompt].as_u64()?,
        completion_tokens: v[completion].as_u64()?,
    })
}

fn excerpt(text: &str) -> String {
    let mut out: String = text.chars().take(EXCERPT_CHARS).collect();
    if text.chars().count() > EXCERPT_CHARS {
        out.push('…');
    }
    out
}

fn retry_after(resp: &reqwest::Response) -> Option<Duration> {
    let secs: u64 = resp.headers().get("retry-after")?.to_str().ok()?.trim().parse().ok()?;
    Some(Duration::from_secs(secs))
}

#[async_trait]
impl Provider for HttpProvider {
    fn config(&self) -> &ProviderConfig {
        &self.config
    }

    async fn send(&self, req: &ModelRequest<'_>) -> Result<ModelResponse, ProviderError> {
        let secret = self.secret()?;
        let body = self.body(req);
        let max_attempts = self.config.max_retries + 1;
        let mut last = Failure::Transport("no attempt made".into());
        let mut wait_hint = None;
        for attempt in 1..=max_attempts {
            if attempt > 1 {
                self.clock.sleep(self.backoff(attempt - 1, wait_hint.take())).await;
            }
            let slot = self.bucket.acquire(self.clock.as_ref()).await;
            self.attempt_times.lock().expect("attempt log").push(slot);
            let started = Instant::now();
            let resp = match self.request(&body, secret.as_deref()).send().await {
                Ok(r) => r,
                Err(e) => {
                    last = if e.is_timeout() {
                        Failure::Timeout
                    } else {
                        Failure::Transport(e.to_string())
                    };
                    continue;
                }
            };
            let status = resp.status();
            let hint = retry_after(&resp);
            let text = match resp.text().await {
                Ok(t) => t,
                Err(e) => {
                    last = if e.is_timeout() {
                        Failure::Timeout
                    } else {
                        Failure::Transport(e.to_string())
                    };
                    continue;
                }
            };
            if status.is_success() {
                return self.decode(&text, attempt, started.elapsed());
            }
            if status.as_u16() == 429 || status.is_server_error() {
                wait_hint = hint;
                last = Failure::Status(status.as_u16(), excerpt(&text));
                continue;
            }
            return Err(ProviderError::Request {
                status: status.as_u16(),
                body: excerpt(&text),
            });
        }
        Err(match last {
            Failure::Timeout => ProviderError::Timeout {
                attempts: max_attempts,
                after_secs: self.config.timeout_secs,
            },
            Failure::Transport(msg) => ProviderError::Transport {
                attempts: max_attempts,
                last: msg,
            },
            Failure::Status(code, body) => ProviderError::Transport {
                attempts: max_attempts,
                last: format!("HTTP {code}: {body}"),
            },
        })
    }
}
