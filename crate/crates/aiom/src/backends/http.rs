//! Live model endpoint speaking the chat-completions wire protocol:
//! POST {endpoint}/v1/chat/completions with the rendered prompt as the
//! single user message; the answer is choices[0].message.content.

use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;

use crate::core::{Answer, Prompt};

use super::{BackendError, OracleBackend, QueryCtx};

pub const DEFAULT_CREDENTIAL_ENV: &str = "AIOM_API_KEY";
pub const ENDPOINT_ENV: &str = "AIOM_ENDPOINT";

const MAX_ATTEMPTS: u32 = 3;
const BACKOFF_BASE_MS: u64 = 100;

#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    /// Absolute base URL; falls back to the AIOM_ENDPOINT env var.
    pub endpoint: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub timeout: Option<Duration>,
    /// Env var naming the bearer token source.
    pub credential_env: String,
}

impl Default for HttpBackendConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            model: "default".to_string(),
            temperature: 0.0,
            timeout: None,
            credential_env: DEFAULT_CREDENTIAL_ENV.to_string(),
        }
    }
}

#[derive(Debug)]
pub struct HttpBackend {
    id: String,
    endpoint: String,
    model: String,
    temperature: f64,
    timeout: Option<Duration>,
    credential_env: String,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Result<Self, BackendError> {
        let endpoint = config
            .endpoint
            .or_else(|| std::env::var(ENDPOINT_ENV).ok())
            .ok_or_else(|| {
                BackendError::Config(format!(
                    "http backend needs an endpoint (config or {ENDPOINT_ENV})"
                ))
            })?;
        let url = reqwest::Url::parse(&endpoint)
            .map_err(|e| BackendError::Config(format!("invalid endpoint url: {e}")))?;
        if !matches!(url.scheme(), "http" | "https") {
            return Err(BackendError::Config(format!(
                "endpoint must be an absolute http(s) url, got `{endpoint}`"
            )));
        }
        if !config.temperature.is_finite() || !(0.0..=2.0).contains(&config.temperature) {
            return Err(BackendError::Config(format!(
                "temperature must be finite in [0, 2], got {}",
                config.temperature
            )));
        }
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| BackendError::Config(format!("http client: {e}")))?;
        Ok(Self {
            id: format!("http:{}", config.model),
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model: config.model,
            temperature: config.temperature,
            timeout: config.timeout,
            credential_env: config.credential_env,
            client,
        })
    }

    fn attempt(&self, prompt: &Prompt, timeout: Duration) -> Result<Answer, BackendError> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt.rendered_text}],
            "temperature": self.temperature,
        });
        let mut request = self
            .client
            .post(format!("{}/v1/chat/completions", self.endpoint))
            .timeout(timeout)
            .json(&body);
        if let Ok(token) = std::env::var(&self.credential_env) {
            if !token.is_empty() {
                request = request.bearer_auth(token);
            }
        }

        let started = Instant::now();
        let response = request.send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout
            } else {
                BackendError::Transport(e.to_string())
            }
        })?;

        let status = response.status();
        if !status.is_success() {
            let retryable = status.as_u16() == 429 || status.is_server_error();
            return Err(BackendError::Http {
                status: status.as_u16(),
                body: response.text().unwrap_or_default().chars().take(200).collect(),
                retryable,
            });
        }

        let parsed: ChatCompletionResponse = response
            .json()
            .map_err(|e| BackendError::MalformedBody(e.to_string()))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::MalformedBody("no choices in response".into()))?;

        let mut answer = Answer::new("", choice.message.content, self.id.clone());
        answer
            .meta
            .insert("latency_ms".into(), started.elapsed().as_millis().to_string());
        if let Some(usage) = parsed.usage {
            if let Some(p) = usage.prompt_tokens {
                answer.meta.insert("prompt_tokens".into(), p.to_string());
            }
            if let Some(c) = usage.completion_tokens {
                answer.meta.insert("completion_tokens".into(), c.to_string());
            }
        }
        Ok(answer)
    }
}

impl OracleBackend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn query(&self, prompt: &Prompt, ctx: &QueryCtx<'_>) -> Result<Answer, BackendError> {
        let timeout = self.timeout.unwrap_or(ctx.timeout);
        let mut last_err = None;
        for attempt in 0..MAX_ATTEMPTS {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(BACKOFF_BASE_MS << (attempt - 1)));
            }
            match self.attempt(prompt, timeout) {
                Ok(mut answer) => {
                    answer.query_task_id = ctx.task_id.to_string();
                    return Ok(answer);
                }
                Err(err) if err.is_retryable() => last_err = Some(err),
                Err(err) => return Err(err),
            }
        }
        Err(last_err.expect("at least one attempt was made"))
    }
}

#[derive(Deserialize)]
struct ChatCompletionResponse {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<ChatUsage>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

#[derive(Deserialize)]
struct ChatUsage {
    #[serde(default)]
    prompt_tokens: Option<u64>,
    #[serde(default)]
    completion_tokens: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_relative_endpoint() {
        let err = HttpBackend::new(HttpBackendConfig {
            endpoint: Some("not-a-url".into()),
            ..Default::default()
        })
        .unwrap_err();
        assert!(matches!(err, BackendError::Config(_)));
    }

    #[test]
    fn rejects_out_of_range_temperature() {
        let err = HttpBackend::new(HttpBackendConfig {
            endpoint: Some("http://127.0.0.1:1/".into()),
            temperature: 3.5,
            ..Default::default()
        })
        .unwrap_err();
        assert!(matches!(err, BackendError::Config(_)));
    }

    #[test]
    fn accepts_absolute_endpoint_and_strips_trailing_slash() {
        let backend = HttpBackend::new(HttpBackendConfig {
            endpoint: Some("http://127.0.0.1:9/".into()),
            model: "m".into(),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(backend.endpoint, "http://127.0.0.1:9");
        assert_eq!(backend.id(), "http:m");
    }
}
