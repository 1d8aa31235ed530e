//! Model gateway: a uniform client interface over the providers a benchmark
//! run can query.
//!
//! Five providers share one [`ModelClient`] trait: `http-chat` talks to an
//! OpenAI-style chat-completions endpoint; `oracle` answers every prompt
//! correctly by re-parsing it and running grounded semantics; `always-yes`
//! and `always-no` are constant baselines; `fixtures` replays canned replies
//! by instance id. Transport failures are data, not panics — every query
//! returns a [`ModelReply`] whose status the evaluation layer records.
//!
//! Configuration is TOML:
//!
//! ```toml
//! config_version = 1
//! provider = "http-chat"
//! endpoint = "https://api.example.com/v1/chat/completions"
//! model = "frontier-large"
//! credential_env = "MODEL_API_KEY"
//! timeout_secs = 60
//! max_retries = 3
//! backoff_base_ms = 500
//! max_concurrent = 4
//! ```
//!
//! The bearer credential is read from the process environment variable named
//! by `credential_env` at query time; it is never stored in the config, in
//! any output file, or in the client itself.

use std::collections::HashMap;
use std::env;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::puzzle::reparse_prompt;
use crate::semantics::root_accepted;

/// Version stamp a model config file must carry.
pub const CONFIG_VERSION: u32 = 1;

pub const DEFAULT_TIMEOUT_SECS: u64 = 60;
pub const DEFAULT_MAX_RETRIES: u32 = 3;
pub const DEFAULT_BACKOFF_BASE_MS: u64 = 500;
pub const DEFAULT_MAX_CONCURRENT: usize = 4;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("failed to read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path} is not a valid model config: {message}")]
    Config { path: String, message: String },
    #[error("model config version {found} is not supported (expected {expected})")]
    ConfigVersion { found: u32, expected: u32 },
    #[error("provider {provider} requires the {field} field")]
    MissingField {
        provider: &'static str,
        field: &'static str,
    },
    #[error("invalid {field}: {message}")]
    InvalidValue {
        field: &'static str,
        message: String,
    },
    #[error("{path} line {line}: bad fixture line: {message}")]
    Fixture {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: more than one fixture for instance {id}")]
    DuplicateFixture { path: String, id: String },
}

/// The reply providers.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provider {
    HttpChat,
    Oracle,
    AlwaysYes,
    AlwaysNo,
    Fixtures,
}

impl Provider {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provider::HttpChat => "http-chat",
            Provider::Oracle => "oracle",
            Provider::AlwaysYes => "always-yes",
            Provider::AlwaysNo => "always-no",
            Provider::Fixtures => "fixtures",
        }
    }
}

impl fmt::Display for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_timeout_secs() -> u64 {
    DEFAULT_TIMEOUT_SECS
}
fn default_max_retries() -> u32 {
    DEFAULT_MAX_RETRIES
}
fn default_backoff_base_ms() -> u64 {
    DEFAULT_BACKOFF_BASE_MS
}
fn default_max_concurrent() -> usize {
    DEFAULT_MAX_CONCURRENT
}

/// Connection settings for one model under test.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub config_version: u32,
    pub provider: Provider,
    /// Chat-completions URL (`http-chat` only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    /// Model identifier sent in the request body (`http-chat` only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Name of the environment variable holding the bearer credential
    /// (`http-chat` only). The credential itself never appears in config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential_env: Option<String>,
    /// Replies file (`fixtures` only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixtures_path: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_base_ms")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_max_concurrent")]
    pub max_concurrent: usize,
}

impl ModelConfig {
    fn scripted(provider: Provider) -> Self {
        ModelConfig {
            config_version: CONFIG_VERSION,
            provider,
            endpoint: None,
            model: None,
            credential_env: None,
            fixtures_path: None,
            timeout_secs: DEFAULT_TIMEOUT_SECS,
            max_retries: DEFAULT_MAX_RETRIES,
            backoff_base_ms: DEFAULT_BACKOFF_BASE_MS,
            max_concurrent: DEFAULT_MAX_CONCURRENT,
        }
    }

    pub fn oracle() -> Self {
        Self::scripted(Provider::Oracle)
    }

    pub fn always_yes() -> Self {
        Self::scripted(Provider::AlwaysYes)
    }

    pub fn always_no() -> Self {
        Self::scripted(Provider::AlwaysNo)
    }

    pub fn fixtures(path: impl Into<String>) -> Self {
        let mut config = Self::scripted(Provider::Fixtures);
        config.fixtures_path = Some(path.into());
        config
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.config_version != CONFIG_VERSION {
            return Err(GatewayError::ConfigVersion {
                found: self.config_version,
                expected: CONFIG_VERSION,
            });
        }
        if self.max_concurrent == 0 {
            return Err(GatewayError::InvalidValue {
                field: "max_concurrent",
                message: "must be at least 1".into(),
            });
        }
        if self.timeout_secs == 0 {
            return Err(GatewayError::InvalidValue {
                field: "timeout_secs",
                message: "must be at least 1".into(),
            });
        }
        let provider = self.provider.as_str();
        match self.provider {
            Provider::HttpChat => {
                if self.endpoint.is_none() {
                    return Err(GatewayError::MissingField {
                        provider,
                        field: "endpoint",
                    });
                }
                if self.model.is_none() {
                    return Err(GatewayError::MissingField {
                        provider,
                        field: "model",
                    });
                }
                if self.credential_env.is_none() {
                    return Err(GatewayError::MissingField {
                        provider,
                        field: "credential_env",
                    });
                }
            }
            Provider::Fixtures => {
                if self.fixtures_path.is_none() {
                    return Err(GatewayError::MissingField {
                        provider,
                        field: "fixtures_path",
                    });
                }
            }
            Provider::Oracle | Provider::AlwaysYes | Provider::AlwaysNo => {}
        }
        Ok(())
    }
}

/// Read and validate a TOML model config.
pub fn load_model_config(path: &Path) -> Result<ModelConfig, GatewayError> {
    let text = fs::read_to_string(path).map_err(|e| GatewayError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let config: ModelConfig = toml::from_str(&text).map_err(|e| GatewayError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

/// Whether a reply made it back from the provider.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportStatus {
    Ok,
    Failed,
}

/// One provider reply, successful or not.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModelReply {
    /// Reply text; empty when the transport failed.
    pub raw_text: String,
    pub status: TransportStatus,
    /// Wall-clock time for the whole query, retries included. Scripted
    /// providers pin this to 0 so their output is reproducible.
    pub latency_ms: u64,
    /// Requests actually sent (0 when the query failed before any).
    pub attempts: u32,
    pub error: Option<String>,
}

impl ModelReply {
    pub fn ok(raw_text: impl Into<String>, latency_ms: u64, attempts: u32) -> Self {
        ModelReply {
            raw_text: raw_text.into(),
            status: TransportStatus::Ok,
            latency_ms,
            attempts,
            error: None,
        }
    }

    pub fn failed(error: impl Into<String>, latency_ms: u64, attempts: u32) -> Self {
        ModelReply {
            raw_text: String::new(),
            status: TransportStatus::Failed,
            latency_ms,
            attempts,
            error: Some(error.into()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == TransportStatus::Ok
    }
}

/// A model under test. Implementations are shared across worker threads, so
/// `query` takes `&self` and handles its own rate limiting.
pub trait ModelClient: Send + Sync {
    fn query(&self, prompt: &str, instance_id: &str) -> ModelReply;
}

/// Instantiate the client a config describes.
pub fn build_client(config: &ModelConfig) -> Result<Box<dyn ModelClient>, GatewayError> {
    config.validate()?;
    Ok(match config.provider {
        Provider::HttpChat => Box::new(HttpChatClient::new(config)?),
        Provider::Oracle => Box::new(OracleClient),
        Provider::AlwaysYes => Box::new(ConstantClient { answer_yes: true }),
        Provider::AlwaysNo => Box::new(ConstantClient { answer_yes: false }),
        Provider::Fixtures => {
            let path = config
                .fixtures_path
                .as_ref()
                .expect("validate checked fixtures_path");
            Box::new(FixturesClient::load(Path::new(path))?)
        }
    })
}

/// Counting semaphore bounding in-flight HTTP requests.
struct Gate {
    limit: usize,
    in_flight: Mutex<usize>,
    released: Condvar,
}

struct GatePermit<'a> {
    gate: &'a Gate,
}

impl Gate {
    fn new(limit: usize) -> Self {
        Gate {
            limit,
            in_flight: Mutex::new(0),
            released: Condvar::new(),
        }
    }

    fn acquire(&self) -> GatePermit<'_> {
        let mut in_flight = self.in_flight.lock().unwrap();
        while *in_flight >= self.limit {
            in_flight = self.released.wait(in_flight).unwrap();
        }
        *in_flight += 1;
        GatePermit { gate: self }
    }
}

impl Drop for GatePermit<'_> {
    fn drop(&mut self) {
        *self.gate.in_flight.lock().unwrap() -= 1;
        self.gate.released.notify_one();
    }
}

#[derive(Serialize)]
struct ChatTurn<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatTurn<'a>; 1],
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

enum Outcome {
    Success(String),
    Retryable(String),
    Fatal(String),
}

/// Client for an OpenAI-style chat-completions endpoint. Each prompt is sent
/// as a single user-role message; retries cover network errors, 429, and
/// 5xx, with exponential backoff; a gate caps concurrent requests.
pub struct HttpChatClient {
    http: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    credential_env: String,
    max_retries: u32,
    backoff_base_ms: u64,
    gate: Gate,
}

impl HttpChatClient {
    pub fn new(config: &ModelConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| GatewayError::InvalidValue {
                field: "timeout_secs",
                message: e.to_string(),
            })?;
        Ok(HttpChatClient {
            http,
            endpoint: config.endpoint.clone().expect("validate checked endpoint"),
            model: config.model.clone().expect("validate checked model"),
            credential_env: config
                .credential_env
                .clone()
                .expect("validate checked credential_env"),
            max_retries: config.max_retries,
            backoff_base_ms: config.backoff_base_ms,
            gate: Gate::new(config.max_concurrent),
        })
    }

    fn send_once(&self, credential: &str, prompt: &str) -> Outcome {
        let body = ChatRequest {
            model: &self.model,
            messages: [ChatTurn {
                role: "user",
                content: prompt,
            }],
        };
        let response = match self
            .http
            .post(&self.endpoint)
            .bearer_auth(credential)
            .json(&body)
            .send()
        {
            Ok(response) => response,
            Err(e) => return Outcome::Retryable(format!("request failed: {e}")),
        };
        let status = response.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Outcome::Retryable(format!("HTTP {status}"));
        }
        if !status.is_success() {
            return Outcome::Fatal(format!("HTTP {status}"));
        }
        match response.json::<ChatResponse>() {
            Ok(parsed) => match parsed.choices.into_iter().next() {
                Some(choice) => Outcome::Success(choice.message.content),
                None => Outcome::Fatal("malformed response body: no choices".into()),
            },
            Err(e) => Outcome::Fatal(format!("malformed response body: {e}")),
        }
    }
}

impl ModelClient for HttpChatClient {
    fn query(&self, prompt: &str, _instance_id: &str) -> ModelReply {
        let _permit = self.gate.acquire();
        let started = Instant::now();
        let elapsed = |s: Instant| s.elapsed().as_millis() as u64;
        // the credential is read per query and dropped with the request; a
        // missing variable fails the query rather than the whole run
        let credential = match env::var(&self.credential_env) {
            Ok(value) => value,
            Err(_) => {
                return ModelReply::failed(
                    format!(
                        "credential environment variable {} is not set",
                        self.credential_env
                    ),
                    elapsed(started),
                    0,
                );
            }
        };
        let mut attempts = 0u32;
        let mut last_error = String::new();
        while attempts <= self.max_retries {
            if attempts > 0 {
                let backoff = self.backoff_base_ms.saturating_mul(1 << (attempts - 1));
                std::thread::sleep(Duration::from_millis(backoff));
            }
            attempts += 1;
            match self.send_once(&credential, prompt) {
                Outcome::Success(text) => {
                    return ModelReply::ok(text, elapsed(started), attempts);
                }
                Outcome::Fatal(error) => {
                    return ModelReply::failed(error, elapsed(started), attempts);
                }
                Outcome::Retryable(error) => last_error = error,
            }
        }
        ModelReply::failed(
            format!("gave up after {attempts} attempts: {last_error}"),
            elapsed(started),
            attempts,
        )
    }
}

/// Perfect reference model: re-parses the prompt and answers from grounded
/// semantics. A prompt the parser rejects comes back as a failed transport.
pub struct OracleClient;

impl ModelClient for OracleClient {
    fn query(&self, prompt: &str, _instance_id: &str) -> ModelReply {
        match reparse_prompt(prompt) {
            Ok(parsed) => {
                let answer = if root_accepted(&parsed.graph) {
                    "Answer: yes"
                } else {
                    "Answer: no"
                };
                ModelReply::ok(answer, 0, 1)
            }
            Err(e) => ModelReply::failed(format!("prompt did not parse: {e}"), 0, 1),
        }
    }
}

/// Baseline that gives the same answer to everything.
pub struct ConstantClient {
    pub answer_yes: bool,
}

impl ModelClient for ConstantClient {
    fn query(&self, _prompt: &str, _instance_id: &str) -> ModelReply {
        let answer = if self.answer_yes {
            "Answer: yes"
        } else {
            "Answer: no"
        };
        ModelReply::ok(answer, 0, 1)
    }
}

#[derive(Deserialize)]
struct FixtureLine {
    instance_id: String,
    raw_text: String,
}

/// Replays canned replies keyed by instance id, for offline evaluation runs
/// and regression tests. An instance with no fixture gets a failed reply.
#[derive(Debug)]
pub struct FixturesClient {
    replies: HashMap<String, String>,
}

impl FixturesClient {
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = fs::read_to_string(path).map_err(|e| GatewayError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut replies = HashMap::new();
        for (index, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let fixture: FixtureLine =
                serde_json::from_str(line).map_err(|e| GatewayError::Fixture {
                    path: path.display().to_string(),
                    line: index + 1,
                    message: e.to_string(),
                })?;
            if replies
                .insert(fixture.instance_id.clone(), fixture.raw_text)
                .is_some()
            {
                return Err(GatewayError::DuplicateFixture {
                    path: path.display().to_string(),
                    id: fixture.instance_id,
                });
            }
        }
        Ok(FixturesClient { replies })
    }
}

impl ModelClient for FixturesClient {
    fn query(&self, _prompt: &str, instance_id: &str) -> ModelReply {
        match self.replies.get(instance_id) {
            Some(text) => ModelReply::ok(text.clone(), 0, 1),
            None => ModelReply::failed(format!("no fixture for instance {instance_id}"), 0, 1),
        }
    }
}
