//! Chat-completion providers: a live HTTP client and a canned offline one.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_API_KEY_ENV: &str = "CHAT_API_KEY";
pub const API_URL_ENV: &str = "CHAT_API_URL";
pub const MODEL_ENV: &str = "CHAT_MODEL";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    HttpChat,
    Canned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout: Duration,
    pub fixture_path: Option<PathBuf>,
}

impl ProviderConfig {
    pub fn canned(fixture_path: impl Into<PathBuf>) -> Self {
        Self {
            kind: ProviderKind::Canned,
            endpoint: None,
            model: None,
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            timeout: DEFAULT_TIMEOUT,
            fixture_path: Some(fixture_path.into()),
        }
    }

    pub fn http_chat(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            kind: ProviderKind::HttpChat,
            endpoint: Some(endpoint.into()),
            model: Some(model.into()),
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            timeout: DEFAULT_TIMEOUT,
            fixture_path: None,
        }
    }

    /// An http_chat config taken from `CHAT_API_URL` and `CHAT_MODEL`.
    pub fn http_chat_from_env() -> Result<Self, ProviderError> {
        let var = |name: &str| {
            std::env::var(name)
                .map_err(|_| ProviderError::Config(format!("environment variable {name} is not set")))
        };
        Ok(Self::http_chat(var(API_URL_ENV)?, var(MODEL_ENV)?))
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        match self.kind {
            ProviderKind::HttpChat if self.endpoint.is_none() || self.model.is_none() => {
                Err(ProviderError::Config("http_chat requires an endpoint and a model".into()))
            }
            ProviderKind::Canned if self.fixture_path.is_none() => {
                Err(ProviderError::Config("canned provider requires a fixture path".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmAnswer {
    pub text: String,
    pub provider_info: String,
    #[serde(with = "duration_ms", rename = "latency_ms")]
    pub latency: Duration,
}

mod duration_ms {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("provider configuration error: {0}")]
    Config(String),
    #[error("question must not be empty")]
    EmptyQuestion,
    #[error("question not found in canned fixture: {0:?}")]
    UnknownQuestion(String),
    #[error("canned fixture {path}: {reason}")]
    Fixture { path: String, reason: String },
    #[error("provider timed out after {0:?}")]
    Timeout(Duration),
    #[error("provider returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("provider request failed: {0}")]
    Transport(String),
    #[error("provider response malformed: {0}")]
    Malformed(String),
}

/// A configured provider, ready to answer questions.
#[derive(Debug, Clone)]
pub enum Provider {
    Canned(CannedProvider),
    HttpChat(HttpChatProvider),
}

impl Provider {
    /// Validates the configuration and loads any fixture. Never touches the
    /// network.
    pub fn from_config(config: &ProviderConfig) -> Result<Self, ProviderError> {
        config.validate()?;
        match config.kind {
            ProviderKind::Canned => {
                let path = config.fixture_path.as_ref().expect("validated");
                Ok(Provider::Canned(CannedProvider::load(path)?))
            }
            ProviderKind::HttpChat => Ok(Provider::HttpChat(HttpChatProvider::new(config)?)),
        }
    }

    pub async fn ask(&self, question: &str) -> Result<LlmAnswer, ProviderError> {
        if question.trim().is_empty() {
            return Err(ProviderError::EmptyQuestion);
        }
        match self {
            Provider::Canned(p) => p.ask(question),
            Provider::HttpChat(p) => p.ask(question).await,
        }
    }

    pub fn info(&self) -> String {
        match self {
            Provider::Canned(p) => p.info.clone(),
            Provider::HttpChat(p) => format!("http_chat:{}", p.model),
        }
    }
}

/// Resolves `config` and asks a single question.
pub async fn ask(question: &str, config: &ProviderConfig) -> Result<LlmAnswer, ProviderError> {
    Provider::from_config(config)?.ask(question).await
}

/// Answers from a JSON object mapping question → answer, by exact match.
#[derive(Debug, Clone)]
pub struct CannedProvider {
    answers: HashMap<String, String>,
    info: String,
}

impl CannedProvider {
    pub fn load(path: &std::path::Path) -> Result<Self, ProviderError> {
        let fixture_error = |reason: String| ProviderError::Fixture { path: path.display().to_string(), reason };
        let contents = std::fs::read_to_string(path).map_err(|e| fixture_error(e.to_string()))?;
        let answers: HashMap<String, String> =
            serde_json::from_str(&contents).map_err(|e| fixture_error(e.to_string()))?;
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        Ok(Self::from_answers(answers, format!("canned:{name}")))
    }

    pub fn from_answers(answers: HashMap<String, String>, info: impl Into<String>) -> Self {
        Self { answers, info: info.into() }
    }

    fn ask(&self, question: &str) -> Result<LlmAnswer, ProviderError> {
        let started = Instant::now();
        let text = self
            .answers
            .get(question)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| ProviderError::UnknownQuestion(question.to_string()))?;
        Ok(LlmAnswer { text: text.clone(), provider_info: self.info.clone(), latency: started.elapsed() })
    }
}

#[derive(Debug, Clone)]
pub struct HttpChatProvider {
    endpoint: String,
    model: String,
    api_key: String,
    timeout: Duration,
    client: reqwest::Client,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

impl HttpChatProvider {
    /// Reads the API key from the configured environment variable.
    pub fn new(config: &ProviderConfig) -> Result<Self, ProviderError> {
        config.validate()?;
        let api_key = std::env::var(&config.api_key_env).map_err(|_| {
            ProviderError::Config(format!("environment variable {} is not set", config.api_key_env))
        })?;
        let client = reqwest::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(Self {
            endpoint: config.endpoint.clone().expect("validated"),
            model: config.model.clone().expect("validated"),
            api_key,
            timeout: config.timeout,
            client,
        })
    }

    async fn ask(&self, question: &str) -> Result<LlmAnswer, ProviderError> {
        let started = Instant::now();
        let request = ChatRequest {
            model: &self.model,
            messages: [ChatMessage { role: "user", content: question }],
        };
        let call = async {
            let response = self
                .client
                .post(&self.endpoint)
                .bearer_auth(&self.api_key)
                .json(&request)
                .send()
                .await
                .map_err(|e| self.transport(e))?;
            let status = response.status();
            let body = response.text().await.map_err(|e| self.transport(e))?;
            if !status.is_success() {
                return Err(ProviderError::Status { status: status.as_u16(), body });
            }
            let parsed: ChatResponse =
                serde_json::from_str(&body).map_err(|e| ProviderError::Malformed(e.to_string()))?;
            parsed
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.message.content)
                .filter(|text| !text.is_empty())
                .ok_or_else(|| ProviderError::Malformed("no content in choices[0].message".into()))
        };
        let text = tokio::time::timeout(self.timeout, call)
            .await
            .map_err(|_| ProviderError::Timeout(self.timeout))??;
        Ok(LlmAnswer { text, provider_info: format!("http_chat:{}", self.model), latency: started.elapsed() })
    }

    fn transport(&self, e: reqwest::Error) -> ProviderError {
        if e.is_timeout() {
            ProviderError::Timeout(self.timeout)
        } else {
            ProviderError::Transport(e.to_string())
        }
    }
}
