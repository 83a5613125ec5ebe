//! Chat-completion endpoints: the live HTTP client and a scripted mock.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use cogh_core::store::{seeded_rng, unit_f64};
use cogh_core::PlayerRole;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Purpose {
    Decision,
    Consultation,
    Advisor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }
}

/// One completion request. `round` is the round the request belongs to
/// (chat sessions carry the round they precede).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub purpose: Purpose,
    pub round: usize,
    #[serde(serialize_with = "role_name")]
    pub role: PlayerRole,
    pub attempt: u32,
    pub seed: u64,
    pub messages: Vec<ChatMessage>,
}

fn role_name<S: serde::Serializer>(role: &PlayerRole, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(match role {
        PlayerRole::Row => "row",
        PlayerRole::Column => "column",
    })
}

impl ChatRequest {
    /// Text of the final message, which carries the rendered prompt.
    pub fn prompt(&self) -> &str {
        self.messages.last().map(|m| m.content.as_str()).unwrap_or("")
    }
}

pub trait ChatEndpoint: Send + Sync {
    fn model_name(&self) -> &str;

    fn complete(&self, request: &ChatRequest) -> Result<String>;

    /// Extra attempts allowed after a failed or unparseable reply.
    fn max_retries(&self) -> u32 {
        3
    }

    fn retry_delay(&self, _attempt: u32) -> Duration {
        Duration::ZERO
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_rpm")]
    pub requests_per_minute: u32,
    /// Sent only when set; otherwise the endpoint's own default applies.
    #[serde(default)]
    pub temperature: Option<f64>,
}

fn default_timeout() -> f64 {
    60.0
}

fn default_retries() -> u32 {
    3
}

fn default_rpm() -> u32 {
    60
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>, api_key_env: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            model_name: model_name.into(),
            api_key_env: api_key_env.into(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            requests_per_minute: default_rpm(),
            temperature: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_name.is_empty() {
            return Err(HarnessError::Config("endpoint model_name is empty".into()));
        }
        if self.requests_per_minute < 1 {
            return Err(HarnessError::Config(format!("{}: requests_per_minute must be at least 1", self.model_name)));
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(HarnessError::Config(format!("{}: timeout must be positive", self.model_name)));
        }
        if self.api_key_env.is_empty() {
            return Err(HarnessError::Config(format!("{}: api_key_env is empty", self.model_name)));
        }
        Ok(())
    }

    pub fn completions_url(&self) -> String {
        let base = self.base_url.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

/// `[[endpoints]]` tables in a TOML file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointsFile {
    pub endpoints: Vec<EndpointConfig>,
}

impl EndpointsFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: EndpointsFile =
            toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        for ep in &file.endpoints {
            ep.validate()?;
        }
        Ok(file)
    }
}

/// Token bucket refilled continuously at `per_minute / 60` tokens per second.
#[derive(Debug)]
pub struct RateLimiter {
    state: Mutex<(f64, Instant)>,
    capacity: f64,
    per_second: f64,
}

impl RateLimiter {
    pub fn per_minute(per_minute: u32) -> Self {
        let capacity = f64::from(per_minute.max(1));
        RateLimiter { state: Mutex::new((capacity, Instant::now())), capacity, per_second: capacity / 60.0 }
    }

    /// Blocks until a token is available and takes it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut guard = self.state.lock().unwrap_or_else(|p| p.into_inner());
                let (tokens, last) = &mut *guard;
                let now = Instant::now();
                *tokens = (*tokens + now.duration_since(*last).as_secs_f64() * self.per_second).min(self.capacity);
                *last = now;
                if *tokens >= 1.0 {
                    *tokens -= 1.0;
                    return;
                }
                (1.0 - *tokens) / self.per_second
            };
            std::thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

#[derive(Debug, Serialize)]
struct ArchiveEntry<'a> {
    model: &'a str,
    request: &'a ChatRequest,
    status: Option<u16>,
    response: &'a str,
}

pub struct HttpEndpoint {
    config: EndpointConfig,
    api_key: String,
    client: reqwest::blocking::Client,
    limiter: Arc<RateLimiter>,
    archive: Option<(PathBuf, Mutex<()>)>,
}

impl HttpEndpoint {
    /// Reads the bearer token from the configured environment variable;
    /// a missing or empty variable is a configuration error.
    pub fn new(config: EndpointConfig) -> Result<Self> {
        config.validate()?;
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty()).ok_or_else(|| {
            HarnessError::Config(format!(
                "environment variable {} for model {} is not set",
                config.api_key_env, config.model_name
            ))
        })?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| HarnessError::Config(format!("http client: {e}")))?;
        let limiter = Arc::new(RateLimiter::per_minute(config.requests_per_minute));
        Ok(HttpEndpoint { config, api_key, client, limiter, archive: None })
    }

    /// Appends every request and response to `<dir>/<model>.jsonl`.
    pub fn with_archive(mut self, dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let file = dir.join(format!("{}.jsonl", sanitize(&self.config.model_name)));
        self.archive = Some((file, Mutex::new(())));
        Ok(self)
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    fn record(&self, request: &ChatRequest, status: Option<u16>, response: &str) {
        let Some((path, lock)) = &self.archive else { return };
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        let entry = ArchiveEntry { model: &self.config.model_name, request, status, response };
        let written = OpenOptions::new().create(true).append(true).open(path).and_then(|mut f| {
            let mut line = serde_json::to_vec(&entry).map_err(std::io::Error::from)?;
            line.push(b'\n');
            f.write_all(&line)
        });
        if let Err(e) = written {
            log::warn!("could not archive exchange to {}: {e}", path.display());
        }
    }
}

impl ChatEndpoint for HttpEndpoint {
    fn model_name(&self) -> &str {
        &self.config.model_name
    }

    fn max_retries(&self) -> u32 {
        self.config.max_retries
    }

    fn retry_delay(&self, attempt: u32) -> Duration {
        Duration::from_millis(250u64 << attempt.min(6))
    }

    fn complete(&self, request: &ChatRequest) -> Result<String> {
        self.limiter.acquire();
        let mut body = json!({ "model": self.config.model_name, "messages": request.messages });
        if let Some(t) = self.config.temperature {
            body["temperature"] = json!(t);
        }
        let sent = self.client.post(self.config.completions_url()).bearer_auth(&self.api_key).json(&body).send();
        let response = match sent {
            Ok(r) => r,
            Err(e) => {
                self.record(request, None, &e.to_string());
                return Err(HarnessError::Endpoint(format!("{}: {e}", self.config.model_name)));
            }
        };
        let status = response.status();
        let text = response.text().map_err(|e| HarnessError::Endpoint(format!("{}: {e}", self.config.model_name)))?;
        self.record(request, Some(status.as_u16()), &text);
        if !status.is_success() {
            let snippet: String = text.chars().take(200).collect();
            return Err(HarnessError::Endpoint(format!("{}: HTTP {status}: {snippet}", self.config.model_name)));
        }
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Endpoint(format!("{}: malformed response: {e}", self.config.model_name)))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| HarnessError::Endpoint(format!("{}: response has no choices[0].message.content", self.config.model_name)))
    }
}

pub(crate) fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

/// A scripted reply rule. Every field that is set must match; the first
/// matching rule wins. `contains` and `pattern` are checked against the
/// rendered prompt after replacing `{round}` and `{prev}` (the previous
/// round number).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    pub model: Option<String>,
    pub purpose: Option<Purpose>,
    pub role: Option<String>,
    pub round: Option<usize>,
    pub min_round: Option<usize>,
    pub max_round: Option<usize>,
    pub contains: Option<String>,
    pub pattern: Option<String>,
    /// Only match the n-th attempt (0 is the first try).
    pub attempt: Option<u32>,
    pub respond: Option<String>,
    /// Reply drawn from these, seeded by request seed, round, role and attempt.
    pub choices: Option<Vec<String>>,
    #[serde(default)]
    pub fail: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockFixture {
    #[serde(default = "default_reply")]
    pub default: String,
    #[serde(default)]
    pub max_retries: Option<u32>,
    #[serde(default)]
    pub rules: Vec<MockRule>,
}

fn default_reply() -> String {
    "1".into()
}

impl MockFixture {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let fixture: MockFixture = toml::from_str(text).map_err(|e| HarnessError::Config(format!("mock fixture: {e}")))?;
        for rule in &fixture.rules {
            if let Some(p) = &rule.pattern {
                Regex::new(&p.replace("{round}", "1").replace("{prev}", "0")).map_err(|e| HarnessError::Config(format!("mock pattern {p:?}: {e}")))?;
            }
            if let Some(r) = &rule.role {
                parse_role(r)?;
            }
            let replies = usize::from(rule.respond.is_some()) + usize::from(rule.choices.is_some()) + usize::from(rule.fail);
            if replies != 1 {
                return Err(HarnessError::Config("each mock rule needs exactly one of respond, choices, fail".into()));
            }
            if rule.choices.as_ref().is_some_and(Vec::is_empty) {
                return Err(HarnessError::Config("mock rule has empty choices".into()));
            }
        }
        Ok(fixture)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn endpoint(&self, model_name: &str) -> MockEndpoint {
        MockEndpoint {
            model_name: model_name.to_string(),
            fixture: self.clone(),
            requests: Mutex::new(Vec::new()),
        }
    }
}

fn parse_role(s: &str) -> Result<PlayerRole> {
    match s {
        "row" => Ok(PlayerRole::Row),
        "column" | "col" => Ok(PlayerRole::Column),
        other => Err(HarnessError::Config(format!("unknown role {other:?} in mock rule"))),
    }
}

pub struct MockEndpoint {
    model_name: String,
    fixture: MockFixture,
    requests: Mutex<Vec<ChatRequest>>,
}

impl MockEndpoint {
    /// A mock that gives the same reply to everything.
    pub fn constant(model_name: &str, reply: &str) -> Self {
        MockFixture { default: reply.to_string(), max_retries: None, rules: Vec::new() }.endpoint(model_name)
    }

    /// Every request received so far, in arrival order.
    pub fn requests(&self) -> Vec<ChatRequest> {
        self.requests.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }

    fn matches(&self, rule: &MockRule, req: &ChatRequest) -> bool {
        let subst = |s: &str| s.replace("{round}", &req.round.to_string()).replace("{prev}", &req.round.saturating_sub(1).to_string());
        rule.model.as_deref().map_or(true, |m| m == self.model_name)
            && rule.purpose.map_or(true, |p| p == req.purpose)
            && rule.role.as_deref().map_or(true, |r| parse_role(r).is_ok_and(|r| r == req.role))
            && rule.round.map_or(true, |r| r == req.round)
            && rule.min_round.map_or(true, |r| req.round >= r)
            && rule.max_round.map_or(true, |r| req.round <= r)
            && rule.attempt.map_or(true, |a| a == req.attempt)
            && rule.contains.as_deref().map_or(true, |c| req.prompt().contains(&subst(c)))
            && rule.pattern.as_deref().map_or(true, |p| Regex::new(&subst(p)).is_ok_and(|re| re.is_match(req.prompt())))
    }
}

impl ChatEndpoint for MockEndpoint {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn max_retries(&self) -> u32 {
        self.fixture.max_retries.unwrap_or(3)
    }

    fn complete(&self, request: &ChatRequest) -> Result<String> {
        self.requests.lock().unwrap_or_else(|p| p.into_inner()).push(request.clone());
        let Some(rule) = self.fixture.rules.iter().find(|r| self.matches(r, request)) else {
            return Ok(self.fixture.default.clone());
        };
        if rule.fail {
            return Err(HarnessError::Endpoint(format!("{}: scripted failure", self.model_name)));
        }
        if let Some(choices) = &rule.choices {
            let role = u64::from(request.role == PlayerRole::Column);
            let key = request.seed ^ (request.round as u64) << 20 ^ role << 40 ^ u64::from(request.attempt) << 48;
            let u = unit_f64(&mut seeded_rng(key));
            let idx = ((u * choices.len() as f64) as usize).min(choices.len() - 1);
            return Ok(choices[idx].clone());
        }
        Ok(rule.respond.clone().unwrap_or_default())
    }
}

/// Endpoints by model name, shared across concurrent matches.
pub type EndpointRegistry = BTreeMap<String, Arc<dyn ChatEndpoint>>;
