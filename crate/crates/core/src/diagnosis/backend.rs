use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::prompt::{
    AGGREGATOR_DRAFTS_HEADER, HEALTH_REPORT_TITLE, SUMMARY_ANOMALY_HEADER, SUMMARY_TASK,
};

pub const ENV_LLM_URL: &str = "RCA_LLM_URL";
pub const ENV_LLM_API_KEY: &str = "RCA_LLM_API_KEY";

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend timed out after {0:.1}s")]
    Timeout(f64),
    #[error("backend returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("backend protocol error: {0}")]
    Protocol(String),
    #[error("no recorded response for prompt hash {0}")]
    ReplayMiss(String),
    #[error("cassette {}: {message}", path.display())]
    Cassette { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationParams {
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub timeout_seconds: f64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            temperature: 0.7,
            max_output_tokens: 1024,
            timeout_seconds: 60.0,
        }
    }
}

impl GenerationParams {
    pub fn with_temperature(&self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            ));
        }
        if self.max_output_tokens == 0 {
            return Err("max_output_tokens must be positive".into());
        }
        if !(self.timeout_seconds > 0.0 && self.timeout_seconds.is_finite()) {
            return Err(format!(
                "timeout_seconds must be positive, got {}",
                self.timeout_seconds
            ));
        }
        Ok(())
    }
}

/// Text-completion model behind the diagnosis stage. Implementations must be
/// safe to call from several threads at once.
pub trait LlmBackend: Send + Sync {
    fn name(&self) -> &str;
    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<String, BackendError>;
}

impl<T: LlmBackend + ?Sized> LlmBackend for Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<String, BackendError> {
        (**self).generate(prompt, params)
    }
}

/// Hex SHA-256 of the prompt text; the cassette key.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

// ---------------------------------------------------------------- http

#[derive(Serialize)]
struct HttpRequest<'a> {
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct HttpResponse {
    text: String,
}

/// JSON-over-HTTP completion endpoint: `{"prompt","temperature","max_tokens"}`
/// in, `{"text"}` out. The bearer token, if any, comes from `RCA_LLM_API_KEY`.
pub struct HttpBackend {
    url: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(url: impl Into<String>, api_key: Option<String>) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        Ok(Self {
            url: url.into(),
            api_key,
            client,
        })
    }

    /// URL from `url` or `RCA_LLM_URL`, key from `RCA_LLM_API_KEY`.
    pub fn from_env(url: Option<&str>) -> Result<Self, BackendError> {
        let url = match url {
            Some(u) => u.to_string(),
            None => std::env::var(ENV_LLM_URL).map_err(|_| {
                BackendError::Unavailable(format!(
                    "no backend URL configured and {ENV_LLM_URL} unset"
                ))
            })?,
        };
        let key = std::env::var(ENV_LLM_API_KEY)
            .ok()
            .filter(|k| !k.is_empty());
        Self::new(url, key)
    }
}

impl LlmBackend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<String, BackendError> {
        let mut req = self
            .client
            .post(&self.url)
            .timeout(Duration::from_secs_f64(params.timeout_seconds))
            .json(&HttpRequest {
                prompt,
                temperature: params.temperature,
                max_tokens: params.max_output_tokens,
            });
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout(params.timeout_seconds)
            } else {
                BackendError::Unavailable(e.to_string())
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            let body = resp.text().unwrap_or_default();
            return Err(BackendError::Http {
                status: status.as_u16(),
                body: body.chars().take(500).collect(),
            });
        }
        let parsed: HttpResponse = resp
            .json()
            .map_err(|e| BackendError::Protocol(e.to_string()))?;
        Ok(parsed.text)
    }
}

// ---------------------------------------------------------------- stub

#[derive(Debug, Clone)]
enum StubMode {
    Echo,
    Fixed(String),
    Sequence(Vec<String>),
    Template,
    Failing(String),
}

/// Offline backend for tests and demos. Every prompt it receives is kept
/// and can be inspected with [`StubBackend::prompts`].
#[derive(Debug)]
pub struct StubBackend {
    mode: StubMode,
    calls: Mutex<Vec<String>>,
}

impl StubBackend {
    fn with_mode(mode: StubMode) -> Self {
        Self {
            mode,
            calls: Mutex::new(Vec::new()),
        }
    }

    /// Returns the prompt unchanged.
    pub fn echo() -> Self {
        Self::with_mode(StubMode::Echo)
    }

    /// Returns the same text for every prompt.
    pub fn fixed(text: impl Into<String>) -> Self {
        Self::with_mode(StubMode::Fixed(text.into()))
    }

    /// Returns the given texts in call order, cycling.
    pub fn sequence(texts: Vec<String>) -> Self {
        assert!(
            !texts.is_empty(),
            "sequence stub needs at least one response"
        );
        Self::with_mode(StubMode::Sequence(texts))
    }

    /// Deterministic rule-based answers derived from the prompt itself.
    pub fn template() -> Self {
        Self::with_mode(StubMode::Template)
    }

    /// Fails every call with the given message.
    pub fn failing(message: impl Into<String>) -> Self {
        Self::with_mode(StubMode::Failing(message.into()))
    }

    pub fn prompts(&self) -> Vec<String> {
        self.calls.lock().expect("stub lock").clone()
    }
}

impl LlmBackend for StubBackend {
    fn name(&self) -> &str {
        "stub"
    }

    fn generate(&self, prompt: &str, _params: &GenerationParams) -> Result<String, BackendError> {
        let index = {
            let mut calls = self.calls.lock().expect("stub lock");
            calls.push(prompt.to_string());
            calls.len() - 1
        };
        match &self.mode {
            StubMode::Echo => Ok(prompt.to_string()),
            StubMode::Fixed(text) => Ok(text.clone()),
            StubMode::Sequence(texts) => Ok(texts[index % texts.len()].clone()),
            StubMode::Template => Ok(template_response(prompt)),
            StubMode::Failing(message) => Err(BackendError::Unavailable(message.clone())),
        }
    }
}

fn humanize_metric(metric: &str) -> String {
    const ACRONYMS: &[&str] = &[
        "cpu", "gpu", "nic", "ecn", "cnp", "tgw", "ack", "tcp", "rx", "tx",
    ];
    metric
        .split('_')
        .filter(|w| !matches!(*w, "total" | "avg" | "applications"))
        .map(|w| match w {
            "pct" => "percentage".to_string(),
            "ms" => "(ms)".to_string(),
            w if ACRONYMS.contains(&w) => w.to_ascii_uppercase(),
            w => w.to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Lines of the section that starts with the `## {title}` header.
fn section_lines<'a>(prompt: &'a str, title: &str) -> Vec<&'a str> {
    let header = format!("## {title}");
    let mut lines = prompt.lines().skip_while(|l| l.trim() != header);
    if lines.next().is_none() {
        return Vec::new();
    }
    lines.take_while(|l| !l.starts_with("## ")).collect()
}

fn template_summary(prompt: &str) -> String {
    let mut anomalies = Vec::new();
    let mut in_list = false;
    for line in prompt.lines() {
        if line.trim() == SUMMARY_ANOMALY_HEADER {
            in_list = true;
            continue;
        }
        if in_list {
            match line.strip_prefix("- ") {
                Some("none") => break,
                Some(item) => {
                    anomalies.push(item.split(':').next().unwrap_or(item).trim().to_string())
                }
                None => break,
            }
        }
    }
    if anomalies.is_empty() {
        "No application-layer anomalies detected; all application metrics are within their normal range.".into()
    } else {
        format!(
            "Application-layer anomalies detected in {}.",
            anomalies.join("; ")
        )
    }
}

fn template_aggregate(prompt: &str) -> Option<String> {
    let start = prompt.find(AGGREGATOR_DRAFTS_HEADER)?;
    let rest = &prompt[start..];
    let first = rest.find("### Draft 1\n")? + "### Draft 1\n".len();
    let body = &rest[first..];
    let end = body
        .find("\n### Draft ")
        .or_else(|| body.find("\n## "))
        .unwrap_or(body.len());
    Some(body[..end].trim().to_string())
}

fn template_diagnosis(prompt: &str) -> String {
    let top = section_lines(prompt, HEALTH_REPORT_TITLE)
        .into_iter()
        .find_map(|line| {
            let cells: Vec<&str> = line
                .trim()
                .trim_matches('|')
                .split('|')
                .map(str::trim)
                .collect();
            (cells.len() == 5 && cells[0] == "1*").then(|| {
                (
                    cells[1].to_string(),
                    cells[2].to_string(),
                    cells[3].to_string(),
                )
            })
        });
    let symptom = section_lines(prompt, super::prompt::SYMPTOM_TITLE)
        .into_iter()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    let symptom = if symptom.is_empty() {
        "Anomalous behaviour reported at the application layer.".to_string()
    } else {
        symptom
    };
    match top {
        Some((layer, node, metric)) => {
            let what = humanize_metric(&metric);
            format!(
                "Symptom: {symptom}\n\
                 Root cause hypothesis: The root cause is likely the high {what} on the {layer} node {node}, \
                 which the statistical analysis ranks as the most probable upstream cause of the application symptoms.\n\
                 Action Steps on {layer} Layer Node {node}:\n\
                 1. Investigate the {what} on {node} and mitigate the underlying fault.\n\
                 2. Monitor the application-layer metrics until they return to their baseline.\n\
                 Reasoning: The application symptom coincides with an anomaly in {metric} on {node}. \
                 Granger tests show this series leading the other anomalous series, and PageRank over the \
                 reversed causal graph places it first."
            )
        }
        None => format!(
            "Symptom: {symptom}\n\
             Root cause hypothesis: No upstream root cause was ranked by the statistical analysis, so the issue \
             is likely local to the application layer.\n\
             Reasoning: The health report is empty, so no infrastructure series explains the symptom."
        ),
    }
}

fn template_response(prompt: &str) -> String {
    if let Some(draft) = template_aggregate(prompt) {
        return draft;
    }
    if prompt.contains(SUMMARY_TASK) {
        return template_summary(prompt);
    }
    template_diagnosis(prompt)
}

// ---------------------------------------------------------------- replay

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayMode {
    /// Serve recorded responses only; a missing prompt is an error.
    Replay,
    /// Serve recorded responses, forwarding unseen prompts to the inner
    /// backend and persisting its answers.
    Record,
}

/// Record/replay cassette keyed by the SHA-256 of the prompt. The cassette
/// file is a JSON object mapping hash to response text.
pub struct ReplayBackend {
    path: PathBuf,
    mode: ReplayMode,
    inner: Option<Box<dyn LlmBackend>>,
    cassette: Mutex<BTreeMap<String, String>>,
}

impl ReplayBackend {
    pub fn replay(path: &Path) -> Result<Self, BackendError> {
        Ok(Self {
            path: path.to_path_buf(),
            mode: ReplayMode::Replay,
            inner: None,
            cassette: Mutex::new(load_cassette(path, false)?),
        })
    }

    /// Starts from the existing cassette if present.
    pub fn record(path: &Path, inner: Box<dyn LlmBackend>) -> Result<Self, BackendError> {
        Ok(Self {
            path: path.to_path_buf(),
            mode: ReplayMode::Record,
            inner: Some(inner),
            cassette: Mutex::new(load_cassette(path, true)?),
        })
    }

    pub fn mode(&self) -> ReplayMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.cassette.lock().expect("cassette lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cassette_error(&self, message: impl Into<String>) -> BackendError {
        BackendError::Cassette {
            path: self.path.clone(),
            message: message.into(),
        }
    }
}

fn load_cassette(
    path: &Path,
    allow_missing: bool,
) -> Result<BTreeMap<String, String>, BackendError> {
    let err = |message: String| BackendError::Cassette {
        path: path.to_path_buf(),
        message,
    };
    match std::fs::read(path) {
        Ok(raw) => serde_json::from_slice(&raw).map_err(|e| err(e.to_string())),
        Err(e) if allow_missing && e.kind() == std::io::ErrorKind::NotFound => Ok(BTreeMap::new()),
        Err(e) => Err(err(e.to_string())),
    }
}

impl LlmBackend for ReplayBackend {
    fn name(&self) -> &str {
        match self.mode {
            ReplayMode::Replay => "replay",
            ReplayMode::Record => "record",
        }
    }

    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<String, BackendError> {
        let key = prompt_hash(prompt);
        if let Some(text) = self.cassette.lock().expect("cassette lock").get(&key) {
            return Ok(text.clone());
        }
        let inner = match (&self.mode, &self.inner) {
            (ReplayMode::Record, Some(inner)) => inner,
            _ => return Err(BackendError::ReplayMiss(key)),
        };
        let text = inner.generate(prompt, params)?;
        let mut cassette = self.cassette.lock().expect("cassette lock");
        // concurrent identical prompts: first recording wins
        let text = cassette.entry(key).or_insert(text).clone();
        let mut raw = serde_json::to_vec_pretty(&*cassette).expect("cassette serializes");
        raw.push(b'\n');
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| self.cassette_error(e.to_string()))?;
        }
        std::fs::write(&self.path, raw).map_err(|e| self.cassette_error(e.to_string()))?;
        Ok(text)
    }
}
