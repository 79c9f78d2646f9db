//! Remote text-generation backend and pipeline configuration.
//!
//! The backend speaks a chat-completions style protocol: one JSON request
//! per stage with a system prompt from a versioned template and the stage
//! input as the user message. The reply's first fenced block (or the whole
//! reply) is taken as the stage output.
//!
//! Configuration is TOML:
//!
//! ```toml
//! backend = "remote"            # or "deterministic"
//! prompts_dir = "prompts/v1"    # optional; built-in templates otherwise
//!
//! [remote]
//! base_url = "https://api.example.com/v1"
//! model = "some-model"
//! api_key_env = "FRAMESMITH_API_KEY"
//! timeout_secs = 120
//! retries = 2
//! max_concurrent = 4
//! ```
//!
//! The credential is read from the named environment variable at request
//! time and never stored in the backend, its exchanges or any report.

use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::geometry::{steps_to_json, topology_from_steps_json};
use crate::loads::LoadSet;
use crate::model::TopologyModel;
use crate::pipeline::{DeterministicBackend, GenerationBackend, Stage, StageError, ValidatedScript};
use crate::problem::{problem_from_json, problem_to_json, FrameProblem};
use crate::script::emit_script;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum RemoteError {
    #[error("environment variable {0} with the API key is not set")]
    MissingCredential(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("endpoint rejected the credential (HTTP {0})")]
    Auth(u16),
    #[error("endpoint returned HTTP {0}: {1}")]
    Status(u16, String),
    #[error("unusable response: {0}")]
    BadResponse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteEndpointConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_concurrency")]
    pub max_concurrent: usize,
}

fn default_key_env() -> String {
    "FRAMESMITH_API_KEY".into()
}
fn default_timeout() -> u64 {
    120
}
fn default_retries() -> u32 {
    2
}
fn default_concurrency() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Deterministic,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub backend: BackendKind,
    pub remote: Option<RemoteEndpointConfig>,
    pub prompts_dir: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("backend \"remote\" needs a [remote] table")]
    MissingRemote,
    #[error("cannot read prompt template {path}: {source}")]
    Prompt { path: PathBuf, source: std::io::Error },
}

pub fn parse_config(text: &str) -> Result<PipelineConfig, ConfigError> {
    Ok(toml::from_str(text)?)
}

/// System prompts for the four generating stages.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptSet {
    pub version: String,
    pub problem_analysis: String,
    pub geometry: String,
    pub translation: String,
    pub loads: String,
}

impl PromptSet {
    pub fn builtin() -> PromptSet {
        PromptSet {
            version: "v1".into(),
            problem_analysis: include_str!("../prompts/v1/problem_analysis.txt").into(),
            geometry: include_str!("../prompts/v1/geometry.txt").into(),
            translation: include_str!("../prompts/v1/translation.txt").into(),
            loads: include_str!("../prompts/v1/loads.txt").into(),
        }
    }

    /// Reads `problem_analysis.txt`, `geometry.txt`, `translation.txt` and
    /// `loads.txt` from `dir`; the directory name is the version.
    pub fn from_dir(dir: &Path) -> Result<PromptSet, ConfigError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| ConfigError::Prompt { path, source })
        };
        Ok(PromptSet {
            version: dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            problem_analysis: read("problem_analysis.txt")?,
            geometry: read("geometry.txt")?,
            translation: read("translation.txt")?,
            loads: read("loads.txt")?,
        })
    }
}

/// One recorded request and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub stage: Stage,
    pub prompt_version: String,
    pub request: Value,
    pub response: Option<String>,
    pub error: Option<String>,
    pub attempts: u32,
    pub seconds: f64,
}

/// Counting semaphore bounding in-flight requests.
struct Limiter {
    available: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a Limiter);

impl Limiter {
    fn new(n: usize) -> Limiter {
        Limiter {
            available: Mutex::new(n.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.available.lock().unwrap_or_else(|p| p.into_inner());
        while *n == 0 {
            n = self.freed.wait(n).unwrap_or_else(|p| p.into_inner());
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().unwrap_or_else(|p| p.into_inner()) += 1;
        self.0.freed.notify_one();
    }
}

pub struct RemoteBackend {
    config: RemoteEndpointConfig,
    prompts: PromptSet,
    agent: ureq::Agent,
    limiter: Limiter,
    exchanges: Mutex<Vec<Exchange>>,
}

/// First fenced code block of `text`, or the trimmed text itself.
pub fn extract_block(text: &str) -> String {
    if let Some(start) = text.find("```") {
        let after = &text[start + 3..];
        let body = after.split_once('\n').map(|(_, b)| b).unwrap_or("");
        if let Some(end) = body.find("```") {
            return body[..end].to_string();
        }
    }
    let t = text.trim();
    format!("{t}\n")
}

impl RemoteBackend {
    pub fn new(config: RemoteEndpointConfig, prompts: PromptSet) -> RemoteBackend {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteBackend {
            limiter: Limiter::new(config.max_concurrent),
            config,
            prompts,
            agent,
            exchanges: Mutex::new(Vec::new()),
        }
    }

    pub fn config(&self) -> &RemoteEndpointConfig {
        &self.config
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, key: &str, body: &Value) -> Result<String, (RemoteError, bool)> {
        let mut resp = self
            .agent
            .post(&self.endpoint())
            .header("Authorization", &format!("Bearer {key}"))
            .send_json(body)
            .map_err(|e| (RemoteError::Network(e.to_string()), true))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| (RemoteError::Network(e.to_string()), true))?;
        match status {
            200..=299 => {}
            401 | 403 => return Err((RemoteError::Auth(status), false)),
            429 | 500..=599 => return Err((RemoteError::Status(status, text), true)),
            _ => return Err((RemoteError::Status(status, text), false)),
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| (RemoteError::BadResponse(e.to_string()), false))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| (RemoteError::BadResponse("no choices[0].message.content".into()), false))
    }

    /// Sends one stage request, retrying transient failures.
    fn complete(&self, stage: Stage, system: &str, user: &str) -> Result<String, RemoteError> {
        let body = json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        });
        let start = Instant::now();
        let mut attempts = 0;
        let result = match std::env::var(&self.config.api_key_env) {
            Err(_) => Err(RemoteError::MissingCredential(self.config.api_key_env.clone())),
            Ok(key) => {
                let _permit = self.limiter.acquire();
                loop {
                    attempts += 1;
                    match self.attempt(&key, &body) {
                        Ok(text) => break Ok(text),
                        Err((e, retry)) if retry && attempts <= self.config.retries => {
                            let _ = e;
                            std::thread::sleep(Duration::from_millis(200 * attempts as u64));
                        }
                        Err((e, _)) => break Err(e),
                    }
                }
            }
        };
        let record = Exchange {
            stage,
            prompt_version: self.prompts.version.clone(),
            request: body,
            response: result.as_ref().ok().cloned(),
            error: result.as_ref().err().map(|e| e.to_string()),
            attempts,
            seconds: start.elapsed().as_secs_f64(),
        };
        self.exchanges.lock().unwrap_or_else(|p| p.into_inner()).push(record);
        result
    }
}

fn bad(stage: Stage, e: impl std::fmt::Display) -> StageError {
    StageError::failed(
        crate::category::ErrorCategory::Other,
        format!("{stage} output unusable: {e}"),
    )
}

impl GenerationBackend for RemoteBackend {
    fn name(&self) -> String {
        format!("remote:{}", self.config.model)
    }

    fn problem_analysis(&self, description: &str) -> Result<FrameProblem, StageError> {
        let reply = self.complete(Stage::ProblemAnalysis, &self.prompts.problem_analysis, description)?;
        problem_from_json(&extract_block(&reply)).map_err(|e| bad(Stage::ProblemAnalysis, e))
    }

    fn geometry(&self, problem: &FrameProblem) -> Result<TopologyModel, StageError> {
        let reply = self.complete(Stage::Geometry, &self.prompts.geometry, &problem_to_json(problem))?;
        Ok(topology_from_steps_json(&extract_block(&reply))?)
    }

    fn translation(&self, problem: &FrameProblem, model: &TopologyModel) -> Result<String, StageError> {
        let user = format!(
            "Material:\n{}\nConstruction steps:\n{}",
            serde_json::to_string(&problem.material).expect("plain data"),
            steps_to_json(model)
        );
        let reply = self.complete(Stage::Translation, &self.prompts.translation, &user)?;
        Ok(extract_block(&reply))
    }

    fn loads(&self, problem: &FrameProblem, validated: &ValidatedScript) -> Result<String, StageError> {
        let user = format!("Problem:\n{}\nScript:\n{}", problem_to_json(problem), validated.script);
        let reply = self.complete(Stage::Loads, &self.prompts.loads, &user)?;
        Ok(extract_block(&reply))
    }

    fn exchanges(&self) -> Vec<Exchange> {
        self.exchanges.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }
}

/// Builds the backend a configuration selects. `base` resolves a relative
/// `prompts_dir`.
pub fn backend_from_config(config: &PipelineConfig, base: &Path) -> Result<Box<dyn GenerationBackend>, ConfigError> {
    match config.backend {
        BackendKind::Deterministic => Ok(Box::new(DeterministicBackend::default())),
        BackendKind::Remote => {
            let remote = config.remote.clone().ok_or(ConfigError::MissingRemote)?;
            let prompts = match &config.prompts_dir {
                Some(dir) => PromptSet::from_dir(&base.join(dir))?,
                None => PromptSet::builtin(),
            };
            Ok(Box::new(RemoteBackend::new(remote, prompts)))
        }
    }
}

/// The reply a perfect remote model would give for a stage, computed with
/// the deterministic backend. Used to exercise the remote path offline.
pub fn reference_reply(stage: Stage, user: &str) -> Option<String> {
    let det = DeterministicBackend::default();
    match stage {
        Stage::ProblemAnalysis => det.problem_analysis(user).ok().map(|p| problem_to_json(&p)),
        Stage::Geometry => {
            let p = problem_from_json(user).ok()?;
            det.geometry(&p).ok().map(|m| steps_to_json(&m))
        }
        Stage::Translation => {
            let (material, steps) = user
                .strip_prefix("Material:\n")?
                .split_once("\nConstruction steps:\n")?;
            let material = serde_json::from_str(material).ok()?;
            let model = topology_from_steps_json(steps).ok()?;
            Some(emit_script(&model, &LoadSet::default(), &material, &Default::default()).text)
        }
        Stage::Loads => {
            let (problem, script) = user.strip_prefix("Problem:\n")?.split_once("\nScript:\n")?;
            let problem = problem_from_json(problem).ok()?;
            let parsed = crate::script::parse_script(script).ok()?;
            let set = crate::loads::derive_loads(&problem, &parsed.model).ok()?;
            Some(emit_script(&parsed.model, &set, &parsed.material, &parsed.config).text)
        }
        Stage::Validation | Stage::Analysis => None,
    }
}
