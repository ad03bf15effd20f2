//! Completion endpoints: an HTTP completion API plus two offline mocks.

use std::collections::HashMap;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetId, Example};
use crate::error::{Error, Result};
use crate::prompt::{query_input_of, PromptTemplate};
use crate::seed::{derive_rng, sha256_hex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionParams {
    pub max_tokens: u32,
    pub temperature: f64,
    pub stop_sequences: Vec<String>,
}

impl CompletionParams {
    /// Greedy decoding, stop at the first blank line.
    pub fn for_dataset(dataset: DatasetId) -> Self {
        CompletionParams {
            max_tokens: if dataset == DatasetId::Scan { 700 } else { 256 },
            temperature: 0.0,
            stop_sequences: vec!["\n\n".into()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_tokens == 0 {
            return Err(Error::Config("max_tokens must be positive".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::Config("temperature must be non-negative".into()));
        }
        Ok(())
    }
}

/// Where completions come from, as written in a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelEndpoint {
    HttpCompletion {
        url: String,
        /// Name of the environment variable holding the bearer token.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        api_key_env: Option<String>,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: u64,
        #[serde(default = "default_max_retries")]
        max_retries: u32,
        #[serde(default = "default_backoff_ms")]
        backoff_ms: u64,
    },
    /// Answers every query with its gold output.
    OracleMock,
    /// Gold output with probability `1 - p`, otherwise a corrupted string.
    NoiseMock {
        p: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_timeout_secs() -> u64 {
    60
}

fn default_max_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    500
}

impl ModelEndpoint {
    pub fn http(url: impl Into<String>) -> Self {
        ModelEndpoint::HttpCompletion {
            url: url.into(),
            api_key_env: None,
            timeout_secs: default_timeout_secs(),
            max_retries: default_max_retries(),
            backoff_ms: default_backoff_ms(),
        }
    }

    /// Parses the `--mock` flag: `oracle` or `noise:<p>`.
    pub fn parse_mock(spec: &str) -> Result<Self> {
        match spec.split_once(':') {
            None if spec == "oracle" => Ok(ModelEndpoint::OracleMock),
            Some(("noise", p)) => {
                let p: f64 = p
                    .parse()
                    .map_err(|_| Error::Config(format!("bad noise probability '{p}'")))?;
                let ep = ModelEndpoint::NoiseMock { p, seed: 0 };
                ep.validate()?;
                Ok(ep)
            }
            _ => Err(Error::Config(format!(
                "unknown mock '{spec}' (expected oracle or noise:<p>)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelEndpoint::HttpCompletion { url, .. } if url.trim().is_empty() => {
                Err(Error::Config("http endpoint needs a url".into()))
            }
            ModelEndpoint::NoiseMock { p, .. } if !(0.0..=1.0).contains(p) => {
                Err(Error::Config(format!("noise probability {p} not in [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_mock(&self) -> bool {
        !matches!(self, ModelEndpoint::HttpCompletion { .. })
    }

    /// Build a model. Mocks answer from `gold`; the HTTP client reads its
    /// token from the environment here so a missing token fails early.
    pub fn connect(&self, template: &PromptTemplate, gold: &[&Example]) -> Result<Arc<dyn CompletionModel>> {
        self.validate()?;
        Ok(match self {
            ModelEndpoint::HttpCompletion {
                url,
                api_key_env,
                timeout_secs,
                max_retries,
                backoff_ms,
            } => {
                let token = match api_key_env {
                    Some(var) => Some(std::env::var(var).map_err(|_| {
                        Error::Config(format!("environment variable {var} is not set"))
                    })?),
                    None => None,
                };
                Arc::new(HttpCompletion::new(
                    url.clone(),
                    token,
                    Duration::from_secs(*timeout_secs),
                    *max_retries,
                    Duration::from_millis(*backoff_ms),
                ))
            }
            ModelEndpoint::OracleMock => Arc::new(OracleMock::new(template.clone(), gold)),
            ModelEndpoint::NoiseMock { p, seed } => {
                Arc::new(NoiseMock::new(OracleMock::new(template.clone(), gold), *p, *seed))
            }
        })
    }
}

pub trait CompletionModel: Send + Sync {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String>;
}

#[derive(Debug, Clone)]
pub struct OracleMock {
    template: PromptTemplate,
    gold: HashMap<String, String>,
}

impl OracleMock {
    /// The first occurrence of an input wins when inputs repeat.
    pub fn new(template: PromptTemplate, gold: &[&Example]) -> Self {
        let mut table = HashMap::new();
        for ex in gold {
            table
                .entry(ex.input_text.clone())
                .or_insert_with(|| ex.output_text.clone());
        }
        OracleMock {
            template,
            gold: table,
        }
    }

    pub fn lookup(&self, prompt: &str) -> Result<&str> {
        let query = query_input_of(&self.template, prompt).ok_or_else(|| Error::Client {
            attempts: 1,
            message: "prompt has no query line".into(),
        })?;
        self.gold
            .get(query)
            .map(String::as_str)
            .ok_or_else(|| Error::Client {
                attempts: 1,
                message: format!("no gold output for query {query:?}"),
            })
    }
}

impl CompletionModel for OracleMock {
    fn complete(&self, prompt: &str, _params: &CompletionParams) -> Result<String> {
        self.lookup(prompt).map(str::to_owned)
    }
}

#[derive(Debug, Clone)]
pub struct NoiseMock {
    oracle: OracleMock,
    p: f64,
    seed: u64,
}

pub const NOISE_MARKER: &str = "<noise>";

impl NoiseMock {
    pub fn new(oracle: OracleMock, p: f64, seed: u64) -> Self {
        NoiseMock { oracle, p, seed }
    }
}

impl CompletionModel for NoiseMock {
    /// The draw depends on `(seed, prompt)` only, so repeated or reordered
    /// calls give the same answer.
    fn complete(&self, prompt: &str, _params: &CompletionParams) -> Result<String> {
        let gold = self.oracle.lookup(prompt)?;
        let mut rng = derive_rng(&[&"noise", &self.seed, &sha256_hex(prompt)]);
        if rng.random::<f64>() < self.p {
            Ok(format!("{gold} {NOISE_MARKER}"))
        } else {
            Ok(gold.to_owned())
        }
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    max_tokens: u32,
    temperature: f64,
    stop: &'a [String],
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

/// Blocking client for `POST {url}` completion APIs.
pub struct HttpCompletion {
    url: String,
    token: Option<String>,
    agent: ureq::Agent,
    max_retries: u32,
    backoff: Duration,
}

impl HttpCompletion {
    pub fn new(url: String, token: Option<String>, timeout: Duration, max_retries: u32, backoff: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpCompletion {
            url,
            token,
            agent,
            max_retries,
            backoff,
        }
    }

    fn attempt(&self, body: &str) -> std::result::Result<String, String> {
        let mut req = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(token) = &self.token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req.send(body).map_err(|e| format!("transport: {e}"))?;
        let status = resp.status();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| format!("reading body: {e}"))?;
        if !status.is_success() {
            return Err(format!("status {status}: {}", truncate(&text, 200)));
        }
        let parsed: CompletionResponse =
            serde_json::from_str(&text).map_err(|e| format!("malformed response: {e}"))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.text)
            .ok_or_else(|| "malformed response: empty choices".to_owned())
    }
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

impl CompletionModel for HttpCompletion {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String> {
        let body = serde_json::to_string(&CompletionRequest {
            prompt,
            max_tokens: params.max_tokens,
            temperature: params.temperature,
            stop: &params.stop_sequences,
        })?;
        let attempts = self.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                thread::sleep(self.backoff * 2u32.saturating_pow(attempt - 1));
            }
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(e) => last = e,
            }
        }
        Err(Error::Client {
            attempts,
            message: last,
        })
    }
}

/// Cut a raw completion at the first blank line or the first line that
/// starts a new input, then trim. Leading whitespace is skipped first.
pub fn extract_prediction(raw: &str, template: &PromptTemplate) -> String {
    let raw = raw.trim_start();
    let mut end = raw.len();
    let mut offset = 0;
    for line in raw.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        if content.trim().is_empty() || content.starts_with(template.input_prefix.as_str()) {
            end = offset;
            break;
        }
        offset += line.len();
    }
    raw[..end].trim().to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Split;
    use crate::prompt::render_prompt;

    #[test]
    fn extraction() {
        let scan = PromptTemplate::scan();
        let geo = PromptTemplate::geoquery();
        assert_eq!(extract_prediction("WALK WALK\n\nCommand: run", &scan), "WALK WALK");
        assert_eq!(extract_prediction("answer ( smallest ( state ) )", &geo), "answer ( smallest ( state ) )");
        assert_eq!(extract_prediction("A\nB\n\nQuestion: x", &geo), "A\nB");
        assert_eq!(extract_prediction("A\nQuestion: x", &geo), "A");
        assert_eq!(extract_prediction("  A  \n \nB", &geo), "A");
        assert_eq!(extract_prediction("", &geo), "");
    }

    #[test]
    fn oracle_and_noise() {
        let ex = Example::new(0, "how many states are there", "answer ( count ( state ( all ) ) )", Split::Test).unwrap();
        let shot = Example::new(1, "x", "answer ( x )", Split::Train).unwrap();
        let t = PromptTemplate::geoquery();
        let prompt = render_prompt(&t, &[shot], &ex.input_text).unwrap();
        assert!(prompt.ends_with("Question: how many states are there\nQuery: "));
        let params = CompletionParams::for_dataset(DatasetId::GeoQuery);
        let oracle = ModelEndpoint::OracleMock.connect(&t, &[&ex]).unwrap();
        assert_eq!(oracle.complete(&prompt, &params).unwrap(), ex.output_text);

        let always = ModelEndpoint::NoiseMock { p: 1.0, seed: 3 }.connect(&t, &[&ex]).unwrap();
        assert_ne!(always.complete(&prompt, &params).unwrap(), ex.output_text);
        let never = ModelEndpoint::NoiseMock { p: 0.0, seed: 3 }.connect(&t, &[&ex]).unwrap();
        assert_eq!(never.complete(&prompt, &params).unwrap(), ex.output_text);

        let unknown = render_prompt(&t, &[ex.clone()], "something else").unwrap();
        assert!(oracle.complete(&unknown, &params).is_err());
    }

    #[test]
    fn mock_flag_parsing() {
        assert_eq!(ModelEndpoint::parse_mock("oracle").unwrap(), ModelEndpoint::OracleMock);
        assert_eq!(
            ModelEndpoint::parse_mock("noise:0.25").unwrap(),
            ModelEndpoint::NoiseMock { p: 0.25, seed: 0 }
        );
        assert!(ModelEndpoint::parse_mock("noise:2").is_err());
        assert!(ModelEndpoint::parse_mock("noise:x").is_err());
        assert!(ModelEndpoint::parse_mock("gpt").is_err());
    }

    #[test]
    fn endpoint_validation() {
        assert!(ModelEndpoint::http("").validate().is_err());
        assert!(ModelEndpoint::http("http://localhost:1/v1/completions").validate().is_ok());
        let ep = ModelEndpoint::HttpCompletion {
            url: "http://x".into(),
            api_key_env: Some("ICL_GAP_SURELY_UNSET_VAR".into()),
            timeout_secs: 1,
            max_retries: 0,
            backoff_ms: 0,
        };
        assert!(ep.connect(&PromptTemplate::scan(), &[]).is_err());
    }

    #[test]
    fn default_params() {
        let scan = CompletionParams::for_dataset(DatasetId::Scan);
        assert_eq!(scan.max_tokens, 700);
        assert_eq!(scan.temperature, 0.0);
        assert_eq!(scan.stop_sequences, vec!["\n\n".to_string()]);
        assert_eq!(CompletionParams::for_dataset(DatasetId::Cfq).max_tokens, 256);
    }
}
