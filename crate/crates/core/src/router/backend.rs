use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{JudgeRequest, JudgeVerdict, Module, RouterError, Verdict};

/// Environment variable holding the judging endpoint URL.
pub const ENDPOINT_ENV: &str = "SYNTQA_LLM_ENDPOINT";

/// Protocol version sent with every HTTP request.
const WIRE_VERSION: u32 = 1;

pub trait JudgeBackend: Send + Sync {
    fn judge(&self, request: &JudgeRequest) -> Result<JudgeVerdict, RouterError>;
}

impl<B: JudgeBackend + ?Sized> JudgeBackend for Box<B> {
    fn judge(&self, request: &JudgeRequest) -> Result<JudgeVerdict, RouterError> {
        (**self).judge(request)
    }
}

/// Reads the first yes/no (or A/B for COMPARISON) token of a reply. Returns
/// the module's fallback verdict and `false` when no such token exists.
pub fn parse_reply(module: Module, raw: &str) -> (Verdict, bool) {
    for token in raw.split_whitespace() {
        let t = token
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_ascii_lowercase();
        let v = match (module.is_boolean(), t.as_str()) {
            (true, "yes") => Some(Verdict::Yes),
            (true, "no") => Some(Verdict::No),
            (false, "a") => Some(Verdict::PickSql),
            (false, "b") => Some(Verdict::PickE2e),
            _ => None,
        };
        if let Some(v) = v {
            return (v, true);
        }
    }
    (module.fallback(), false)
}

type RuleFn = dyn Fn(&JudgeRequest) -> Verdict + Send + Sync;

#[derive(Clone)]
enum Rule {
    Fixed(Verdict),
    Dynamic(Arc<RuleFn>),
}

/// Scripted backend for tests and offline runs. Records the order of calls.
#[derive(Clone, Default)]
pub struct StubBackend {
    script: HashMap<Module, Rule>,
    calls: Arc<Mutex<Vec<(String, Module)>>>,
}

impl StubBackend {
    pub fn new() -> Self {
        StubBackend::default()
    }

    pub fn with(mut self, module: Module, verdict: Verdict) -> Self {
        self.script.insert(module, Rule::Fixed(verdict));
        self
    }

    pub fn with_rule(mut self, module: Module, rule: impl Fn(&JudgeRequest) -> Verdict + Send + Sync + 'static) -> Self {
        self.script.insert(module, Rule::Dynamic(Arc::new(rule)));
        self
    }

    /// NO from every boolean module and PICK_E2E from COMPARISON.
    pub fn all_no() -> Self {
        Module::ALL
            .into_iter()
            .fold(StubBackend::new(), |s, m| s.with(m, m.fallback()))
    }

    /// Verdicts that steer every disagreement to the side `sql_correct`
    /// reports as correct.
    pub fn oracle(sql_correct: HashMap<String, bool>) -> Self {
        let truth = Arc::new(sql_correct);
        let side = move |yes: Verdict, no: Verdict| {
            let truth = Arc::clone(&truth);
            move |r: &JudgeRequest| {
                if truth.get(&r.instance_id).copied().unwrap_or(false) {
                    yes
                } else {
                    no
                }
            }
        };
        StubBackend::new()
            .with(Module::Similarity, Verdict::No)
            .with_rule(Module::Relevance, side(Verdict::Yes, Verdict::No))
            .with_rule(Module::Alignment, side(Verdict::Yes, Verdict::No))
            .with_rule(Module::Contradiction, side(Verdict::No, Verdict::Yes))
            .with_rule(Module::Comparison, side(Verdict::PickSql, Verdict::PickE2e))
    }

    /// `(instance_id, module)` for every call so far, in order.
    pub fn calls(&self) -> Vec<(String, Module)> {
        self.calls.lock().expect("call log").clone()
    }
}

impl JudgeBackend for StubBackend {
    fn judge(&self, request: &JudgeRequest) -> Result<JudgeVerdict, RouterError> {
        self.calls
            .lock()
            .expect("call log")
            .push((request.instance_id.clone(), request.module));
        let verdict = match self.script.get(&request.module) {
            Some(Rule::Fixed(v)) => *v,
            Some(Rule::Dynamic(f)) => f(request),
            None => {
                return Err(RouterError::UnscriptedModule {
                    module: request.module,
                    instance: request.instance_id.clone(),
                })
            }
        };
        Ok(JudgeVerdict {
            module: request.module,
            verdict,
            raw_response: format!("{verdict:?}"),
        })
    }
}

/// One logged verdict, replayable by instance and module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub instance_id: String,
    pub module: Module,
    pub verdict: Verdict,
    pub raw_response: String,
}

/// Wraps a backend and logs every verdict it returns.
pub struct RecordingBackend<B> {
    inner: B,
    log: Mutex<Vec<VerdictRecord>>,
}

impl<B: JudgeBackend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn records(&self) -> Vec<VerdictRecord> {
        self.log.lock().expect("verdict log").clone()
    }
}

impl<B: JudgeBackend> JudgeBackend for RecordingBackend<B> {
    fn judge(&self, request: &JudgeRequest) -> Result<JudgeVerdict, RouterError> {
        let v = self.inner.judge(request)?;
        self.log.lock().expect("verdict log").push(VerdictRecord {
            instance_id: request.instance_id.clone(),
            module: v.module,
            verdict: v.verdict,
            raw_response: v.raw_response.clone(),
        });
        Ok(v)
    }
}

/// Answers from a recorded verdict log.
pub struct ReplayBackend {
    verdicts: HashMap<(String, Module), VerdictRecord>,
}

impl ReplayBackend {
    pub fn new(records: impl IntoIterator<Item = VerdictRecord>) -> Self {
        ReplayBackend {
            verdicts: records
                .into_iter()
                .map(|r| ((r.instance_id.clone(), r.module), r))
                .collect(),
        }
    }
}

impl JudgeBackend for ReplayBackend {
    fn judge(&self, request: &JudgeRequest) -> Result<JudgeVerdict, RouterError> {
        let r = self
            .verdicts
            .get(&(request.instance_id.clone(), request.module))
            .ok_or_else(|| RouterError::UnscriptedModule {
                module: request.module,
                instance: request.instance_id.clone(),
            })?;
        Ok(JudgeVerdict {
            module: r.module,
            verdict: r.verdict,
            raw_response: r.raw_response.clone(),
        })
    }
}

/// Posts `{"version", "module", "prompt"}` as JSON and reads the reply body,
/// either a JSON object with a `response` string or plain text.
pub struct HttpBackend {
    endpoint: String,
    agent: ureq::Agent,
    max_retries: usize,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, max_retries: usize) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpBackend {
            endpoint: endpoint.into(),
            agent,
            max_retries,
        }
    }

    /// Uses the endpoint named by [`ENDPOINT_ENV`].
    pub fn from_env(timeout: Duration, max_retries: usize) -> Result<Self, RouterError> {
        let endpoint = std::env::var(ENDPOINT_ENV)
            .map_err(|_| RouterError::BackendUnavailable(format!("{ENDPOINT_ENV} is not set")))?;
        Ok(HttpBackend::new(endpoint, timeout, max_retries))
    }

    fn post(&self, body: &str) -> Result<String, ureq::Error> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("content-type", "application/json")
            .send(body)?;
        resp.body_mut().read_to_string()
    }
}

fn reply_text(body: &str) -> String {
    match serde_json::from_str::<serde_json::Value>(body) {
        Ok(v) => match v.get("response").and_then(|r| r.as_str()) {
            Some(s) => s.to_string(),
            None => body.to_string(),
        },
        Err(_) => body.to_string(),
    }
}

impl JudgeBackend for HttpBackend {
    fn judge(&self, request: &JudgeRequest) -> Result<JudgeVerdict, RouterError> {
        let body = serde_json::json!({
            "version": WIRE_VERSION,
            "module": request.module,
            "prompt": request.prompt,
        })
        .to_string();
        let mut last = String::new();
        for attempt in 0..=self.max_retries {
            match self.post(&body) {
                Ok(text) => {
                    let raw = reply_text(&text);
                    let (verdict, parsed) = parse_reply(request.module, &raw);
                    if !parsed {
                        log::warn!(
                            "{} {}: unparseable reply {raw:?}, using {verdict:?}",
                            request.instance_id,
                            request.module
                        );
                    }
                    return Ok(JudgeVerdict {
                        module: request.module,
                        verdict,
                        raw_response: raw,
                    });
                }
                Err(e) => {
                    log::debug!("attempt {} failed: {e}", attempt + 1);
                    last = e.to_string();
                }
            }
        }
        Err(RouterError::BackendUnavailable(format!(
            "{} failed after {} attempts: {last}",
            self.endpoint,
            self.max_retries + 1
        )))
    }
}
