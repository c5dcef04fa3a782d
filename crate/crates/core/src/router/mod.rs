//! Heuristic answer routing through five yes/no (or A/B) judgment modules
//! answered by a pluggable backend.

mod backend;
mod templates;

pub use backend::{
    parse_reply, HttpBackend, JudgeBackend, RecordingBackend, ReplayBackend, StubBackend, VerdictRecord,
    ENDPOINT_ENV,
};
pub use templates::{TemplateSet, TEMPLATE_VERSION};

use serde::{Deserialize, Serialize};

use crate::ensemble::{decide, predictions_agree, select_by_confidence, SelectorDecision};
use crate::metrics::effective_answers;
use crate::table::{ModelPrediction, QaInstance, Source, TableData};
use crate::text::normalize;

/// Largest count treated as a small integer by the contradiction check.
pub const SMALL_INTEGER_MAX: i64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Module {
    Similarity,
    Relevance,
    Alignment,
    Comparison,
    Contradiction,
}

impl Module {
    pub const ALL: [Module; 5] = [
        Module::Similarity,
        Module::Relevance,
        Module::Alignment,
        Module::Comparison,
        Module::Contradiction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Module::Similarity => "similarity",
            Module::Relevance => "relevance",
            Module::Alignment => "alignment",
            Module::Comparison => "comparison",
            Module::Contradiction => "contradiction",
        }
    }

    /// COMPARISON answers A/B; the others answer yes/no.
    pub fn is_boolean(self) -> bool {
        self != Module::Comparison
    }

    /// Verdict used when a reply cannot be parsed.
    pub fn fallback(self) -> Verdict {
        if self.is_boolean() {
            Verdict::No
        } else {
            Verdict::PickE2e
        }
    }
}

impl std::fmt::Display for Module {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name().to_ascii_uppercase())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Yes,
    No,
    PickSql,
    PickE2e,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeRequest {
    pub instance_id: String,
    pub module: Module,
    pub question: String,
    pub prompt: String,
    pub sql_answer: String,
    pub e2e_answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated_table_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub module: Module,
    pub verdict: Verdict,
    pub raw_response: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RouterError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("no template for module {0}")]
    TemplateMissing(Module),
    #[error("stub has no script for module {module} (instance `{instance}`)")]
    UnscriptedModule { module: Module, instance: String },
}

fn joined(answers: &[String]) -> String {
    answers.join(", ")
}

fn small_integer(answers: &[String]) -> bool {
    match answers {
        [a] => a
            .trim()
            .parse::<i64>()
            .is_ok_and(|n| (0..=SMALL_INTEGER_MAX).contains(&n)),
        _ => false,
    }
}

pub fn is_counting_question(question: &str) -> bool {
    let q = normalize(question);
    q.contains("how many") || q.contains("number of") || q.starts_with("count ")
}

struct Ctx<'a> {
    instance: &'a QaInstance,
    sql_answer: String,
    e2e_answer: String,
    backend: &'a dyn JudgeBackend,
    templates: &'a TemplateSet,
}

impl Ctx<'_> {
    fn ask(&self, module: Module, table_text: Option<&str>) -> Result<Verdict, RouterError> {
        let prompt = self.templates.render(
            module,
            &self.instance.question,
            &self.sql_answer,
            &self.e2e_answer,
            table_text.unwrap_or(""),
        )?;
        let req = JudgeRequest {
            instance_id: self.instance.id.clone(),
            module,
            question: self.instance.question.clone(),
            prompt,
            sql_answer: self.sql_answer.clone(),
            e2e_answer: self.e2e_answer.clone(),
            truncated_table_text: table_text.map(str::to_string),
        };
        Ok(self.backend.judge(&req)?.verdict)
    }
}

/// Routes one instance. Checks run in a fixed order and stop at the first
/// decisive one: agreement, SQL failure, similarity, relevance, alignment,
/// the counting contradiction check, and finally the A/B comparison.
pub fn route(
    instance: &QaInstance,
    table: &TableData,
    sql: &ModelPrediction,
    e2e: &ModelPrediction,
    backend: &dyn JudgeBackend,
    templates: &TemplateSet,
    budget: usize,
) -> Result<SelectorDecision, RouterError> {
    let pick = |source: Source, tag: &str| {
        let score = if source == Source::Text2Sql { 1.0 } else { 0.0 };
        Ok(decide(sql, e2e, source, score, tag))
    };
    if predictions_agree(sql, e2e) {
        return pick(Source::Text2Sql, "agreement");
    }
    let sql_answers = effective_answers(sql);
    if sql_answers.is_empty() {
        return pick(Source::E2e, "sql_failed");
    }
    let ctx = Ctx {
        instance,
        sql_answer: joined(sql_answers),
        e2e_answer: joined(&e2e.answers),
        backend,
        templates,
    };
    if ctx.ask(Module::Similarity, None)? == Verdict::Yes {
        return pick(Source::Text2Sql, "similarity");
    }
    if ctx.ask(Module::Relevance, None)? == Verdict::No {
        return pick(Source::E2e, "relevance");
    }
    if ctx.ask(Module::Alignment, None)? == Verdict::No {
        return pick(Source::E2e, "alignment");
    }
    if is_counting_question(&instance.question) && small_integer(sql_answers) && small_integer(&e2e.answers) {
        let (text, _) = table.linearize(budget);
        if ctx.ask(Module::Contradiction, Some(&text))? == Verdict::Yes {
            return pick(Source::E2e, "contradiction");
        }
    }
    match ctx.ask(Module::Comparison, None)? {
        Verdict::PickSql | Verdict::Yes => pick(Source::Text2Sql, "comparison"),
        Verdict::PickE2e | Verdict::No => pick(Source::E2e, "comparison"),
    }
}

/// [`route`], falling back to the confidence selector when the backend is
/// unavailable.
pub fn route_or_fallback(
    instance: &QaInstance,
    table: &TableData,
    sql: &ModelPrediction,
    e2e: &ModelPrediction,
    backend: &dyn JudgeBackend,
    templates: &TemplateSet,
    budget: usize,
) -> Result<SelectorDecision, RouterError> {
    match route(instance, table, sql, e2e, backend, templates, budget) {
        Err(RouterError::BackendUnavailable(msg)) => {
            log::warn!("{}: {msg}; using confidence selection", instance.id);
            let mut d = select_by_confidence(sql, e2e);
            d.rationale_tag = "fallback_confidence".into();
            Ok(d)
        }
        other => other,
    }
}
