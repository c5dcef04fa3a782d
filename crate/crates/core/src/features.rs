//! Selector features for one (question, table, SQL answer, E2E answer) tuple.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::sql::count_preprocessed_columns;
use crate::table::{parse_number, ModelPrediction, QaInstance, Source, TableData};
use crate::text::{normalize, normalize_answer, tokenize};

/// Question-word vocabulary in one-hot slot order.
pub const QUESTION_WORDS: [&str; 8] = ["what", "which", "who", "when", "where", "how", "name", "other"];

/// Names of the encoded slots, in order.
pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "qw_what",
    "qw_which",
    "qw_who",
    "qw_when",
    "qw_where",
    "qw_how",
    "qw_name",
    "qw_other",
    "question_len",
    "n_numbers_in_q",
    "n_rows",
    "n_cols",
    "header_overlap",
    "truncated",
    "sql_confidence",
    "n_preproc_cols",
    "exec_ok",
    "n_sql_answers",
    "sql_answer_dtype",
    "e2e_confidence",
    "n_e2e_answers",
    "e2e_answer_dtype",
    "e2e_substr_of_sql",
    "e2e_substr_of_input",
];

pub const FEATURE_DIM: usize = 24;

/// How many leading tokens are scanned for an interrogative.
const QUESTION_WORD_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AnswerDtype {
    Empty,
    Num,
    Str,
    Mixed,
}

impl AnswerDtype {
    pub fn of(answers: &[String]) -> Self {
        if answers.is_empty() {
            return AnswerDtype::Empty;
        }
        let numeric = answers.iter().filter(|a| parse_number(a.trim()).is_some()).count();
        if numeric == answers.len() {
            AnswerDtype::Num
        } else if numeric == 0 {
            AnswerDtype::Str
        } else {
            AnswerDtype::Mixed
        }
    }

    pub fn ordinal(self) -> f64 {
        match self {
            AnswerDtype::Empty => 0.0,
            AnswerDtype::Num => 1.0,
            AnswerDtype::Str => 2.0,
            AnswerDtype::Mixed => 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Index into [`QUESTION_WORDS`].
    pub question_word: usize,
    pub question_len: usize,
    pub n_numbers_in_q: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub header_overlap: usize,
    pub truncated: bool,
    pub sql_confidence: f64,
    pub n_preproc_cols: usize,
    pub exec_ok: bool,
    pub n_sql_answers: usize,
    pub sql_answer_dtype: AnswerDtype,
    pub e2e_confidence: f64,
    pub n_e2e_answers: usize,
    pub e2e_answer_dtype: AnswerDtype,
    pub e2e_substr_of_sql: bool,
    pub e2e_substr_of_input: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("prediction `{prediction}` does not belong to instance `{instance}`")]
    MismatchedIds { instance: String, prediction: String },
    #[error("prediction for `{0}` has the wrong source")]
    WrongSource(String),
}

static NUMBER_TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(\d+(\.\d+)?|\d{1,3}(,\d{3})+(\.\d+)?|\d+(st|nd|rd|th))$").unwrap()
});

/// Index of the question word per the first-three-tokens rule.
pub fn question_word(tokens: &[String]) -> usize {
    let other = QUESTION_WORDS.len() - 1;
    for tok in tokens.iter().take(QUESTION_WORD_WINDOW) {
        if let Some(i) = QUESTION_WORDS[..6].iter().position(|w| w == tok) {
            return i;
        }
    }
    match tokens.first() {
        Some(t) if t == "name" => 6,
        _ => other,
    }
}

/// Tokens that are integers, decimals, grouped numbers, or ordinals.
pub fn count_numbers(tokens: &[String]) -> usize {
    tokens.iter().filter(|t| NUMBER_TOKEN.is_match(t)).count()
}

/// Distinct question tokens that also occur in the header.
pub fn header_overlap(tokens: &[String], header: &[String]) -> usize {
    let header_tokens: HashSet<String> = header.iter().flat_map(|h| tokenize(h)).collect();
    tokens
        .iter()
        .filter(|t| header_tokens.contains(*t))
        .collect::<HashSet<_>>()
        .len()
}

fn joined(answers: &[String]) -> String {
    answers.iter().map(|a| normalize_answer(a)).collect::<Vec<_>>().join(" ")
}

fn check(instance: &QaInstance, pred: &ModelPrediction, source: Source) -> Result<(), FeatureError> {
    if pred.instance_id != instance.id {
        return Err(FeatureError::MismatchedIds {
            instance: instance.id.clone(),
            prediction: pred.instance_id.clone(),
        });
    }
    if pred.source != source {
        return Err(FeatureError::WrongSource(pred.instance_id.clone()));
    }
    Ok(())
}

/// Builds the feature vector. The model input for the substring feature is
/// the question followed by the table linearized under `budget`.
pub fn extract_features(
    instance: &QaInstance,
    table: &TableData,
    sql_pred: &ModelPrediction,
    e2e_pred: &ModelPrediction,
    budget: usize,
) -> Result<FeatureVector, FeatureError> {
    check(instance, sql_pred, Source::Text2Sql)?;
    check(instance, e2e_pred, Source::E2e)?;
    let tokens = &instance.question_tokens;
    let (linear, truncated) = table.linearize(budget);
    let exec_ok = sql_pred.executed();
    let empty = Vec::new();
    let sql_answers = if exec_ok { &sql_pred.answers } else { &empty };
    let e2e_answers = &e2e_pred.answers;

    let sql_joined = joined(sql_answers);
    let e2e_joined = joined(e2e_answers);
    let input = normalize(&format!("{} {}", instance.question, linear));
    let e2e_substr_of_sql = !e2e_answers.is_empty() && !sql_answers.is_empty() && sql_joined.contains(&e2e_joined);
    let e2e_substr_of_input = !e2e_answers.is_empty()
        && e2e_answers.iter().all(|a| {
            let a = normalize_answer(a);
            !a.is_empty() && input.contains(&a)
        });

    Ok(FeatureVector {
        question_word: question_word(tokens),
        question_len: tokens.len(),
        n_numbers_in_q: count_numbers(tokens),
        n_rows: table.n_rows(),
        n_cols: table.n_cols(),
        header_overlap: header_overlap(tokens, &table.header),
        truncated,
        sql_confidence: sql_pred.confidence(),
        n_preproc_cols: sql_pred.sql_text.as_deref().map_or(0, count_preprocessed_columns),
        exec_ok,
        n_sql_answers: sql_answers.len(),
        sql_answer_dtype: AnswerDtype::of(sql_answers),
        e2e_confidence: e2e_pred.confidence(),
        n_e2e_answers: e2e_answers.len(),
        e2e_answer_dtype: AnswerDtype::of(e2e_answers),
        e2e_substr_of_sql,
        e2e_substr_of_input,
    })
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl FeatureVector {
    /// Fixed-order numeric encoding; see [`FEATURE_NAMES`].
    pub fn encode(&self) -> Vec<f64> {
        let mut v = vec![0.0; FEATURE_DIM];
        v[self.question_word] = 1.0;
        let rest = [
            self.question_len as f64,
            self.n_numbers_in_q as f64,
            self.n_rows as f64,
            self.n_cols as f64,
            self.header_overlap as f64,
            flag(self.truncated),
            self.sql_confidence,
            self.n_preproc_cols as f64,
            flag(self.exec_ok),
            self.n_sql_answers as f64,
            self.sql_answer_dtype.ordinal(),
            self.e2e_confidence,
            self.n_e2e_answers as f64,
            self.e2e_answer_dtype.ordinal(),
            flag(self.e2e_substr_of_sql),
            flag(self.e2e_substr_of_input),
        ];
        v[QUESTION_WORDS.len()..].copy_from_slice(&rest);
        v
    }
}
