use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{TableData, TableError};
use crate::text::tokenize;

/// Perturbation families of the robustness benchmark, plus their mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    SynonymReplacement,
    AbbreviationReplacement,
    ColumnExtension,
    ColumnAdding,
    WordParaphrase,
    SentenceParaphrase,
    Mix,
}

impl Perturbation {
    pub const ALL: [Perturbation; 7] = [
        Perturbation::SynonymReplacement,
        Perturbation::AbbreviationReplacement,
        Perturbation::ColumnExtension,
        Perturbation::ColumnAdding,
        Perturbation::WordParaphrase,
        Perturbation::SentenceParaphrase,
        Perturbation::Mix,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Perturbation::SynonymReplacement => "synonym_replacement",
            Perturbation::AbbreviationReplacement => "abbreviation_replacement",
            Perturbation::ColumnExtension => "column_extension",
            Perturbation::ColumnAdding => "column_adding",
            Perturbation::WordParaphrase => "word_paraphrase",
            Perturbation::SentenceParaphrase => "sentence_paraphrase",
            Perturbation::Mix => "mix",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == tag)
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One question over one table with its gold answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaInstance {
    pub id: String,
    pub question: String,
    pub question_tokens: Vec<String>,
    pub table_id: String,
    pub gold_answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_sql: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation_tag: Option<Perturbation>,
    #[serde(default = "default_split")]
    pub split: String,
}

fn default_split() -> String {
    "test".to_string()
}

impl QaInstance {
    pub fn new(
        id: impl Into<String>,
        question: impl Into<String>,
        table_id: impl Into<String>,
        gold_answers: Vec<String>,
    ) -> Self {
        let question = question.into();
        QaInstance {
            id: id.into(),
            question_tokens: tokenize(&question),
            question,
            table_id: table_id.into(),
            gold_answers,
            gold_sql: None,
            perturbation_tag: None,
            split: default_split(),
        }
    }

    fn from_record(line: usize, value: Value) -> Result<Self, TableError> {
        let obj = value.as_object().ok_or(TableError::InvalidRecord {
            line,
            message: "expected a JSON object".into(),
        })?;
        let str_field = |name: &str| -> Result<Option<String>, TableError> {
            match obj.get(name) {
                None | Some(Value::Null) => Ok(None),
                Some(Value::String(s)) => Ok(Some(s.clone())),
                Some(_) => Err(TableError::InvalidRecord {
                    line,
                    message: format!("field `{name}` must be a string"),
                }),
            }
        };
        let list_field = |name: &str| -> Result<Option<Vec<String>>, TableError> {
            match obj.get(name) {
                None | Some(Value::Null) => Ok(None),
                Some(v) => serde_json::from_value::<Vec<Value>>(v.clone())
                    .map_err(|_| TableError::InvalidRecord {
                        line,
                        message: format!("field `{name}` must be a list"),
                    })
                    .map(|items| {
                        Some(
                            items
                                .into_iter()
                                .map(|item| match item {
                                    Value::String(s) => s,
                                    other => other.to_string(),
                                })
                                .collect(),
                        )
                    }),
            }
        };
        let missing = |field: &str| TableError::MissingField {
            line,
            field: field.to_string(),
        };

        let id = str_field("id")?.ok_or_else(|| missing("id"))?;
        let table_id = str_field("table_id")?.ok_or_else(|| missing("table_id"))?;
        let (question, question_tokens) = match (str_field("question")?, list_field("question_tokens")?) {
            (Some(q), Some(tokens)) => (q, tokens),
            (Some(q), None) => {
                let tokens = tokenize(&q);
                (q, tokens)
            }
            (None, Some(tokens)) => (tokens.join(" "), tokens),
            (None, None) => return Err(missing("question")),
        };
        if question_tokens.is_empty() {
            return Err(missing("question"));
        }
        let gold_answers = list_field("gold_answers")?
            .filter(|g| !g.is_empty())
            .ok_or_else(|| missing("gold_answers"))?;
        let perturbation_tag = match str_field("perturbation_tag")? {
            None => None,
            Some(tag) => Some(Perturbation::from_tag(&tag).ok_or(TableError::InvalidRecord {
                line,
                message: format!("unknown perturbation tag `{tag}`"),
            })?),
        };
        Ok(QaInstance {
            id,
            question,
            question_tokens,
            table_id,
            gold_answers,
            gold_sql: str_field("gold_sql")?,
            perturbation_tag,
            split: str_field("split")?.unwrap_or_else(default_split),
        })
    }
}

/// Which base model produced a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "TEXT2SQL")]
    Text2Sql,
    #[serde(rename = "E2E")]
    E2e,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Text2Sql => "TEXT2SQL",
            Source::E2e => "E2E",
        })
    }
}

/// A base model's answer for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPrediction {
    pub instance_id: String,
    pub source: Source,
    pub answers: Vec<String>,
    pub seq_logprob: f64,
    pub n_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sql_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exec_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_confidences: Option<Vec<f64>>,
}

impl ModelPrediction {
    /// Length-normalized generation probability, `exp(logprob / n_tokens)`.
    pub fn confidence(&self) -> f64 {
        (self.seq_logprob / f64::from(self.n_tokens.max(1))).exp()
    }

    /// Execution status; predictions without an explicit flag are assumed
    /// to have executed.
    pub fn executed(&self) -> bool {
        self.exec_ok.unwrap_or(true)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_tokens == 0 {
            return Err("n_tokens must be at least 1".into());
        }
        if !self.seq_logprob.is_finite() || self.seq_logprob > 0.0 {
            return Err(format!("seq_logprob {} must be finite and <= 0", self.seq_logprob));
        }
        match (self.source, &self.sql_text) {
            (Source::Text2Sql, None) => return Err("TEXT2SQL prediction without sql_text".into()),
            (Source::E2e, Some(_)) => return Err("E2E prediction carries sql_text".into()),
            _ => {}
        }
        if let (Some(c), Some(conf)) = (&self.candidates, &self.candidate_confidences) {
            if c.len() != conf.len() {
                return Err("candidate_confidences length differs from candidates".into());
            }
        }
        Ok(())
    }
}

fn read_lines(path: &Path) -> Result<Vec<(usize, Value)>, TableError> {
    let text = fs::read_to_string(path).map_err(|e| TableError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line).map_err(|e| TableError::InvalidRecord {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, value));
    }
    Ok(out)
}

/// Parses line-delimited instance records, checking ids and table references.
pub fn parse_instances(
    text: &str,
    tables: &BTreeMap<String, TableData>,
) -> Result<Vec<QaInstance>, TableError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line).map_err(|e| TableError::InvalidRecord {
            line: i + 1,
            message: e.to_string(),
        })?;
        let inst = QaInstance::from_record(i + 1, value)?;
        if !tables.contains_key(&inst.table_id) {
            return Err(TableError::UnknownTable {
                instance: inst.id,
                table: inst.table_id,
            });
        }
        if !seen.insert(inst.id.clone()) {
            return Err(TableError::DuplicateId(inst.id));
        }
        out.push(inst);
    }
    Ok(out)
}

pub fn load_instances(
    path: &Path,
    tables: &BTreeMap<String, TableData>,
) -> Result<Vec<QaInstance>, TableError> {
    let text = fs::read_to_string(path).map_err(|e| TableError::io(path, e))?;
    parse_instances(&text, tables)
}

pub fn load_predictions(path: &Path) -> Result<Vec<ModelPrediction>, TableError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, value) in read_lines(path)? {
        let pred: ModelPrediction =
            serde_json::from_value(value).map_err(|e| TableError::InvalidRecord {
                line,
                message: e.to_string(),
            })?;
        pred.validate()
            .map_err(|message| TableError::InvalidRecord { line, message })?;
        if !seen.insert(pred.instance_id.clone()) {
            return Err(TableError::DuplicateId(pred.instance_id));
        }
        out.push(pred);
    }
    Ok(out)
}

/// Writes any serializable records one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), TableError> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| TableError::io(path, e))
}

/// Indexes predictions by instance id.
pub fn by_instance(preds: Vec<ModelPrediction>) -> HashMap<String, ModelPrediction> {
    preds.into_iter().map(|p| (p.instance_id.clone(), p)).collect()
}

/// Counts reported after ingesting a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub tables: usize,
    pub instances: usize,
    pub with_gold_sql: usize,
    pub per_split: BTreeMap<String, usize>,
    pub per_perturbation: BTreeMap<String, usize>,
}

impl IngestSummary {
    pub fn new(tables: &BTreeMap<String, TableData>, instances: &[QaInstance]) -> Self {
        let mut per_split = BTreeMap::new();
        let mut per_perturbation = BTreeMap::new();
        for inst in instances {
            *per_split.entry(inst.split.clone()).or_insert(0) += 1;
            if let Some(tag) = inst.perturbation_tag {
                *per_perturbation.entry(tag.to_string()).or_insert(0) += 1;
            }
        }
        IngestSummary {
            tables: tables.len(),
            instances: instances.len(),
            with_gold_sql: instances.iter().filter(|i| i.gold_sql.is_some()).count(),
            per_split,
            per_perturbation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tables() -> BTreeMap<String, TableData> {
        let t = TableData::from_csv_str("t1", "year,name\n2001,Alice\n").unwrap();
        BTreeMap::from([(t.id.clone(), t)])
    }

    #[test]
    fn question_is_tokenized() {
        let insts = parse_instances(
            r#"{"id":"q1","question":"who won?","table_id":"t1","gold_answers":["Alice"]}"#,
            &tables(),
        )
        .unwrap();
        assert_eq!(insts[0].question_tokens, vec!["who", "won"]);
        assert_eq!(insts[0].split, "test");
    }

    #[test]
    fn missing_gold_answers() {
        let err = parse_instances(r#"{"id":"q1","question":"who won?","table_id":"t1"}"#, &tables())
            .unwrap_err();
        assert!(matches!(err, TableError::MissingField { ref field, .. } if field == "gold_answers"));
        let err = parse_instances(
            r#"{"id":"q1","question":"who?","table_id":"t1","gold_answers":[]}"#,
            &tables(),
        )
        .unwrap_err();
        assert!(matches!(err, TableError::MissingField { .. }));
    }

    #[test]
    fn unknown_table_and_duplicate_id() {
        let err = parse_instances(
            r#"{"id":"q1","question":"x","table_id":"nope","gold_answers":["a"]}"#,
            &tables(),
        )
        .unwrap_err();
        assert!(matches!(err, TableError::UnknownTable { .. }));
        let line = r#"{"id":"q1","question":"x","table_id":"t1","gold_answers":["a"]}"#;
        let err = parse_instances(&format!("{line}\n{line}\n"), &tables()).unwrap_err();
        assert!(matches!(err, TableError::DuplicateId(ref id) if id == "q1"));
    }

    #[test]
    fn perturbation_tags_are_checked() {
        let ok = r#"{"id":"q1","question":"x","table_id":"t1","gold_answers":["a"],"perturbation_tag":"column_adding"}"#;
        let insts = parse_instances(ok, &tables()).unwrap();
        assert_eq!(insts[0].perturbation_tag, Some(Perturbation::ColumnAdding));
        let bad = r#"{"id":"q1","question":"x","table_id":"t1","gold_answers":["a"],"perturbation_tag":"typo"}"#;
        assert!(matches!(
            parse_instances(bad, &tables()),
            Err(TableError::InvalidRecord { .. })
        ));
    }

    #[test]
    fn numeric_gold_answers_become_strings() {
        let insts = parse_instances(
            r#"{"id":"q1","question":"how many","table_id":"t1","gold_answers":[3]}"#,
            &tables(),
        )
        .unwrap();
        assert_eq!(insts[0].gold_answers, vec!["3"]);
    }

    #[test]
    fn confidence_is_length_normalized() {
        let p = ModelPrediction {
            instance_id: "q".into(),
            source: Source::E2e,
            answers: vec![],
            seq_logprob: 4.0 * 0.5f64.ln(),
            n_tokens: 4,
            sql_text: None,
            exec_ok: None,
            candidates: None,
            candidate_confidences: None,
        };
        assert!((p.confidence() - 0.5).abs() < 1e-12);
        assert!(p.validate().is_ok());
        let bad = ModelPrediction { sql_text: Some("SELECT 1".into()), ..p.clone() };
        assert!(bad.validate().is_err());
        let bad = ModelPrediction { n_tokens: 0, ..p };
        assert!(bad.validate().is_err());
    }
}
