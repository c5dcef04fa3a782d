use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::SelectorError;
use crate::features::extract_features;
use crate::metrics::prediction_correct;
use crate::table::{ModelPrediction, QaInstance, TableData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    SqlCorrect,
    E2eCorrect,
}

impl Label {
    pub fn index(self) -> usize {
        match self {
            Label::SqlCorrect => 0,
            Label::E2eCorrect => 1,
        }
    }

    /// SQL wins ties.
    pub fn from_score(sql_score: f64) -> Self {
        if sql_score >= 0.5 {
            Label::SqlCorrect
        } else {
            Label::E2eCorrect
        }
    }
}

/// Label of an instance solved by exactly one side, `None` otherwise.
pub fn exclusive_label(gold: &[String], sql: &ModelPrediction, e2e: &ModelPrediction) -> Option<Label> {
    match (prediction_correct(sql, gold), prediction_correct(e2e, gold)) {
        (true, false) => Some(Label::SqlCorrect),
        (false, true) => Some(Label::E2eCorrect),
        _ => None,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub vectors: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub instance_ids: Vec<String>,
}

impl TrainingSet {
    pub fn new(vectors: Vec<Vec<f64>>, labels: Vec<Label>, instance_ids: Vec<String>) -> Result<Self, SelectorError> {
        if vectors.len() != labels.len() || vectors.len() != instance_ids.len() {
            return Err(SelectorError::DegenerateData(format!(
                "{} vectors, {} labels, {} ids",
                vectors.len(),
                labels.len(),
                instance_ids.len()
            )));
        }
        if let Some(d) = vectors.first().map(Vec::len) {
            if let Some(bad) = vectors.iter().find(|v| v.len() != d) {
                return Err(SelectorError::DimensionMismatch {
                    expected: d,
                    found: bad.len(),
                });
            }
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(SelectorError::DegenerateData("non-finite feature value".into()));
        }
        Ok(TrainingSet {
            vectors,
            labels,
            instance_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut c = [0; 2];
        for l in &self.labels {
            c[l.index()] += 1;
        }
        c
    }

    /// Fails unless both classes have at least `min_per_class` samples.
    pub fn require_classes(&self, min_per_class: usize) -> Result<(), SelectorError> {
        let [sql, e2e] = self.class_counts();
        if sql < min_per_class || e2e < min_per_class {
            return Err(SelectorError::DegenerateData(format!(
                "need {min_per_class} samples per class, have {sql} SQL_CORRECT and {e2e} E2E_CORRECT"
            )));
        }
        Ok(())
    }

    /// Appends another set, as when pooling several validation splits.
    pub fn extend(&mut self, other: TrainingSet) -> Result<(), SelectorError> {
        if !self.is_empty() && !other.is_empty() && other.dim() != self.dim() {
            return Err(SelectorError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        self.vectors.extend(other.vectors);
        self.labels.extend(other.labels);
        self.instance_ids.extend(other.instance_ids);
        Ok(())
    }
}

/// Featurizes the exclusive-disagreement instances. Instances lacking either
/// prediction are skipped.
pub fn build_training_set(
    instances: &[QaInstance],
    tables: &BTreeMap<String, TableData>,
    sql_preds: &HashMap<String, ModelPrediction>,
    e2e_preds: &HashMap<String, ModelPrediction>,
    budget: usize,
) -> Result<TrainingSet, SelectorError> {
    let mut set = TrainingSet::default();
    for inst in instances {
        let (Some(sql), Some(e2e)) = (sql_preds.get(&inst.id), e2e_preds.get(&inst.id)) else {
            log::debug!("{}: missing prediction, skipped", inst.id);
            continue;
        };
        let Some(label) = exclusive_label(&inst.gold_answers, sql, e2e) else {
            continue;
        };
        let table = tables.get(&inst.table_id).ok_or_else(|| SelectorError::MissingTable {
            instance: inst.id.clone(),
            table: inst.table_id.clone(),
        })?;
        let fv = extract_features(inst, table, sql, e2e, budget)?;
        set.vectors.push(fv.encode());
        set.labels.push(label);
        set.instance_ids.push(inst.id.clone());
    }
    Ok(set)
}
