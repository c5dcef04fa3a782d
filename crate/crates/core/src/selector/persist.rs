use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ForestModel, KnnModel, Label, LogisticModel, SelectorError, TrainingSet};

pub const MODEL_FORMAT: &str = "tqa-selector";
pub const MODEL_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectorModel {
    Forest(ForestModel),
    Logistic(LogisticModel),
    Knn(KnnModel),
}

impl SelectorModel {
    pub fn dim(&self) -> usize {
        match self {
            SelectorModel::Forest(m) => m.dim,
            SelectorModel::Logistic(m) => m.weights.len(),
            SelectorModel::Knn(m) => m.dim(),
        }
    }

    /// Label and SQL_CORRECT score.
    pub fn predict(&self, v: &[f64]) -> Result<(Label, f64), SelectorError> {
        match self {
            SelectorModel::Forest(m) => m.predict(v),
            SelectorModel::Logistic(m) => m.predict(v),
            SelectorModel::Knn(m) => m.predict(v),
        }
    }

    pub fn accuracy(&self, data: &TrainingSet) -> Result<f64, SelectorError> {
        let mut ok = 0;
        for (v, l) in data.vectors.iter().zip(&data.labels) {
            if self.predict(v)?.0 == *l {
                ok += 1;
            }
        }
        Ok(crate::metrics::ratio(ok, data.len()))
    }

    /// The serialized model file contents.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Envelope<'a> {
            format: &'a str,
            version: u64,
            dim: usize,
            model: &'a SelectorModel,
        }
        let env = Envelope {
            format: MODEL_FORMAT,
            version: MODEL_VERSION,
            dim: self.dim(),
            model: self,
        };
        let mut s = serde_json::to_string(&env).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SelectorError> {
        let value: Value = serde_json::from_str(text).map_err(|e| SelectorError::Format(e.to_string()))?;
        if value.get("format").and_then(Value::as_str) != Some(MODEL_FORMAT) {
            return Err(SelectorError::Format(format!("missing `format: {MODEL_FORMAT}` tag")));
        }
        let version = value
            .get("version")
            .and_then(Value::as_u64)
            .ok_or_else(|| SelectorError::Format("missing version".into()))?;
        if version != MODEL_VERSION {
            return Err(SelectorError::VersionMismatch {
                found: version,
                expected: MODEL_VERSION,
            });
        }
        let model = value
            .get("model")
            .cloned()
            .ok_or_else(|| SelectorError::Format("missing model".into()))?;
        serde_json::from_value(model).map_err(|e| SelectorError::Format(e.to_string()))
    }
}

pub fn save_model(model: &SelectorModel, path: &Path) -> Result<(), SelectorError> {
    fs::write(path, model.to_json()).map_err(|source| SelectorError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<SelectorModel, SelectorError> {
    let text = fs::read_to_string(path).map_err(|source| SelectorError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SelectorModel::from_json(&text)
}
