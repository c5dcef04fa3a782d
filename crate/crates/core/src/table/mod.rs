//! Typed tables, questions, model predictions, and their file formats.

mod cell;
mod data;
mod instance;

use std::path::Path;

pub use cell::{leading_number, parse_number, CellValue};
pub use data::{load_tables, write_tables, ColumnType, TableData, DEFAULT_BUDGET, NUMERIC_COLUMN_SHARE};
pub use instance::{
    by_instance, load_instances, load_predictions, parse_instances, write_jsonl, IngestSummary,
    ModelPrediction, Perturbation, QaInstance, Source,
};

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("table `{0}` has no header line")]
    MissingHeader(String),
    #[error("table `{table}` row {row}: expected {expected} cells, found {found}")]
    MalformedTable {
        table: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("table `{table}` has duplicate column `{column}`")]
    DuplicateColumn { table: String, column: String },
    #[error("table `{0}`: {1}")]
    Csv(String, String),
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: String },
    #[error("line {line}: {message}")]
    InvalidRecord { line: usize, message: String },
    #[error("instance `{instance}` references unknown table `{table}`")]
    UnknownTable { instance: String, table: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
}

impl TableError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        TableError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
