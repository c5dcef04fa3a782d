//! Single-table SQL subset: parsing, printing, and execution.

mod ast;
mod exec;
mod parser;

pub use ast::*;
pub use exec::{compare_cell, execute, like_match, predicate_holds, ExecError};
pub use parser::{parse_sql, ParseError};

use crate::table::{CellValue, TableData};

/// Column-name suffixes marking preprocessed columns in annotated queries.
pub const PREPROCESSED_SUFFIXES: [&str; 3] = ["_parsed", "_first", "_list"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SqlError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// Parses and executes `text` in one step.
pub fn run_sql(text: &str, table: &TableData) -> Result<Vec<CellValue>, SqlError> {
    let query = parse_sql(text)?;
    Ok(execute(&query, table)?)
}

/// Counts identifier occurrences carrying a preprocessed-column suffix.
/// Every occurrence counts, including repeats of the same column; text
/// inside single-quoted literals is skipped.
pub fn count_preprocessed_columns(sql_text: &str) -> usize {
    let mut count = 0;
    let mut in_string = false;
    let mut word = String::new();
    let mut flush = |word: &mut String| {
        let lower = word.to_ascii_lowercase();
        if PREPROCESSED_SUFFIXES.iter().any(|s| lower.ends_with(s) && lower.len() > s.len()) {
            count += 1;
        }
        word.clear();
    };
    for c in sql_text.chars() {
        if in_string {
            if c == '\'' {
                in_string = false;
            }
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            word.push(c);
        } else {
            flush(&mut word);
            if c == '\'' {
                in_string = true;
            }
        }
    }
    flush(&mut word);
    count
}
