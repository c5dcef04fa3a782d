//! Post-processing of predicted SQL before execution.
//!
//! Three passes run in order: misspelled column names are snapped to the
//! nearest header, text literals that match no cell are snapped to the
//! nearest cell value of their column, and numeric comparisons or sums over
//! text-typed columns are retargeted to the leading-number view `NUM(col)`.
//! Distances are Levenshtein over normalized strings and a candidate is
//! accepted when its distance is at most `min(2, ceil(0.34 * len))`, with
//! `len` the candidate's normalized length.

use serde::{Deserialize, Serialize};

use crate::sql::{
    compare_cell, execute, like_match, parse_sql, AggArg, AggFunc, ColumnRef, Literal, ParseError,
    Predicate, SelectExpr, SqlQuery,
};
use crate::table::{parse_number, CellValue, ColumnType, ModelPrediction, TableData};
use crate::text::normalize;

/// Minimum share of non-empty cells with a leading number for type repair.
pub const MIN_NUMERIC_SHARE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EditKind {
    Column,
    Literal,
    Type,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairEdit {
    pub kind: EditKind,
    pub before: String,
    pub after: String,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairReport {
    pub original_sql: String,
    pub repaired_sql: String,
    pub edits: Vec<RepairEdit>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RepairError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown column `{column}` (nearest header `{nearest}` at distance {distance})")]
    UnknownColumn {
        column: String,
        nearest: String,
        distance: usize,
    },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

/// Character-level Levenshtein distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        curr[0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            curr[j] = (prev[j] + 1).min(curr[j - 1] + 1).min(prev[j - 1] + cost);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Largest accepted distance when snapping to a target of `len` characters.
pub fn acceptance_threshold(len: usize) -> usize {
    2.min((34 * len).div_ceil(100))
}

/// Nearest candidate by normalized Levenshtein distance; the first
/// candidate wins ties. Returns `(index, distance)`.
pub fn nearest<'a>(needle: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<(usize, usize)> {
    let needle = normalize(needle);
    let mut best: Option<(usize, usize)> = None;
    for (i, cand) in candidates.into_iter().enumerate() {
        let d = levenshtein(&needle, &normalize(cand));
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best
}

fn within_threshold(candidate: &str, distance: usize) -> bool {
    distance <= acceptance_threshold(normalize(candidate).chars().count())
}

/// Replaces unknown column names by the nearest header within threshold.
pub fn repair_columns(
    query: &SqlQuery,
    table: &TableData,
) -> Result<(SqlQuery, Vec<RepairEdit>), RepairError> {
    let mut out = query.clone();
    let mut edits = Vec::new();
    let mut failure = None;
    out.visit_columns_mut(|col| {
        if failure.is_some() || table.column_index(&col.name).is_some() {
            return;
        }
        let Some((idx, distance)) = nearest(&col.name, table.header.iter().map(String::as_str)) else {
            failure = Some(RepairError::UnknownColumn {
                column: col.name.clone(),
                nearest: String::new(),
                distance: usize::MAX,
            });
            return;
        };
        let header = &table.header[idx];
        if within_threshold(header, distance) {
            edits.push(RepairEdit {
                kind: EditKind::Column,
                before: col.name.clone(),
                after: header.clone(),
                distance,
            });
            col.name = header.clone();
        } else {
            failure = Some(RepairError::UnknownColumn {
                column: col.name.clone(),
                nearest: header.clone(),
                distance,
            });
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok((out, edits)),
    }
}

fn distinct_values(table: &TableData, j: usize) -> Vec<&CellValue> {
    let mut seen = std::collections::HashSet::new();
    table
        .column(j)
        .filter(|c| !c.is_empty())
        .filter(|c| seen.insert(c.text_key()))
        .collect()
}

fn snap_text(value: &str, cells: &[&CellValue]) -> Option<(String, usize)> {
    let keys: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
    let (idx, distance) = nearest(value, keys.iter().map(String::as_str))?;
    within_threshold(&keys[idx], distance).then(|| (keys[idx].clone(), distance))
}

/// Snaps text literals that match no cell of their column to the nearest
/// cell value. Numeric literals and unmatched literals are left alone.
pub fn repair_literals(query: &SqlQuery, table: &TableData) -> (SqlQuery, Vec<RepairEdit>) {
    let mut out = query.clone();
    let mut edits = Vec::new();
    for cond in &mut out.conditions {
        if cond.column.numeric {
            continue;
        }
        let Some(j) = table.column_index(&cond.column.name) else {
            continue;
        };
        let cells = distinct_values(table, j);
        let present = |lit: &Literal| {
            cells
                .iter()
                .any(|c| compare_cell(c, lit) == Some(std::cmp::Ordering::Equal))
        };
        let mut fix = |lit: &mut Literal| {
            let Literal::Text(s) = lit else { return };
            if parse_number(s).is_some() || present(lit) {
                return;
            }
            let Literal::Text(s) = lit else { return };
            if let Some((after, distance)) = snap_text(s, &cells) {
                edits.push(RepairEdit {
                    kind: EditKind::Literal,
                    before: s.clone(),
                    after: after.clone(),
                    distance,
                });
                *lit = Literal::Text(after);
            }
        };
        match &mut cond.predicate {
            Predicate::Compare(crate::sql::CmpOp::Eq, lit) => fix(lit),
            Predicate::In(list) => list.iter_mut().for_each(&mut fix),
            Predicate::Like(pattern) => {
                if cells.iter().any(|c| like_match(&c.to_string(), pattern)) {
                    continue;
                }
                let core = pattern.trim_matches('%');
                if core.is_empty() || core.contains('%') {
                    continue;
                }
                if let Some((after, distance)) = snap_text(core, &cells) {
                    let lead = if pattern.starts_with('%') { "%" } else { "" };
                    let trail = if pattern.ends_with('%') { "%" } else { "" };
                    edits.push(RepairEdit {
                        kind: EditKind::Literal,
                        before: core.to_string(),
                        after: after.clone(),
                        distance,
                    });
                    *pattern = format!("{lead}{after}{trail}");
                }
            }
            Predicate::Compare(..) => {}
        }
    }
    (out, edits)
}

fn numeric_share(table: &TableData, j: usize) -> Option<f64> {
    let non_empty: Vec<&CellValue> = table.column(j).filter(|c| !c.is_empty()).collect();
    if non_empty.is_empty() {
        return None;
    }
    let numeric = non_empty.iter().filter(|c| c.leading_number().is_some()).count();
    Some(numeric as f64 / non_empty.len() as f64)
}

fn retarget(col: &mut ColumnRef, table: &TableData, edits: &mut Vec<RepairEdit>) -> Result<(), RepairError> {
    if col.numeric {
        return Ok(());
    }
    let Some(j) = table.column_index(&col.name) else {
        return Ok(());
    };
    if table.column_types[j] != ColumnType::Text {
        return Ok(());
    }
    match numeric_share(table, j) {
        None => Ok(()),
        Some(share) if share >= MIN_NUMERIC_SHARE => {
            let before = col.to_string();
            col.numeric = true;
            edits.push(RepairEdit {
                kind: EditKind::Type,
                before,
                after: col.to_string(),
                distance: 0,
            });
            Ok(())
        }
        Some(share) => Err(RepairError::TypeMismatch(format!(
            "column `{}` is text ({:.0}% numeric cells)",
            col.name,
            share * 100.0
        ))),
    }
}

fn retarget_sums(expr: &mut SelectExpr, table: &TableData, edits: &mut Vec<RepairEdit>) -> Result<(), RepairError> {
    match expr {
        SelectExpr::Agg {
            func: AggFunc::Sum | AggFunc::Avg,
            arg: AggArg::Column(col),
        } => retarget(col, table, edits),
        SelectExpr::Arith { left, right, .. } => {
            retarget_sums(left, table, edits)?;
            retarget_sums(right, table, edits)
        }
        _ => Ok(()),
    }
}

/// Rewrites numeric comparisons and SUM/AVG over text-typed columns to read
/// the column's leading numbers.
pub fn repair_types(
    query: &SqlQuery,
    table: &TableData,
) -> Result<(SqlQuery, Vec<RepairEdit>), RepairError> {
    let mut out = query.clone();
    let mut edits = Vec::new();
    for cond in &mut out.conditions {
        let numeric_literal = match &cond.predicate {
            Predicate::Compare(_, Literal::Number(_)) => true,
            Predicate::In(list) => list.iter().all(|l| matches!(l, Literal::Number(_))),
            _ => false,
        };
        if numeric_literal {
            retarget(&mut cond.column, table, &mut edits)?;
        }
    }
    for item in &mut out.select {
        retarget_sums(item, table, &mut edits)?;
    }
    if let Some(order) = &mut out.order_by {
        retarget_sums(&mut order.key, table, &mut edits)?;
    }
    Ok((out, edits))
}

fn run_passes(query: &SqlQuery, table: &TableData) -> Result<(SqlQuery, Vec<RepairEdit>), RepairError> {
    let (q, mut edits) = repair_columns(query, table)?;
    let (q, more) = repair_literals(&q, table);
    edits.extend(more);
    let (q, more) = repair_types(&q, table)?;
    edits.extend(more);
    Ok((q, edits))
}

/// Runs all repair passes over `sql_text`.
///
/// A query that executes before repair is never turned into one that fails:
/// if the repaired query (or a repair pass) fails where the original
/// succeeded, the original is returned unchanged.
pub fn repair_sql(sql_text: &str, table: &TableData) -> Result<RepairReport, RepairError> {
    let query = parse_sql(sql_text)?;
    let original_ok = execute(&query, table).is_ok();
    let identity = || RepairReport {
        original_sql: sql_text.to_string(),
        repaired_sql: sql_text.to_string(),
        edits: Vec::new(),
    };
    let (repaired, edits) = match run_passes(&query, table) {
        Ok(r) => r,
        Err(_) if original_ok => return Ok(identity()),
        Err(e) => return Err(e),
    };
    if edits.is_empty() || (original_ok && execute(&repaired, table).is_err()) {
        return Ok(identity());
    }
    Ok(RepairReport {
        original_sql: sql_text.to_string(),
        repaired_sql: repaired.to_string(),
        edits,
    })
}

/// Executes a Text-to-SQL prediction's query (optionally repaired first) and
/// returns the prediction with `answers` and `exec_ok` filled in.
pub fn execute_prediction(pred: &ModelPrediction, table: &TableData, repair: bool) -> ModelPrediction {
    let mut out = pred.clone();
    let Some(sql) = &pred.sql_text else {
        return out;
    };
    let text = if repair {
        repair_sql(sql, table).map(|r| r.repaired_sql).unwrap_or_else(|_| sql.clone())
    } else {
        sql.clone()
    };
    match crate::sql::run_sql(&text, table) {
        Ok(values) => {
            out.answers = values.iter().map(|v| v.to_string()).collect();
            out.exec_ok = Some(true);
        }
        Err(e) => {
            log::debug!("{}: execution failed: {e}", pred.instance_id);
            out.answers = Vec::new();
            out.exec_ok = Some(false);
        }
    }
    out
}
