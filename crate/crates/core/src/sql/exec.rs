use std::cmp::Ordering;

use super::ast::*;
use crate::table::{parse_number, CellValue, TableData};
use crate::text::normalize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("{0} over no values")]
    EmptyAggregate(String),
    #[error("division by zero")]
    DivideByZero,
    #[error("arithmetic produced a non-finite value")]
    NonFinite,
    #[error("cannot mix {0} with aggregates")]
    MixedAggregate(String),
}

/// A column reference bound to its table position.
#[derive(Debug, Clone, Copy)]
struct Bound {
    index: usize,
    numeric: bool,
}

impl Bound {
    fn read(&self, row: &[CellValue]) -> CellValue {
        let cell = &row[self.index];
        if self.numeric {
            cell.leading_number()
                .and_then(CellValue::number)
                .unwrap_or(CellValue::Empty)
        } else {
            cell.clone()
        }
    }
}

fn bind(table: &TableData, col: &ColumnRef) -> Result<Bound, ExecError> {
    table
        .column_index(&col.name)
        .map(|index| Bound {
            index,
            numeric: col.numeric,
        })
        .ok_or_else(|| ExecError::UnknownColumn(col.name.clone()))
}

/// Compares a cell with a literal: numerically when both sides are numbers,
/// otherwise as case-insensitive trimmed strings. `None` for empty cells.
pub fn compare_cell(cell: &CellValue, lit: &Literal) -> Option<Ordering> {
    let lit_num = match lit {
        Literal::Number(x) => Some(*x),
        Literal::Text(s) => parse_number(s),
    };
    match (cell, lit_num) {
        (CellValue::Empty, _) => None,
        (CellValue::Number(a), Some(b)) => a.partial_cmp(&b),
        _ => {
            let rhs = match lit {
                Literal::Number(x) => format!("{x}"),
                Literal::Text(s) => normalize(s),
            };
            Some(cell.text_key().cmp(&rhs))
        }
    }
}

/// Case-insensitive `%`-wildcard match on whitespace-normalized strings.
pub fn like_match(value: &str, pattern: &str) -> bool {
    let value = normalize(value);
    let pattern = normalize(pattern);
    let parts: Vec<&str> = pattern.split('%').collect();
    if parts.len() == 1 {
        return value == pattern;
    }
    let (first, last) = (parts[0], parts[parts.len() - 1]);
    if !value.starts_with(first) || value.len() < first.len() + last.len() {
        return false;
    }
    let mut rest = &value[first.len()..];
    for mid in &parts[1..parts.len() - 1] {
        match rest.find(mid) {
            Some(pos) => rest = &rest[pos + mid.len()..],
            None => return false,
        }
    }
    rest.ends_with(last)
}

pub fn predicate_holds(cell: &CellValue, predicate: &Predicate) -> bool {
    if cell.is_empty() {
        return false;
    }
    match predicate {
        Predicate::Compare(op, lit) => compare_cell(cell, lit).is_some_and(|o| op.holds(o)),
        Predicate::Like(p) => like_match(&cell.to_string(), p),
        Predicate::In(list) => list
            .iter()
            .any(|lit| compare_cell(cell, lit) == Some(Ordering::Equal)),
    }
}

enum Plan {
    Rows(Vec<Bound>),
    Scalar,
    Grouped(Bound),
}

/// Executes `query` against `table`, returning the result values flattened
/// in row order.
pub fn execute(query: &SqlQuery, table: &TableData) -> Result<Vec<CellValue>, ExecError> {
    // resolve every column up front so unknown names fail before evaluation
    for col in query.columns() {
        bind(table, &col)?;
    }

    let mut rows: Vec<&[CellValue]> = Vec::new();
    let conds: Vec<(Bound, &Predicate)> = query
        .conditions
        .iter()
        .map(|c| Ok((bind(table, &c.column)?, &c.predicate)))
        .collect::<Result<_, ExecError>>()?;
    for row in &table.rows {
        if conds.iter().all(|(b, p)| predicate_holds(&b.read(row), p)) {
            rows.push(row);
        }
    }

    let plan = if let Some(g) = &query.group_by {
        Plan::Grouped(bind(table, g)?)
    } else if query.select.iter().any(SelectExpr::is_scalar) {
        Plan::Scalar
    } else {
        Plan::Rows(
            query
                .select
                .iter()
                .map(|e| match e {
                    SelectExpr::Column(c) => bind(table, c),
                    _ => unreachable!(),
                })
                .collect::<Result<_, _>>()?,
        )
    };

    match plan {
        Plan::Rows(cols) => {
            if let Some(o) = &query.order_by {
                let SelectExpr::Column(c) = &o.key else {
                    return Err(ExecError::MixedAggregate("ORDER BY aggregate without GROUP BY".into()));
                };
                let key = bind(table, c)?;
                sort_stable(&mut rows, |r| key.read(r), o.descending);
            }
            let take = query.limit.map_or(rows.len(), |n| n as usize);
            Ok(rows
                .iter()
                .take(take)
                .flat_map(|r| cols.iter().map(move |b| b.read(r)))
                .collect())
        }
        Plan::Scalar => {
            if let Some(item) = query.select.iter().find(|e| !e.is_scalar()) {
                return Err(ExecError::MixedAggregate(format!("bare column {item}")));
            }
            if let Some(o) = &query.order_by {
                if !o.key.is_scalar() {
                    return Err(ExecError::MixedAggregate(format!("ORDER BY {}", o.key)));
                }
            }
            query
                .select
                .iter()
                .map(|e| eval_scalar(e, table, &rows))
                .collect()
        }
        Plan::Grouped(key) => {
            let mut groups: Vec<(CellValue, Vec<&[CellValue]>)> = Vec::new();
            for row in rows {
                let k = key.read(row);
                match groups
                    .iter_mut()
                    .find(|(g, _)| g.total_cmp(&k) == Ordering::Equal)
                {
                    Some((_, members)) => members.push(row),
                    None => groups.push((k, vec![row])),
                }
            }
            let group_col = query.group_by.as_ref().unwrap();
            let eval_item = |e: &SelectExpr, k: &CellValue, members: &[&[CellValue]]| match e {
                SelectExpr::Column(c) if c == group_col || bind(table, c).is_ok_and(|b| b.index == key.index && b.numeric == key.numeric) => {
                    Ok(k.clone())
                }
                SelectExpr::Column(c) => Err(ExecError::MixedAggregate(format!("column {c} outside GROUP BY"))),
                _ => eval_scalar(e, table, members),
            };
            let mut evaluated: Vec<(Vec<CellValue>, Option<CellValue>)> = Vec::new();
            for (k, members) in &groups {
                let values = query
                    .select
                    .iter()
                    .map(|e| eval_item(e, k, members))
                    .collect::<Result<Vec<_>, _>>()?;
                let order_key = match &query.order_by {
                    Some(o) => Some(eval_item(&o.key, k, members)?),
                    None => None,
                };
                evaluated.push((values, order_key));
            }
            if let Some(o) = &query.order_by {
                sort_stable(&mut evaluated, |(_, k)| k.clone().unwrap(), o.descending);
            }
            let take = query.limit.map_or(evaluated.len(), |n| n as usize);
            Ok(evaluated
                .into_iter()
                .take(take)
                .flat_map(|(v, _)| v)
                .collect())
        }
    }
}

fn sort_stable<T>(items: &mut [T], key: impl Fn(&T) -> CellValue, descending: bool) {
    items.sort_by(|a, b| {
        let ord = key(a).total_cmp(&key(b));
        if descending {
            ord.reverse()
        } else {
            ord
        }
    });
}

fn eval_scalar(
    expr: &SelectExpr,
    table: &TableData,
    rows: &[&[CellValue]],
) -> Result<CellValue, ExecError> {
    match expr {
        SelectExpr::Number(x) => Ok(CellValue::Number(*x)),
        SelectExpr::Column(c) => Err(ExecError::MixedAggregate(format!("bare column {c}"))),
        SelectExpr::Agg { func, arg } => {
            let values: Vec<CellValue> = match arg {
                AggArg::Star => {
                    return Ok(CellValue::Number(rows.len() as f64));
                }
                AggArg::Column(c) => {
                    let b = bind(table, c)?;
                    rows.iter().map(|r| b.read(r)).filter(|v| !v.is_empty()).collect()
                }
            };
            match func {
                AggFunc::Count => Ok(CellValue::Number(values.len() as f64)),
                AggFunc::Sum | AggFunc::Avg => {
                    let mut total = 0.0;
                    for v in &values {
                        match v {
                            CellValue::Number(x) => total += x,
                            _ => {
                                return Err(ExecError::TypeMismatch(format!(
                                    "{} over text value `{v}`",
                                    func.name()
                                )))
                            }
                        }
                    }
                    if values.is_empty() {
                        return Err(ExecError::EmptyAggregate(func.name().into()));
                    }
                    let out = if *func == AggFunc::Avg {
                        total / values.len() as f64
                    } else {
                        total
                    };
                    CellValue::number(out).ok_or(ExecError::NonFinite)
                }
                AggFunc::Min | AggFunc::Max => {
                    let mut best: Option<&CellValue> = None;
                    for v in &values {
                        let better = match best {
                            None => true,
                            Some(b) => {
                                let ord = v.total_cmp(b);
                                if *func == AggFunc::Min {
                                    ord == Ordering::Less
                                } else {
                                    ord == Ordering::Greater
                                }
                            }
                        };
                        if better {
                            best = Some(v);
                        }
                    }
                    best.cloned()
                        .ok_or_else(|| ExecError::EmptyAggregate(func.name().into()))
                }
            }
        }
        SelectExpr::Arith { left, op, right } => {
            let l = eval_scalar(left, table, rows)?;
            let r = eval_scalar(right, table, rows)?;
            let (CellValue::Number(a), CellValue::Number(b)) = (&l, &r) else {
                return Err(ExecError::TypeMismatch(format!(
                    "arithmetic on non-numeric values `{l}` and `{r}`"
                )));
            };
            let out = match op {
                ArithOp::Add => a + b,
                ArithOp::Sub => a - b,
                ArithOp::Mul => a * b,
                ArithOp::Div => {
                    if *b == 0.0 {
                        return Err(ExecError::DivideByZero);
                    }
                    a / b
                }
            };
            CellValue::number(out).ok_or(ExecError::NonFinite)
        }
    }
}
