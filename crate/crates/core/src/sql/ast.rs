use std::fmt;

use crate::table::CellValue;

/// A column reference. `numeric` marks `NUM(col)`: the column read through
/// leading-number extraction, as produced by type repair.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnRef {
    pub name: String,
    pub numeric: bool,
}

impl ColumnRef {
    pub fn new(name: impl Into<String>) -> Self {
        ColumnRef {
            name: name.into(),
            numeric: false,
        }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        ColumnRef {
            name: name.into(),
            numeric: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggFunc {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggFunc {
    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "COUNT" => Some(AggFunc::Count),
            "SUM" => Some(AggFunc::Sum),
            "AVG" => Some(AggFunc::Avg),
            "MIN" => Some(AggFunc::Min),
            "MAX" => Some(AggFunc::Max),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AggFunc::Count => "COUNT",
            AggFunc::Sum => "SUM",
            AggFunc::Avg => "AVG",
            AggFunc::Min => "MIN",
            AggFunc::Max => "MAX",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AggArg {
    Star,
    Column(ColumnRef),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

/// A select-list item. Arithmetic operands are always scalar: aggregates,
/// numbers, or nested arithmetic, never bare columns.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectExpr {
    Column(ColumnRef),
    Agg { func: AggFunc, arg: AggArg },
    Number(f64),
    Arith {
        left: Box<SelectExpr>,
        op: ArithOp,
        right: Box<SelectExpr>,
    },
}

impl SelectExpr {
    pub fn agg(func: AggFunc, column: &str) -> Self {
        SelectExpr::Agg {
            func,
            arg: AggArg::Column(ColumnRef::new(column)),
        }
    }

    pub fn count_star() -> Self {
        SelectExpr::Agg {
            func: AggFunc::Count,
            arg: AggArg::Star,
        }
    }

    pub fn arith(left: SelectExpr, op: ArithOp, right: SelectExpr) -> Self {
        SelectExpr::Arith {
            left: Box::new(left),
            op,
            right: Box::new(right),
        }
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, SelectExpr::Column(_))
    }

    pub(crate) fn visit_columns_mut(&mut self, f: &mut impl FnMut(&mut ColumnRef)) {
        match self {
            SelectExpr::Column(c) => f(c),
            SelectExpr::Agg {
                arg: AggArg::Column(c),
                ..
            } => f(c),
            SelectExpr::Arith { left, right, .. } => {
                left.visit_columns_mut(f);
                right.visit_columns_mut(f);
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Number(f64),
    Text(String),
}

impl Literal {
    pub fn to_cell(&self) -> CellValue {
        match self {
            Literal::Number(x) => CellValue::Number(*x),
            Literal::Text(s) => CellValue::text(s.clone()),
        }
    }

    pub fn from_cell(cell: &CellValue) -> Option<Self> {
        match cell {
            CellValue::Number(x) => Some(Literal::Number(*x)),
            CellValue::Text(s) => Some(Literal::Text(s.clone())),
            CellValue::Empty => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Compare(CmpOp, Literal),
    /// Pattern with `%` wildcards.
    Like(String),
    /// Non-empty list of alternatives.
    In(Vec<Literal>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub column: ColumnRef,
    pub predicate: Predicate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderBy {
    pub key: SelectExpr,
    pub descending: bool,
}

/// A single-table query: AND-joined conditions, optional grouping, ordering,
/// and limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SqlQuery {
    pub select: Vec<SelectExpr>,
    pub table: String,
    pub conditions: Vec<Condition>,
    pub group_by: Option<ColumnRef>,
    pub order_by: Option<OrderBy>,
    pub limit: Option<u64>,
}

impl SqlQuery {
    /// Applies `f` to every column reference in the query.
    pub fn visit_columns_mut(&mut self, mut f: impl FnMut(&mut ColumnRef)) {
        for item in &mut self.select {
            item.visit_columns_mut(&mut f);
        }
        for cond in &mut self.conditions {
            f(&mut cond.column);
        }
        if let Some(g) = &mut self.group_by {
            f(g);
        }
        if let Some(o) = &mut self.order_by {
            o.key.visit_columns_mut(&mut f);
        }
    }

    pub fn columns(&self) -> Vec<ColumnRef> {
        let mut out = Vec::new();
        self.clone().visit_columns_mut(|c| out.push(c.clone()));
        out
    }
}

pub(crate) const RESERVED: &[&str] = &[
    "SELECT", "FROM", "WHERE", "AND", "OR", "NOT", "GROUP", "BY", "ORDER", "ASC", "DESC", "LIMIT",
    "LIKE", "IN",
];

fn write_ident(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    let simple = name
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&name.to_ascii_uppercase().as_str());
    if simple {
        f.write_str(name)
    } else {
        write!(f, "\"{}\"", name.replace('"', "\"\""))
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.numeric {
            f.write_str("NUM(")?;
            write_ident(f, &self.name)?;
            f.write_str(")")
        } else {
            write_ident(f, &self.name)
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(x) => write!(f, "{x}"),
            Literal::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
        }
    }
}

impl fmt::Display for SelectExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectExpr::Column(c) => write!(f, "{c}"),
            SelectExpr::Agg { func, arg } => match arg {
                AggArg::Star => write!(f, "{}(*)", func.name()),
                AggArg::Column(c) => write!(f, "{}({c})", func.name()),
            },
            SelectExpr::Number(x) => write!(f, "{x}"),
            SelectExpr::Arith { left, op, right } => {
                let operand = |f: &mut fmt::Formatter<'_>, e: &SelectExpr| match e {
                    SelectExpr::Arith { .. } => write!(f, "({e})"),
                    _ => write!(f, "{e}"),
                };
                operand(f, left)?;
                write!(f, " {} ", op.symbol())?;
                operand(f, right)
            }
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.column)?;
        match &self.predicate {
            Predicate::Compare(op, lit) => write!(f, "{} {lit}", op.symbol()),
            Predicate::Like(p) => write!(f, "LIKE {}", Literal::Text(p.clone())),
            Predicate::In(list) => {
                f.write_str("IN (")?;
                for (i, lit) in list.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{lit}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for SqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        for (i, item) in self.select.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{item}")?;
        }
        f.write_str(" FROM ")?;
        write_ident(f, &self.table)?;
        for (i, cond) in self.conditions.iter().enumerate() {
            f.write_str(if i == 0 { " WHERE " } else { " AND " })?;
            write!(f, "{cond}")?;
        }
        if let Some(g) = &self.group_by {
            write!(f, " GROUP BY {g}")?;
        }
        if let Some(o) = &self.order_by {
            write!(f, " ORDER BY {} {}", o.key, if o.descending { "DESC" } else { "ASC" })?;
        }
        if let Some(n) = self.limit {
            write!(f, " LIMIT {n}")?;
        }
        Ok(())
    }
}
