//! Hand-written lexer and recursive descent parser for the query subset.
//!
//! ```text
//! query     := SELECT item (',' item)* FROM ident
//!              [WHERE cond (AND cond)*] [GROUP BY colref]
//!              [ORDER BY item [ASC|DESC]] [LIMIT int] [';']
//! item      := colref | additive
//! additive  := term (('+' | '-') term)*
//! term      := factor (('*' | '/') factor)*
//! factor    := number | '-' number | AGG '(' ('*' | colref) ')' | '(' additive ')'
//! colref    := ident | NUM '(' ident ')'
//! cond      := colref (cmp literal | LIKE string | IN '(' literal (',' literal)* ')')
//! ```

use super::ast::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("parse error at byte {position}: expected {expected}, found {found}")]
pub struct ParseError {
    pub position: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    QuotedIdent(String),
    Str(String),
    Number(f64),
    Comma,
    LParen,
    RParen,
    Star,
    Plus,
    Minus,
    Slash,
    Cmp(CmpOp),
    Semicolon,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::QuotedIdent(s) => format!("\"{s}\""),
            Tok::Str(s) => format!("'{s}'"),
            Tok::Number(x) => format!("{x}"),
            Tok::Comma => "','".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Star => "'*'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Cmp(op) => format!("'{}'", op.symbol()),
            Tok::Semicolon => "';'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, expected: &str, found: String| ParseError {
        position: pos,
        expected: expected.to_string(),
        found,
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b',' => {
                out.push((start, Tok::Comma));
                i += 1;
            }
            b'(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            b'*' => {
                out.push((start, Tok::Star));
                i += 1;
            }
            b'+' => {
                out.push((start, Tok::Plus));
                i += 1;
            }
            b'-' => {
                out.push((start, Tok::Minus));
                i += 1;
            }
            b'/' => {
                out.push((start, Tok::Slash));
                i += 1;
            }
            b';' => {
                out.push((start, Tok::Semicolon));
                i += 1;
            }
            b'=' => {
                i += if bytes.get(i + 1) == Some(&b'=') { 2 } else { 1 };
                out.push((start, Tok::Cmp(CmpOp::Eq)));
            }
            b'!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    out.push((start, Tok::Cmp(CmpOp::Ne)));
                    i += 2;
                } else {
                    return Err(err(start, "'!='", "'!'".into()));
                }
            }
            b'<' => match bytes.get(i + 1) {
                Some(b'=') => {
                    out.push((start, Tok::Cmp(CmpOp::Le)));
                    i += 2;
                }
                Some(b'>') => {
                    out.push((start, Tok::Cmp(CmpOp::Ne)));
                    i += 2;
                }
                _ => {
                    out.push((start, Tok::Cmp(CmpOp::Lt)));
                    i += 1;
                }
            },
            b'>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    out.push((start, Tok::Cmp(CmpOp::Ge)));
                    i += 2;
                } else {
                    out.push((start, Tok::Cmp(CmpOp::Gt)));
                    i += 1;
                }
            }
            b'\'' | b'"' | b'`' | b'[' => {
                let close = if c == b'[' { b']' } else { c };
                let mut text = String::new();
                i += 1;
                let mut seg = i;
                loop {
                    match bytes.get(i) {
                        None => return Err(err(start, "closing quote", "end of input".into())),
                        Some(&b) if b == close => {
                            text.push_str(&src[seg..i]);
                            if close != b']' && bytes.get(i + 1) == Some(&close) {
                                text.push(close as char);
                                i += 2;
                                seg = i;
                            } else {
                                i += 1;
                                break;
                            }
                        }
                        Some(_) => i += 1,
                    }
                }
                out.push((
                    start,
                    if c == b'\'' {
                        Tok::Str(text)
                    } else {
                        Tok::QuotedIdent(text)
                    },
                ));
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value = text
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(start, "number", format!("`{text}`")))?;
                out.push((start, Tok::Number(value)));
            }
            _ if c.is_ascii_alphabetic() || c == b'_' || c >= 0x80 => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] >= 0x80)
                {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(err(start, "token", format!("'{ch}'")));
            }
        }
    }
    out.push((src.len(), Tok::Eof));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[idx].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.offset(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        })
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(kw)
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.error(&tok.describe())
        }
    }

    fn query(&mut self) -> Result<SqlQuery, ParseError> {
        self.expect_keyword("SELECT")?;
        let mut select = vec![self.item()?];
        while self.eat(&Tok::Comma) {
            select.push(self.item()?);
        }
        self.expect_keyword("FROM")?;
        let table = self.ident()?;
        let mut conditions = Vec::new();
        if self.at_keyword("WHERE") {
            self.bump();
            conditions.push(self.condition()?);
            while self.at_keyword("AND") {
                self.bump();
                conditions.push(self.condition()?);
            }
            if self.at_keyword("OR") {
                return self.error("AND (OR is not supported)");
            }
        }
        let mut group_by = None;
        if self.at_keyword("GROUP") {
            self.bump();
            self.expect_keyword("BY")?;
            group_by = Some(self.colref()?);
        }
        let mut order_by = None;
        if self.at_keyword("ORDER") {
            self.bump();
            self.expect_keyword("BY")?;
            let key = self.item()?;
            let descending = if self.at_keyword("DESC") {
                self.bump();
                true
            } else {
                if self.at_keyword("ASC") {
                    self.bump();
                }
                false
            };
            order_by = Some(OrderBy { key, descending });
        }
        let mut limit = None;
        if self.at_keyword("LIMIT") {
            self.bump();
            match self.peek().clone() {
                Tok::Number(x) if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 => {
                    self.bump();
                    limit = Some(x as u64);
                }
                _ => return self.error("positive integer"),
            }
        }
        self.eat(&Tok::Semicolon);
        if *self.peek() != Tok::Eof {
            return self.error("end of query");
        }
        Ok(SqlQuery {
            select,
            table,
            conditions,
            group_by,
            order_by,
            limit,
        })
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.to_ascii_uppercase().as_str()) => {
                self.bump();
                Ok(s)
            }
            Tok::QuotedIdent(s) if !s.is_empty() => {
                self.bump();
                Ok(s)
            }
            _ => self.error("identifier"),
        }
    }

    fn is_call(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(name))
            && *self.peek_at(1) == Tok::LParen
    }

    fn colref(&mut self) -> Result<ColumnRef, ParseError> {
        if self.is_call("NUM") {
            self.bump();
            self.bump();
            let name = self.ident()?;
            self.expect(&Tok::RParen)?;
            return Ok(ColumnRef::numeric(name));
        }
        Ok(ColumnRef::new(self.ident()?))
    }

    fn starts_colref(&self) -> bool {
        match self.peek() {
            Tok::QuotedIdent(_) => true,
            Tok::Ident(s) => {
                self.is_call("NUM")
                    || (AggFunc::from_name(s).is_none() || *self.peek_at(1) != Tok::LParen)
            }
            _ => false,
        }
    }

    fn item(&mut self) -> Result<SelectExpr, ParseError> {
        if self.starts_colref() {
            let col = self.colref()?;
            if matches!(self.peek(), Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash) {
                return self.error("',' or FROM (arithmetic operands must be aggregates or numbers)");
            }
            return Ok(SelectExpr::Column(col));
        }
        self.additive()
    }

    fn additive(&mut self) -> Result<SelectExpr, ParseError> {
        let mut left = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.term()?;
            left = SelectExpr::arith(left, op, right);
        }
    }

    fn term(&mut self) -> Result<SelectExpr, ParseError> {
        let mut left = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.factor()?;
            left = SelectExpr::arith(left, op, right);
        }
    }

    fn factor(&mut self) -> Result<SelectExpr, ParseError> {
        match self.peek().clone() {
            Tok::Number(x) => {
                self.bump();
                Ok(SelectExpr::Number(x))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Number(x) => {
                        self.bump();
                        Ok(SelectExpr::Number(-x))
                    }
                    _ => self.error("number"),
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.additive()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::LParen => {
                let Some(func) = AggFunc::from_name(&name) else {
                    return self.error("aggregate function");
                };
                self.bump();
                self.bump();
                let arg = if *self.peek() == Tok::Star {
                    if func != AggFunc::Count {
                        return self.error("column (only COUNT accepts '*')");
                    }
                    self.bump();
                    AggArg::Star
                } else {
                    AggArg::Column(self.colref()?)
                };
                self.expect(&Tok::RParen)?;
                Ok(SelectExpr::Agg { func, arg })
            }
            _ => self.error("aggregate, number or '('"),
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        match self.peek().clone() {
            Tok::Number(x) => {
                self.bump();
                Ok(Literal::Number(x))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Number(x) => {
                        self.bump();
                        Ok(Literal::Number(-x))
                    }
                    _ => self.error("number"),
                }
            }
            Tok::Str(s) if !s.is_empty() => {
                self.bump();
                Ok(Literal::Text(s))
            }
            _ => self.error("literal (number or non-empty string)"),
        }
    }

    fn condition(&mut self) -> Result<Condition, ParseError> {
        let column = self.colref()?;
        let predicate = match self.peek().clone() {
            Tok::Cmp(op) => {
                self.bump();
                Predicate::Compare(op, self.literal()?)
            }
            Tok::Ident(kw) if kw.eq_ignore_ascii_case("LIKE") => {
                self.bump();
                match self.peek().clone() {
                    Tok::Str(p) if !p.is_empty() => {
                        self.bump();
                        Predicate::Like(p)
                    }
                    _ => return self.error("pattern string"),
                }
            }
            Tok::Ident(kw) if kw.eq_ignore_ascii_case("IN") => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let mut list = vec![self.literal()?];
                while self.eat(&Tok::Comma) {
                    list.push(self.literal()?);
                }
                self.expect(&Tok::RParen)?;
                Predicate::In(list)
            }
            _ => return self.error("comparison, LIKE or IN"),
        };
        Ok(Condition { column, predicate })
    }
}

/// Parses query text. Never panics; malformed input yields a [`ParseError`].
pub fn parse_sql(text: &str) -> Result<SqlQuery, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0 };
    parser.query()
}
