use std::cmp::Ordering;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

static PLAIN_NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$").unwrap());
static GROUPED_NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[+-]?\d{1,3}(,\d{3})+(\.\d+)?$").unwrap());
static LEADING_NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[+-]?(\d{1,3}(,\d{3})+|\d+)(\.\d+)?").unwrap());

const CURRENCY: &[char] = &['$', '€', '£', '¥', '₹'];

/// A single table cell.
///
/// `Number` is always finite and `Text` is never empty; use [`CellValue::parse`]
/// or [`CellValue::number`] to construct values that uphold this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellValue {
    Text(String),
    Number(f64),
    Empty,
}

impl CellValue {
    /// Parses a raw cell string. Surrounding whitespace is ignored, `""`
    /// becomes `Empty`, and numbers may carry thousands separators or a
    /// trailing `%`.
    pub fn parse(raw: &str) -> Self {
        let s = raw.trim();
        if s.is_empty() {
            return CellValue::Empty;
        }
        match parse_number(s) {
            Some(x) => CellValue::Number(x),
            None => CellValue::Text(s.to_string()),
        }
    }

    /// Wraps a finite number; `None` for NaN or infinities.
    pub fn number(x: f64) -> Option<Self> {
        if x.is_finite() {
            // fold -0 into 0 so formatting is canonical
            Some(CellValue::Number(if x == 0.0 { 0.0 } else { x }))
        } else {
            None
        }
    }

    pub fn text(s: impl Into<String>) -> Self {
        let s = s.into();
        if s.trim().is_empty() {
            CellValue::Empty
        } else {
            CellValue::Text(s)
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, CellValue::Empty)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            CellValue::Number(x) => Some(*x),
            _ => None,
        }
    }

    /// Longest numeric prefix after stripping currency symbols, e.g.
    /// `"10 pts"` → 10, `"3rd"` → 3, `"$1,200"` → 1200.
    pub fn leading_number(&self) -> Option<f64> {
        match self {
            CellValue::Number(x) => Some(*x),
            CellValue::Empty => None,
            CellValue::Text(s) => leading_number(s),
        }
    }

    /// Lowercased, whitespace-normalized string form used for text comparison.
    pub fn text_key(&self) -> String {
        crate::text::normalize(&self.to_string())
    }

    /// Total order used by ORDER BY and MIN/MAX: `Empty < Number < Text`,
    /// numbers numerically, text case-insensitively.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        use CellValue::*;
        match (self, other) {
            (Empty, Empty) => Ordering::Equal,
            (Empty, _) => Ordering::Less,
            (_, Empty) => Ordering::Greater,
            (Number(a), Number(b)) => a.total_cmp(b),
            (Number(_), Text(_)) => Ordering::Less,
            (Text(_), Number(_)) => Ordering::Greater,
            (Text(a), Text(b)) => crate::text::normalize(a).cmp(&crate::text::normalize(b)),
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Text(s) => f.write_str(s),
            // shortest representation that parses back to the same f64
            CellValue::Number(x) => write!(f, "{x}"),
            CellValue::Empty => Ok(()),
        }
    }
}

/// Parses a trimmed string as a finite number, accepting thousands
/// separators and a trailing percent sign.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let s = s.strip_suffix('%').map(str::trim_end).unwrap_or(s);
    let cleaned;
    let candidate = if GROUPED_NUMBER.is_match(s) {
        cleaned = s.replace(',', "");
        cleaned.as_str()
    } else if PLAIN_NUMBER.is_match(s) {
        s
    } else {
        return None;
    };
    candidate
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .map(|x| if x == 0.0 { 0.0 } else { x })
}

pub fn leading_number(s: &str) -> Option<f64> {
    let s = s.trim_start_matches(|c: char| c.is_whitespace() || CURRENCY.contains(&c));
    let m = LEADING_NUMBER.find(s)?;
    m.as_str().replace(',', "").parse::<f64>().ok().filter(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn thousands_separator_is_stripped() {
        assert_eq!(CellValue::parse("2,300"), CellValue::Number(2300.0));
        assert_eq!(CellValue::parse("1,234,567.5"), CellValue::Number(1234567.5));
        // not a valid grouping, so it stays text
        assert_eq!(CellValue::parse("1,2"), CellValue::Text("1,2".into()));
    }

    #[test]
    fn empty_and_percent() {
        assert_eq!(CellValue::parse(""), CellValue::Empty);
        assert_eq!(CellValue::parse("   "), CellValue::Empty);
        assert_eq!(CellValue::parse("45%"), CellValue::Number(45.0));
        assert_eq!(CellValue::parse(" -3.5 "), CellValue::Number(-3.5));
    }

    #[test]
    fn non_finite_words_are_text() {
        assert_eq!(CellValue::parse("inf"), CellValue::Text("inf".into()));
        assert_eq!(CellValue::parse("NaN"), CellValue::Text("NaN".into()));
        assert_eq!(CellValue::number(f64::NAN), None);
        assert_eq!(CellValue::parse("1e999"), CellValue::Text("1e999".into()));
    }

    #[test]
    fn leading_number_extraction() {
        assert_eq!(leading_number("10 pts"), Some(10.0));
        assert_eq!(leading_number("3rd"), Some(3.0));
        assert_eq!(leading_number("$1,200 total"), Some(1200.0));
        assert_eq!(leading_number("-4.5kg"), Some(-4.5));
        assert_eq!(leading_number("null"), None);
        assert_eq!(CellValue::Empty.leading_number(), None);
    }

    #[test]
    fn total_order_places_empty_first() {
        let mut v = vec![
            CellValue::Text("b".into()),
            CellValue::Number(3.0),
            CellValue::Empty,
            CellValue::Text("A".into()),
            CellValue::Number(-1.0),
        ];
        v.sort_by(CellValue::total_cmp);
        assert_eq!(
            v,
            vec![
                CellValue::Empty,
                CellValue::Number(-1.0),
                CellValue::Number(3.0),
                CellValue::Text("A".into()),
                CellValue::Text("b".into()),
            ]
        );
    }

    proptest! {
        #[test]
        fn number_format_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
            let cell = CellValue::number(x).unwrap();
            prop_assert_eq!(CellValue::parse(&cell.to_string()), cell);
        }

        #[test]
        fn integer_format_round_trips(x in -1_000_000_000i64..1_000_000_000) {
            let cell = CellValue::number(x as f64).unwrap();
            prop_assert_eq!(CellValue::parse(&cell.to_string()), cell);
        }
    }
}
