//! Exact-match accuracy and correctness quadrants.

use serde::{Deserialize, Serialize};

use crate::table::{parse_number, ModelPrediction};
use crate::text::normalize_answer;

/// Absolute tolerance for numeric answer comparison.
pub const NUMERIC_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
enum Norm {
    Num(f64),
    Str(String),
}

fn norm(answer: &str) -> Norm {
    let s = normalize_answer(answer);
    match parse_number(&s) {
        Some(x) => Norm::Num(x),
        None => Norm::Str(s),
    }
}

fn same(a: &Norm, b: &Norm) -> bool {
    match (a, b) {
        (Norm::Num(x), Norm::Num(y)) => (x - y).abs() <= NUMERIC_TOLERANCE,
        (Norm::Str(x), Norm::Str(y)) => x == y,
        _ => false,
    }
}

/// Two answers are equal after normalization.
pub fn answers_equal(a: &str, b: &str) -> bool {
    same(&norm(a), &norm(b))
}

/// Multiset equality of answer lists under normalization. Matching is a
/// full bipartite matching, so the result does not depend on order even
/// though numeric tolerance is not transitive.
pub fn exact_match(predicted: &[String], gold: &[String]) -> bool {
    if predicted.len() != gold.len() || gold.is_empty() {
        return false;
    }
    let p: Vec<Norm> = predicted.iter().map(|a| norm(a)).collect();
    let g: Vec<Norm> = gold.iter().map(|a| norm(a)).collect();
    let adj: Vec<Vec<usize>> = p
        .iter()
        .map(|x| (0..g.len()).filter(|&j| same(x, &g[j])).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; g.len()];
    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, adj, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    (0..p.len()).all(|i| augment(i, &adj, &mut vec![false; g.len()], &mut owner))
}

/// Normalized answer lists are equal as multisets, without numeric
/// tolerance: the agreement test used by the selectors.
pub fn answers_agree(a: &[String], b: &[String]) -> bool {
    let key = |xs: &[String]| {
        let mut v: Vec<String> = xs.iter().map(|x| normalize_answer(x)).collect();
        v.sort();
        v
    };
    key(a) == key(b)
}

/// Answers a prediction contributes: a failed execution yields none.
pub fn effective_answers(pred: &ModelPrediction) -> &[String] {
    if pred.executed() {
        &pred.answers
    } else {
        &[]
    }
}

pub fn prediction_correct(pred: &ModelPrediction, gold: &[String]) -> bool {
    exact_match(effective_answers(pred), gold)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadrants {
    pub both_correct: usize,
    pub sql_only: usize,
    pub e2e_only: usize,
    pub both_wrong: usize,
}

impl Quadrants {
    pub fn add(&mut self, sql_ok: bool, e2e_ok: bool) {
        match (sql_ok, e2e_ok) {
            (true, true) => self.both_correct += 1,
            (true, false) => self.sql_only += 1,
            (false, true) => self.e2e_only += 1,
            (false, false) => self.both_wrong += 1,
        }
    }

    pub fn from_flags(flags: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut q = Quadrants::default();
        for (s, e) in flags {
            q.add(s, e);
        }
        q
    }

    pub fn n(&self) -> usize {
        self.both_correct + self.sql_only + self.e2e_only + self.both_wrong
    }

    pub fn oracle_correct(&self) -> usize {
        self.both_correct + self.sql_only + self.e2e_only
    }

    pub fn sql_correct(&self) -> usize {
        self.both_correct + self.sql_only
    }

    pub fn e2e_correct(&self) -> usize {
        self.both_correct + self.e2e_only
    }

    /// Fraction of instances solved by exactly one side.
    pub fn exclusive_share(&self) -> f64 {
        ratio(self.sql_only + self.e2e_only, self.n())
    }

    pub fn oracle_accuracy(&self) -> f64 {
        ratio(self.oracle_correct(), self.n())
    }
}

/// `num / den`, or 0 for an empty denominator.
pub fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
