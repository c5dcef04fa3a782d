//! Shared helpers for integration tests: a naive reference evaluator for the
//! query subset, random table and query generators, and typo injection.
#![allow(dead_code)]

use std::cmp::Ordering;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tqa_core::table::TableData;

// ---------------------------------------------------------------------------
// naive evaluator

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Empty,
    Num(f64),
    Text(String),
}

impl Val {
    pub fn from_raw(raw: &str) -> Val {
        let s = raw.trim();
        if s.is_empty() {
            Val::Empty
        } else if let Ok(x) = s.parse::<f64>() {
            Val::Num(x)
        } else {
            Val::Text(s.to_string())
        }
    }

    fn show(&self) -> String {
        match self {
            Val::Empty => String::new(),
            Val::Num(x) => fmt_num(*x),
            Val::Text(s) => s.clone(),
        }
    }

    fn key(&self) -> String {
        lower_words(&self.show())
    }
}

fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn lower_words(s: &str) -> String {
    s.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

/// Empty < numbers < text; text compared by its lowercased form.
fn order(a: &Val, b: &Val) -> Ordering {
    match (a, b) {
        (Val::Empty, Val::Empty) => Ordering::Equal,
        (Val::Empty, _) => Ordering::Less,
        (_, Val::Empty) => Ordering::Greater,
        (Val::Num(x), Val::Num(y)) => x.total_cmp(y),
        (Val::Num(_), Val::Text(_)) => Ordering::Less,
        (Val::Text(_), Val::Num(_)) => Ordering::Greater,
        (Val::Text(x), Val::Text(y)) => lower_words(x).cmp(&lower_words(y)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Lit {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pred {
    Cmp(Op, Lit),
    Like(String),
    In(Vec<Lit>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Agg {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Col(usize),
    /// `None` is `*`, only with COUNT.
    Agg(Agg, Option<usize>),
    Diff(Box<Item>, Box<Item>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub items: Vec<Item>,
    pub conds: Vec<(usize, Pred)>,
    pub group: Option<usize>,
    pub order: Option<(Item, bool)>,
    pub limit: Option<usize>,
}

pub struct NaiveTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Val>>,
}

impl NaiveTable {
    pub fn new(header: &[String], raw: &[Vec<String>]) -> Self {
        NaiveTable {
            header: header.to_vec(),
            rows: raw.iter().map(|r| r.iter().map(|c| Val::from_raw(c)).collect()).collect(),
        }
    }
}

fn lit_text(l: &Lit) -> String {
    match l {
        Lit::Num(x) => fmt_num(*x),
        Lit::Text(s) => format!("'{}'", s.replace('\'', "''")),
    }
}

fn agg_name(a: Agg) -> &'static str {
    match a {
        Agg::Count => "COUNT",
        Agg::Sum => "SUM",
        Agg::Avg => "AVG",
        Agg::Min => "MIN",
        Agg::Max => "MAX",
    }
}

fn item_text(item: &Item, header: &[String]) -> String {
    match item {
        Item::Col(c) => header[*c].clone(),
        Item::Agg(a, None) => format!("{}(*)", agg_name(*a)),
        Item::Agg(a, Some(c)) => format!("{}({})", agg_name(*a), header[*c]),
        Item::Diff(l, r) => format!("{} - {}", item_text(l, header), item_text(r, header)),
    }
}

pub fn render(q: &Query, header: &[String]) -> String {
    let mut s = format!(
        "SELECT {} FROM t",
        q.items.iter().map(|i| item_text(i, header)).collect::<Vec<_>>().join(", ")
    );
    for (i, (c, p)) in q.conds.iter().enumerate() {
        s.push_str(if i == 0 { " WHERE " } else { " AND " });
        s.push_str(&header[*c]);
        match p {
            Pred::Cmp(op, l) => {
                let sym = match op {
                    Op::Eq => "=",
                    Op::Ne => "!=",
                    Op::Lt => "<",
                    Op::Le => "<=",
                    Op::Gt => ">",
                    Op::Ge => ">=",
                };
                s.push_str(&format!(" {sym} {}", lit_text(l)));
            }
            Pred::Like(p) => s.push_str(&format!(" LIKE '{p}'")),
            Pred::In(ls) => s.push_str(&format!(
                " IN ({})",
                ls.iter().map(lit_text).collect::<Vec<_>>().join(", ")
            )),
        }
    }
    if let Some(g) = q.group {
        s.push_str(&format!(" GROUP BY {}", header[g]));
    }
    if let Some((k, desc)) = &q.order {
        s.push_str(&format!(" ORDER BY {} {}", item_text(k, header), if *desc { "DESC" } else { "ASC" }));
    }
    if let Some(n) = q.limit {
        s.push_str(&format!(" LIMIT {n}"));
    }
    s
}

fn lit_number(l: &Lit) -> Option<f64> {
    match l {
        Lit::Num(x) => Some(*x),
        Lit::Text(s) => s.trim().parse::<f64>().ok(),
    }
}

fn cmp_lit(v: &Val, l: &Lit) -> Option<Ordering> {
    match (v, lit_number(l)) {
        (Val::Empty, _) => None,
        (Val::Num(a), Some(b)) => a.partial_cmp(&b),
        _ => {
            let rhs = match l {
                Lit::Num(x) => fmt_num(*x),
                Lit::Text(s) => lower_words(s),
            };
            Some(v.key().cmp(&rhs))
        }
    }
}

/// Wildcard match by dynamic programming over (value, pattern) prefixes.
fn like(value: &str, pattern: &str) -> bool {
    let v: Vec<char> = lower_words(value).chars().collect();
    let p: Vec<char> = lower_words(pattern).chars().collect();
    let mut dp = vec![vec![false; p.len() + 1]; v.len() + 1];
    dp[0][0] = true;
    for j in 1..=p.len() {
        dp[0][j] = dp[0][j - 1] && p[j - 1] == '%';
    }
    for i in 1..=v.len() {
        for j in 1..=p.len() {
            dp[i][j] = if p[j - 1] == '%' {
                dp[i - 1][j] || dp[i][j - 1]
            } else {
                dp[i - 1][j - 1] && v[i - 1] == p[j - 1]
            };
        }
    }
    dp[v.len()][p.len()]
}

fn holds(v: &Val, p: &Pred) -> bool {
    if *v == Val::Empty {
        return false;
    }
    let sat = |o: Option<Ordering>, op: Op| match o {
        None => false,
        Some(o) => match op {
            Op::Eq => o == Ordering::Equal,
            Op::Ne => o != Ordering::Equal,
            Op::Lt => o == Ordering::Less,
            Op::Le => o != Ordering::Greater,
            Op::Gt => o == Ordering::Greater,
            Op::Ge => o != Ordering::Less,
        },
    };
    match p {
        Pred::Cmp(op, l) => sat(cmp_lit(v, l), *op),
        Pred::Like(pat) => like(&v.show(), pat),
        Pred::In(ls) => ls.iter().any(|l| cmp_lit(v, l) == Some(Ordering::Equal)),
    }
}

fn aggregate(item: &Item, rows: &[&Vec<Val>]) -> Result<Val, ()> {
    match item {
        Item::Col(_) => Err(()),
        Item::Agg(Agg::Count, None) => Ok(Val::Num(rows.len() as f64)),
        Item::Agg(_, None) => Err(()),
        Item::Agg(a, Some(c)) => {
            let vals: Vec<&Val> = rows.iter().map(|r| &r[*c]).filter(|v| **v != Val::Empty).collect();
            match a {
                Agg::Count => Ok(Val::Num(vals.len() as f64)),
                Agg::Sum | Agg::Avg => {
                    if vals.is_empty() {
                        return Err(());
                    }
                    let mut total = 0.0;
                    for v in &vals {
                        match v {
                            Val::Num(x) => total += x,
                            _ => return Err(()),
                        }
                    }
                    Ok(Val::Num(if *a == Agg::Avg { total / vals.len() as f64 } else { total }))
                }
                Agg::Min | Agg::Max => {
                    let mut best: Option<&Val> = None;
                    for v in vals {
                        let replace = match best {
                            None => true,
                            Some(b) if *a == Agg::Min => order(v, b) == Ordering::Less,
                            Some(b) => order(v, b) == Ordering::Greater,
                        };
                        if replace {
                            best = Some(v);
                        }
                    }
                    best.cloned().ok_or(())
                }
            }
        }
        Item::Diff(l, r) => match (aggregate(l, rows)?, aggregate(r, rows)?) {
            (Val::Num(a), Val::Num(b)) => Ok(Val::Num(a - b)),
            _ => Err(()),
        },
    }
}

/// Stable insertion sort, so equal keys keep their input order.
fn stable_sort<T>(items: &mut [T], mut cmp: impl FnMut(&T, &T) -> Ordering) {
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && cmp(&items[j - 1], &items[j]) == Ordering::Greater {
            items.swap(j - 1, j);
            j -= 1;
        }
    }
}

fn directed(o: Ordering, desc: bool) -> Ordering {
    if desc {
        o.reverse()
    } else {
        o
    }
}

/// Result values as display strings, or `Err(())` for any execution error.
pub fn naive_eval(q: &Query, t: &NaiveTable) -> Result<Vec<String>, ()> {
    let mut rows: Vec<&Vec<Val>> = t
        .rows
        .iter()
        .filter(|r| q.conds.iter().all(|(c, p)| holds(&r[*c], p)))
        .collect();
    let take = |n: usize| q.limit.unwrap_or(n).min(n);

    if let Some(g) = q.group {
        let mut groups: Vec<(Val, Vec<&Vec<Val>>)> = Vec::new();
        for r in rows {
            match groups.iter_mut().find(|(k, _)| order(k, &r[g]) == Ordering::Equal) {
                Some((_, m)) => m.push(r),
                None => groups.push((r[g].clone(), vec![r])),
            }
        }
        let eval = |item: &Item, k: &Val, m: &[&Vec<Val>]| match item {
            Item::Col(c) if *c == g => Ok(k.clone()),
            _ => aggregate(item, m),
        };
        let mut out: Vec<(Vec<Val>, Option<Val>)> = Vec::new();
        for (k, m) in &groups {
            let vals = q.items.iter().map(|i| eval(i, k, m)).collect::<Result<Vec<_>, _>>()?;
            let key = match &q.order {
                Some((item, _)) => Some(eval(item, k, m)?),
                None => None,
            };
            out.push((vals, key));
        }
        if let Some((_, desc)) = &q.order {
            stable_sort(&mut out, |a, b| {
                directed(order(a.1.as_ref().unwrap(), b.1.as_ref().unwrap()), *desc)
            });
        }
        let n = take(out.len());
        return Ok(out.into_iter().take(n).flat_map(|(v, _)| v).map(|v| v.show()).collect());
    }

    if q.items.iter().any(|i| !matches!(i, Item::Col(_))) {
        return q.items.iter().map(|i| aggregate(i, &rows).map(|v| v.show())).collect();
    }

    if let Some((Item::Col(k), desc)) = &q.order {
        stable_sort(&mut rows, |a, b| directed(order(&a[*k], &b[*k]), *desc));
    }
    let n = take(rows.len());
    let mut out = Vec::new();
    for r in rows.iter().take(n) {
        for i in &q.items {
            if let Item::Col(c) = i {
                out.push(r[*c].show());
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// random tables and queries

const WORDS: [&str; 8] = ["red", "Blue", "green", "blue", "Red Sox", "amber", "Green Bay", "navy"];
const MIXED: [&str; 6] = ["3", "abc", "12", "x9", "7", "N/A"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColKind {
    Num,
    Text,
    Mixed,
}

pub struct RandomTable {
    pub header: Vec<String>,
    pub kinds: Vec<ColKind>,
    pub raw: Vec<Vec<String>>,
}

impl RandomTable {
    pub fn table(&self) -> TableData {
        TableData::from_strings("t", &self.header, &self.raw).unwrap()
    }

    pub fn naive(&self) -> NaiveTable {
        NaiveTable::new(&self.header, &self.raw)
    }

    fn cells(&self, c: usize) -> Vec<&str> {
        self.raw.iter().map(|r| r[c].as_str()).filter(|s| !s.is_empty()).collect()
    }
}

/// Up to 8 rows and 5 columns of small integers, words, and mixed cells,
/// with some empty cells.
pub fn random_table(rng: &mut ChaCha8Rng) -> RandomTable {
    let n_cols = rng.random_range(1..=5);
    let n_rows = rng.random_range(0..=8);
    let kinds: Vec<ColKind> = (0..n_cols)
        .map(|_| match rng.random_range(0..5) {
            0 | 1 => ColKind::Num,
            2 | 3 => ColKind::Text,
            _ => ColKind::Mixed,
        })
        .collect();
    let raw = (0..n_rows)
        .map(|_| {
            kinds
                .iter()
                .map(|k| {
                    if rng.random_bool(0.1) {
                        return String::new();
                    }
                    match k {
                        ColKind::Num => rng.random_range(-5..30).to_string(),
                        ColKind::Text => WORDS[rng.random_range(0..WORDS.len())].to_string(),
                        ColKind::Mixed => MIXED[rng.random_range(0..MIXED.len())].to_string(),
                    }
                })
                .collect()
        })
        .collect();
    RandomTable {
        header: (0..n_cols).map(|i| format!("c{i}")).collect(),
        kinds,
        raw,
    }
}

fn random_lit(t: &RandomTable, c: usize, rng: &mut ChaCha8Rng) -> Lit {
    let cells = t.cells(c);
    if !cells.is_empty() && rng.random_bool(0.7) {
        let s = cells[rng.random_range(0..cells.len())];
        return match s.parse::<f64>() {
            Ok(x) => Lit::Num(x),
            Err(_) => Lit::Text(s.to_string()),
        };
    }
    match rng.random_range(0..3) {
        0 => Lit::Num(rng.random_range(-5..30) as f64),
        1 => Lit::Text(WORDS[rng.random_range(0..WORDS.len())].to_uppercase()),
        _ => Lit::Text(rng.random_range(0..30).to_string()),
    }
}

fn random_pred(t: &RandomTable, c: usize, rng: &mut ChaCha8Rng) -> Pred {
    const OPS: [Op; 6] = [Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge];
    match rng.random_range(0..6) {
        0 => {
            let pats = ["%e%", "r%", "%n", "%", "blue", "%e%n%", "1%"];
            Pred::Like(pats[rng.random_range(0..pats.len())].to_string())
        }
        1 => Pred::In((0..rng.random_range(1..=3)).map(|_| random_lit(t, c, rng)).collect()),
        _ => Pred::Cmp(OPS[rng.random_range(0..6)], random_lit(t, c, rng)),
    }
}

fn random_agg(n_cols: usize, rng: &mut ChaCha8Rng) -> Item {
    const AGGS: [Agg; 5] = [Agg::Count, Agg::Sum, Agg::Avg, Agg::Min, Agg::Max];
    let a = AGGS[rng.random_range(0..5)];
    if a == Agg::Count && rng.random_bool(0.4) {
        Item::Agg(a, None)
    } else {
        Item::Agg(a, Some(rng.random_range(0..n_cols)))
    }
}

/// A random query within the grammar: plain row selection, scalar
/// aggregates, or a grouped aggregate.
pub fn random_query(t: &RandomTable, rng: &mut ChaCha8Rng) -> Query {
    let n = t.header.len();
    let conds = (0..rng.random_range(0..=2))
        .map(|_| {
            let c = rng.random_range(0..n);
            (c, random_pred(t, c, rng))
        })
        .collect();
    let limit = rng.random_bool(0.3).then(|| rng.random_range(1..=4));
    match rng.random_range(0..3) {
        0 => Query {
            items: (0..rng.random_range(1..=2)).map(|_| Item::Col(rng.random_range(0..n))).collect(),
            conds,
            group: None,
            order: rng
                .random_bool(0.5)
                .then(|| (Item::Col(rng.random_range(0..n)), rng.random_bool(0.5))),
            limit,
        },
        1 => {
            let mut items = vec![random_agg(n, rng)];
            if rng.random_bool(0.4) {
                items.push(random_agg(n, rng));
            }
            if rng.random_bool(0.2) {
                let l = random_agg(n, rng);
                let r = random_agg(n, rng);
                items.push(Item::Diff(Box::new(l), Box::new(r)));
            }
            Query {
                items,
                conds,
                group: None,
                order: None,
                limit: None,
            }
        }
        _ => {
            let g = rng.random_range(0..n);
            let agg = random_agg(n, rng);
            let order = match rng.random_range(0..3) {
                0 => None,
                1 => Some((Item::Col(g), rng.random_bool(0.5))),
                _ => Some((agg.clone(), rng.random_bool(0.5))),
            };
            Query {
                items: vec![Item::Col(g), agg],
                conds,
                group: Some(g),
                order,
                limit,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// repair workloads

const HEADERS: [&str; 10] = [
    "attendance", "opponent", "venue", "result", "season", "position", "points", "country", "score", "date",
];
const TEAMS: [&str; 8] = ["Arsenal", "Chelsea", "Everton", "Liverpool", "Fulham", "Burnley", "Brentford", "Watford"];
const CITIES: [&str; 6] = ["London", "Madrid", "Lisbon", "Glasgow", "Dublin", "Vienna"];

/// A table with two text columns and three numeric columns under realistic
/// headers, plus a clean query over it given as a template with slots.
pub struct RepairCase {
    pub table: TableData,
    pub template: String,
    /// `(is_column, value)` for each `{i}` in the template.
    pub slots: Vec<(bool, String)>,
}

impl RepairCase {
    pub fn render(&self, slots: &[(bool, String)]) -> String {
        let mut s = self.template.clone();
        for (i, (_, v)) in slots.iter().enumerate() {
            s = s.replace(&format!("{{{i}}}"), v);
        }
        s
    }

    pub fn clean(&self) -> String {
        self.render(&self.slots)
    }

    /// The query with one slot corrupted by one or two character edits,
    /// plus the corrupted slot index. Column typos never produce another
    /// header and literal typos never produce another cell value.
    pub fn with_typo(&self, rng: &mut ChaCha8Rng) -> (String, usize) {
        loop {
            let i = rng.random_range(0..self.slots.len());
            let (is_col, v) = &self.slots[i];
            let edits = if v.chars().count() >= 6 && rng.random_bool(0.3) { 2 } else { 1 };
            let mut typo = v.clone();
            for _ in 0..edits {
                typo = one_edit(&typo, rng);
            }
            let clashes = if *is_col {
                self.table.header.iter().any(|h| h.eq_ignore_ascii_case(&typo))
            } else {
                self.table.rows.iter().flatten().any(|c| c.to_string().eq_ignore_ascii_case(&typo))
            };
            if typo == *v || clashes || typo.is_empty() {
                continue;
            }
            let mut slots = self.slots.clone();
            slots[i].1 = typo;
            return (self.render(&slots), i);
        }
    }
}

fn one_edit(s: &str, rng: &mut ChaCha8Rng) -> String {
    let mut cs: Vec<char> = s.chars().collect();
    let letter = (b'a' + rng.random_range(0..26u8)) as char;
    let i = rng.random_range(0..cs.len());
    match rng.random_range(0..4) {
        0 => cs[i] = letter,
        1 if cs.len() > 3 => {
            cs.remove(i);
        }
        2 if i + 1 < cs.len() => cs.swap(i, i + 1),
        _ => cs.insert(i, letter),
    }
    cs.into_iter().collect()
}

pub fn repair_case(rng: &mut ChaCha8Rng) -> RepairCase {
    let picked = rand::seq::index::sample(rng, HEADERS.len(), 5).into_vec();
    let header: Vec<String> = picked.iter().map(|&i| HEADERS[i].to_string()).collect();
    let n_rows = rng.random_range(3..=10);
    let rows: Vec<Vec<String>> = (0..n_rows)
        .map(|_| {
            vec![
                TEAMS[rng.random_range(0..TEAMS.len())].to_string(),
                CITIES[rng.random_range(0..CITIES.len())].to_string(),
                rng.random_range(0..60).to_string(),
                rng.random_range(1000..60000).to_string(),
                rng.random_range(1990..2024).to_string(),
            ]
        })
        .collect();
    let table = TableData::from_strings("t", &header, &rows).unwrap();
    let row = &rows[rng.random_range(0..n_rows)];
    let other = &rows[rng.random_range(0..n_rows)];
    let col = |j: usize| (true, header[j].clone());
    let lit = |s: &str| (false, s.to_string());
    let (template, slots) = match rng.random_range(0..6) {
        0 => ("SELECT {0} FROM t WHERE {1} = '{2}'", vec![col(rng.random_range(2..5)), col(0), lit(&row[0])]),
        1 => (
            "SELECT COUNT(*) FROM t WHERE {0} = '{1}' AND {2} > 10",
            vec![col(1), lit(&row[1]), col(2)],
        ),
        2 => ("SELECT SUM({0}) FROM t WHERE {1} = '{2}'", vec![col(3), col(0), lit(&row[0])]),
        3 => (
            "SELECT {0} FROM t WHERE {1} >= 20 ORDER BY {2} DESC LIMIT 1",
            vec![col(0), col(2), col(4)],
        ),
        4 => (
            "SELECT {0} FROM t WHERE {1} IN ('{2}', '{3}')",
            vec![col(4), col(1), lit(&row[1]), lit(&other[1])],
        ),
        _ => ("SELECT {0}, MAX({1}) FROM t GROUP BY {2}", vec![col(0), col(3), col(0)]),
    };
    RepairCase {
        table,
        template: template.to_string(),
        slots,
    }
}

// ---------------------------------------------------------------------------
// brute-force self-consistency vote

/// Majority over candidates compared as sorted normalized lists. Ties go to
/// the larger confidence sum, then the smallest normalized key; the result
/// is the smallest verbatim member of the winning group.
pub fn brute_force_vote(cands: &[Vec<String>], confs: Option<&[f64]>) -> Vec<String> {
    let key = |c: &Vec<String>| {
        let mut k: Vec<String> = c.iter().map(|s| lower_words(s).trim_matches(['"', '\'']).to_string()).collect();
        k.sort();
        k
    };
    let mut best: Option<(usize, f64, Vec<String>)> = None;
    for c in cands {
        let k = key(c);
        let members: Vec<usize> = (0..cands.len()).filter(|&j| key(&cands[j]) == k).collect();
        let count = members.len();
        let mut ws: Vec<f64> = members.iter().map(|&j| confs.map_or(0.0, |w| w[j])).collect();
        ws.sort_by(f64::total_cmp);
        let weight: f64 = ws.iter().sum();
        let better = match &best {
            None => true,
            Some((bc, bw, bk)) => {
                count > *bc || (count == *bc && (weight > *bw || (weight == *bw && k < *bk)))
            }
        };
        if better {
            best = Some((count, weight, k));
        }
    }
    let (_, _, k) = best.expect("non-empty candidates");
    cands.iter().filter(|c| key(c) == k).min().cloned().unwrap()
}
