//! Synthetic instances, tables, and paired predictions with controlled
//! correctness quadrants and a tunable signal about which side is right.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{answers_agree, exact_match};
use crate::reference::BenchmarkRow;
use crate::sql::run_sql;
use crate::table::{write_jsonl, write_tables, ModelPrediction, QaInstance, Source, TableData, TableError};

const FIRST: [&str; 20] = [
    "Ada", "Ben", "Cleo", "Dov", "Eli", "Fay", "Gus", "Hana", "Ivo", "Jun", "Kai", "Lia", "Milo", "Nia", "Otto",
    "Pia", "Quin", "Rosa", "Sven", "Tara",
];
const LAST: [&str; 20] = [
    "Abe", "Berg", "Cruz", "Dahl", "Eng", "Frey", "Gale", "Holt", "Ito", "Joss", "Kern", "Lund", "Moss", "Nash",
    "Ortiz", "Pratt", "Quist", "Reyes", "Stone", "Voss",
];
const TEAMS: [&str; 10] = [
    "Falcons", "Rovers", "United", "Wanderers", "Harbor", "Comets", "Pioneers", "Athletic", "Rangers", "Tigers",
];

/// Which feature carries the signal about the correct side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalCarrier {
    /// The correct side gets the higher length-normalized confidence.
    Confidence,
    /// SQL-correct instances get long tables, E2E-correct ones short tables;
    /// confidences are uninformative.
    TableSize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub n: usize,
    /// Shares of `[both_correct, sql_only, e2e_only, both_wrong]`.
    pub proportions: [f64; 4],
    /// Probability that an instance's signal feature is informative.
    pub signal: f64,
    pub carrier: SignalCarrier,
    /// Leading share of instances placed in the `train` split.
    pub train_fraction: f64,
    pub seed: u64,
    /// When set, SQL is always correct and E2E is correct exactly when the
    /// table fits this linearization budget; `proportions` is ignored.
    pub truncation_budget: Option<usize>,
}

impl FixtureSpec {
    pub fn new(n: usize, proportions: [f64; 4], signal: f64, seed: u64) -> Self {
        FixtureSpec {
            n,
            proportions,
            signal,
            carrier: SignalCarrier::Confidence,
            train_fraction: 0.5,
            seed,
            truncation_budget: None,
        }
    }

    /// Quadrant shares derived from a benchmark's accuracies.
    pub fn shaped_like(row: &BenchmarkRow, n: usize, signal: f64, seed: u64) -> Self {
        FixtureSpec::new(n, row.quadrant_shares().map(|x| x / 100.0), signal, seed)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("invalid fixture spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub instances: Vec<QaInstance>,
    pub tables: BTreeMap<String, TableData>,
    pub sql_preds: Vec<ModelPrediction>,
    pub e2e_preds: Vec<ModelPrediction>,
}

impl Fixture {
    pub fn sql_map(&self) -> HashMap<String, ModelPrediction> {
        self.sql_preds.iter().map(|p| (p.instance_id.clone(), p.clone())).collect()
    }

    pub fn e2e_map(&self) -> HashMap<String, ModelPrediction> {
        self.e2e_preds.iter().map(|p| (p.instance_id.clone(), p.clone())).collect()
    }

    pub fn split(&self, name: &str) -> Vec<QaInstance> {
        self.instances.iter().filter(|i| i.split == name).cloned().collect()
    }

    /// Writes `tables/`, `instances.jsonl`, `sql.jsonl`, and `e2e.jsonl`.
    pub fn write(&self, dir: &Path) -> Result<(), TableError> {
        write_tables(&dir.join("tables"), self.tables.values())?;
        write_jsonl(&dir.join("instances.jsonl"), &self.instances)?;
        write_jsonl(&dir.join("sql.jsonl"), &self.sql_preds)?;
        write_jsonl(&dir.join("e2e.jsonl"), &self.e2e_preds)
    }
}

/// Largest-remainder apportionment of `n` over `shares`; equal remainders
/// go to the earlier slot.
pub fn quadrant_counts(n: usize, shares: [f64; 4]) -> [usize; 4] {
    let exact = shares.map(|s| s * n as f64);
    let mut counts = exact.map(|x| x.floor() as usize);
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn validate(spec: &FixtureSpec) -> Result<(), FixtureError> {
    let bad = |m: &str| Err(FixtureError::InvalidSpec(m.to_string()));
    if spec.n == 0 {
        return bad("n must be positive");
    }
    if spec.proportions.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return bad("proportions must lie in [0, 1]");
    }
    if (spec.proportions.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
        return bad("proportions must sum to 1");
    }
    if !(0.0..=1.0).contains(&spec.signal) || !(0.0..=1.0).contains(&spec.train_fraction) {
        return bad("signal and train_fraction must lie in [0, 1]");
    }
    if spec.truncation_budget == Some(0) {
        return bad("truncation budget must be positive");
    }
    Ok(())
}

struct Template {
    question: &'static str,
    sql: &'static str,
    /// Key column substituted for `{key}`.
    key: usize,
}

const TEMPLATES: [Template; 5] = [
    Template {
        question: "what was the score of {key}?",
        sql: "SELECT score FROM t WHERE name = '{key}'",
        key: 0,
    },
    Template {
        question: "which team did {key} play for?",
        sql: "SELECT team FROM t WHERE name = '{key}'",
        key: 0,
    },
    Template {
        question: "in which year did {key} play?",
        sql: "SELECT year FROM t WHERE name = '{key}'",
        key: 0,
    },
    Template {
        question: "how many players played for the {key}?",
        sql: "SELECT COUNT(*) FROM t WHERE team = '{key}'",
        key: 1,
    },
    Template {
        question: "what is the total score of players from the {key}?",
        sql: "SELECT SUM(score) FROM t WHERE team = '{key}'",
        key: 1,
    },
];

fn make_table(id: &str, rows: usize, rng: &mut ChaCha8Rng) -> TableData {
    let header: Vec<String> = ["name", "team", "score", "year"].map(String::from).to_vec();
    let names = rand::seq::index::sample(rng, FIRST.len() * LAST.len(), rows);
    let data: Vec<Vec<String>> = names
        .iter()
        .map(|k| {
            vec![
                format!("{} {}", FIRST[k / LAST.len()], LAST[k % LAST.len()]),
                TEAMS[rng.random_range(0..TEAMS.len())].to_string(),
                rng.random_range(0..100).to_string(),
                rng.random_range(1990..2024).to_string(),
            ]
        })
        .collect();
    TableData::from_strings(id, &header, &data).expect("generated table is well formed")
}

fn execute(sql: &str, table: &TableData) -> Vec<String> {
    run_sql(sql, table)
        .map(|vs| vs.iter().map(|v| v.to_string()).collect())
        .unwrap_or_default()
}

/// Answers obtained by asking the same template about other keys, keeping
/// those that are wrong and pairwise distinct.
fn wrong_answers(t: &Template, key: &str, table: &TableData, gold: &[String], rng: &mut ChaCha8Rng) -> Vec<(String, Vec<String>)> {
    let mut keys: Vec<String> = Vec::new();
    for row in &table.rows {
        let k = row[t.key].to_string();
        if k != key && !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.shuffle(rng);
    let mut out: Vec<(String, Vec<String>)> = Vec::new();
    for k in keys {
        let sql = t.sql.replace("{key}", &k);
        let ans = execute(&sql, table);
        if ans.is_empty() || exact_match(&ans, gold) || out.iter().any(|(_, a)| answers_agree(a, &ans)) {
            continue;
        }
        out.push((sql, ans));
        if out.len() == 2 {
            break;
        }
    }
    // numeric fallbacks keep the answer type of the gold value
    let mut bump = 1000;
    while out.len() < 2 {
        let ans = match gold[0].parse::<i64>() {
            Ok(x) => vec![(x + bump).to_string()],
            Err(_) => vec![format!("{} {bump}", gold[0])],
        };
        bump += 1;
        if !out.iter().any(|(_, a)| answers_agree(a, &ans)) {
            out.push((t.sql.replace("{key}", &format!("{key} {bump}")), ans));
        }
    }
    out
}

fn prediction(id: &str, source: Source, answers: Vec<String>, sql: Option<String>, conf: f64, rng: &mut ChaCha8Rng) -> ModelPrediction {
    let n_tokens: u32 = rng.random_range(1..=8);
    ModelPrediction {
        instance_id: id.to_string(),
        source,
        answers,
        seq_logprob: f64::from(n_tokens) * conf.ln(),
        n_tokens,
        exec_ok: sql.as_ref().map(|_| true),
        sql_text: sql,
        candidates: None,
        candidate_confidences: None,
    }
}

/// Generates a fixture. Quadrant counts follow `proportions` by largest
/// remainder, so each share is within `1/n` of the request.
pub fn make_fixture(spec: &FixtureSpec) -> Result<Fixture, FixtureError> {
    validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let counts = quadrant_counts(spec.n, spec.proportions);
    let mut quadrant: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(q, &c)| std::iter::repeat_n(q, c))
        .collect();
    quadrant.shuffle(&mut rng);
    let n_train = (spec.train_fraction * spec.n as f64).round() as usize;

    let mut fx = Fixture {
        instances: Vec::with_capacity(spec.n),
        tables: BTreeMap::new(),
        sql_preds: Vec::with_capacity(spec.n),
        e2e_preds: Vec::with_capacity(spec.n),
    };
    for (i, &q) in quadrant.iter().enumerate() {
        let id = format!("q{i:05}");
        let table_id = format!("t{i:05}");
        let informative = rng.random_bool(spec.signal);
        let (mut sql_ok, mut e2e_ok) = (q <= 1, q == 0 || q == 2);
        let rows = match (spec.carrier, informative, sql_ok != e2e_ok) {
            (SignalCarrier::TableSize, true, true) if sql_ok => rng.random_range(36..=70),
            (SignalCarrier::TableSize, true, true) => rng.random_range(3..=25),
            _ => rng.random_range(3..=70),
        };
        let table = make_table(&table_id, rows, &mut rng);
        if let Some(budget) = spec.truncation_budget {
            sql_ok = true;
            e2e_ok = !table.linearize(budget).1;
        }

        let t = &TEMPLATES[rng.random_range(0..TEMPLATES.len())];
        let key = table.rows[rng.random_range(0..rows)][t.key].to_string();
        let gold_sql = t.sql.replace("{key}", &key);
        let gold = execute(&gold_sql, &table);
        let wrong = wrong_answers(t, &key, &table, &gold, &mut rng);

        let conf = |ok: bool, rng: &mut ChaCha8Rng| match (spec.carrier, informative) {
            (SignalCarrier::Confidence, true) if ok => rng.random_range(0.70..0.95),
            (SignalCarrier::Confidence, true) => rng.random_range(0.30..0.60),
            _ => rng.random_range(0.30..0.95),
        };
        let (sql_sql, sql_answers) = if sql_ok {
            (gold_sql.clone(), gold.clone())
        } else {
            wrong[0].clone()
        };
        let e2e_answers = match (e2e_ok, sql_ok) {
            (true, _) => gold.clone(),
            (false, true) => wrong[0].1.clone(),
            (false, false) => wrong[1].1.clone(),
        };
        let c = conf(sql_ok, &mut rng);
        fx.sql_preds.push(prediction(&id, Source::Text2Sql, sql_answers, Some(sql_sql), c, &mut rng));
        let c = conf(e2e_ok, &mut rng);
        fx.e2e_preds.push(prediction(&id, Source::E2e, e2e_answers, None, c, &mut rng));

        let mut inst = QaInstance::new(&id, &t.question.replace("{key}", &key), &table_id, gold);
        inst.gold_sql = Some(gold_sql);
        inst.split = if i < n_train { "train" } else { "test" }.to_string();
        fx.instances.push(inst);
        fx.tables.insert(table_id, table);
    }
    Ok(fx)
}
