//! Accuracy reports over instances, predictions, and selector decisions.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::ensemble::SelectorDecision;
use crate::metrics::{answers_agree, exact_match, prediction_correct, ratio, Quadrants};
use crate::table::{ModelPrediction, QaInstance, Source, TableData};

/// Row-count buckets as inclusive `(low, high)` ranges; `None` is open.
pub const ROW_BUCKETS: [(usize, Option<usize>); 5] =
    [(1, Some(10)), (11, Some(20)), (21, Some(30)), (31, Some(50)), (51, None)];

pub fn bucket_label(b: (usize, Option<usize>)) -> String {
    match b.1 {
        Some(hi) => format!("{}-{hi}", b.0),
        None => format!("{}+", b.0),
    }
}

/// Index of the bucket holding `rows`; empty tables fall in the first.
pub fn bucket_index(rows: usize) -> usize {
    ROW_BUCKETS
        .iter()
        .position(|(_, hi)| hi.is_none_or(|h| rows <= h))
        .expect("last bucket is open")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("decision for unknown instance `{0}`")]
    MissingInstance(String),
    #[error("no decision for instance `{0}`")]
    MissingDecision(String),
    #[error("instance `{instance}` has no {side} prediction")]
    MissingPrediction { instance: String, side: Source },
    #[error("instance `{instance}` refers to missing table `{table}`")]
    MissingTable { instance: String, table: String },
    #[error("instance `{0}` has no counterpart in the paired set")]
    UnpairedInstance(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAccuracy {
    pub n: usize,
    pub sql_accuracy: f64,
    pub e2e_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketAccuracy {
    pub rows: String,
    #[serde(flatten)]
    pub acc: GroupAccuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub sql_accuracy: f64,
    pub e2e_accuracy: f64,
    /// Accuracy of the selector decisions, when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    pub oracle_accuracy: f64,
    pub quadrants: Quadrants,
    pub buckets: Vec<BucketAccuracy>,
    pub per_perturbation: BTreeMap<String, GroupAccuracy>,
}

#[derive(Default)]
struct Tally {
    n: usize,
    sql: usize,
    e2e: usize,
    sel: usize,
}

impl Tally {
    fn add(&mut self, sql: bool, e2e: bool, sel: Option<bool>) {
        self.n += 1;
        self.sql += usize::from(sql);
        self.e2e += usize::from(e2e);
        self.sel += usize::from(sel == Some(true));
    }

    fn finish(&self, with_sel: bool) -> GroupAccuracy {
        GroupAccuracy {
            n: self.n,
            sql_accuracy: ratio(self.sql, self.n),
            e2e_accuracy: ratio(self.e2e, self.n),
            accuracy: with_sel.then(|| ratio(self.sel, self.n)),
        }
    }
}

/// Scores both base models, the oracle, and optionally a selector over all
/// instances.
pub fn evaluate(
    instances: &[QaInstance],
    tables: &BTreeMap<String, TableData>,
    sql_preds: &HashMap<String, ModelPrediction>,
    e2e_preds: &HashMap<String, ModelPrediction>,
    decisions: Option<&[SelectorDecision]>,
) -> Result<EvalReport, EvalError> {
    let by_id: Option<HashMap<&str, &SelectorDecision>> =
        decisions.map(|ds| ds.iter().map(|d| (d.instance_id.as_str(), d)).collect());
    if let Some(map) = &by_id {
        let known: std::collections::HashSet<&str> = instances.iter().map(|i| i.id.as_str()).collect();
        if let Some(id) = map.keys().find(|id| !known.contains(*id)) {
            return Err(EvalError::MissingInstance(id.to_string()));
        }
    }
    let with_sel = by_id.is_some();
    let mut quadrants = Quadrants::default();
    let mut total = Tally::default();
    let mut buckets: Vec<Tally> = ROW_BUCKETS.iter().map(|_| Tally::default()).collect();
    let mut tags: BTreeMap<String, Tally> = BTreeMap::new();
    for inst in instances {
        let missing = |side| EvalError::MissingPrediction {
            instance: inst.id.clone(),
            side,
        };
        let sql = sql_preds.get(&inst.id).ok_or_else(|| missing(Source::Text2Sql))?;
        let e2e = e2e_preds.get(&inst.id).ok_or_else(|| missing(Source::E2e))?;
        let table = tables.get(&inst.table_id).ok_or_else(|| EvalError::MissingTable {
            instance: inst.id.clone(),
            table: inst.table_id.clone(),
        })?;
        let s = prediction_correct(sql, &inst.gold_answers);
        let e = prediction_correct(e2e, &inst.gold_answers);
        let sel = match &by_id {
            Some(map) => {
                let d = map.get(inst.id.as_str()).ok_or_else(|| EvalError::MissingDecision(inst.id.clone()))?;
                Some(exact_match(&d.answers, &inst.gold_answers))
            }
            None => None,
        };
        quadrants.add(s, e);
        total.add(s, e, sel);
        buckets[bucket_index(table.n_rows())].add(s, e, sel);
        if let Some(tag) = inst.perturbation_tag {
            tags.entry(tag.to_string()).or_default().add(s, e, sel);
        }
    }
    let overall = total.finish(with_sel);
    Ok(EvalReport {
        n: total.n,
        sql_accuracy: overall.sql_accuracy,
        e2e_accuracy: overall.e2e_accuracy,
        accuracy: overall.accuracy,
        oracle_accuracy: quadrants.oracle_accuracy(),
        quadrants,
        buckets: ROW_BUCKETS
            .iter()
            .zip(&buckets)
            .map(|(b, t)| BucketAccuracy {
                rows: bucket_label(*b),
                acc: t.finish(with_sel),
            })
            .collect(),
        per_perturbation: tags.iter().map(|(k, t)| (k.clone(), t.finish(with_sel))).collect(),
    })
}

impl EvalReport {
    /// Aligned plain-text summary.
    pub fn to_text(&self) -> String {
        let pct = |x: f64| format!("{:6.2}", 100.0 * x);
        let mut out = String::new();
        out.push_str(&format!("instances      {}\n", self.n));
        out.push_str(&format!("text-to-sql    {}\n", pct(self.sql_accuracy)));
        out.push_str(&format!("e2e            {}\n", pct(self.e2e_accuracy)));
        if let Some(a) = self.accuracy {
            out.push_str(&format!("ensemble       {}\n", pct(a)));
        }
        out.push_str(&format!("oracle         {}\n", pct(self.oracle_accuracy)));
        let q = &self.quadrants;
        out.push_str(&format!(
            "quadrants      both={} sql_only={} e2e_only={} neither={}\n",
            q.both_correct, q.sql_only, q.e2e_only, q.both_wrong
        ));
        out.push_str("rows           n      sql    e2e    sel\n");
        for b in &self.buckets {
            out.push_str(&format!(
                "{:<14} {:<6} {} {} {}\n",
                b.rows,
                b.acc.n,
                pct(b.acc.sql_accuracy),
                pct(b.acc.e2e_accuracy),
                b.acc.accuracy.map_or("     -".to_string(), pct)
            ));
        }
        out
    }
}

/// Robustness of one answer source under one perturbation family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub perturbation: String,
    pub n: usize,
    pub pre_accuracy: f64,
    pub post_accuracy: f64,
    /// Post-correct share among pre-correct pairs.
    pub r_acc_ratio: f64,
    /// Share of pairs whose post answer equals the pre answer.
    pub r_acc_consistency: f64,
}

/// Answers keyed by instance id, from decisions.
pub fn answers_from_decisions(decisions: &[SelectorDecision]) -> HashMap<String, Vec<String>> {
    decisions
        .iter()
        .map(|d| (d.instance_id.clone(), d.answers.clone()))
        .collect()
}

/// Answers keyed by instance id, from predictions (failed SQL yields none).
pub fn answers_from_predictions(preds: &HashMap<String, ModelPrediction>) -> HashMap<String, Vec<String>> {
    preds
        .iter()
        .map(|(k, p)| (k.clone(), crate::metrics::effective_answers(p).to_vec()))
        .collect()
}

/// Pairs post-perturbation instances with their originals by id and
/// reports one row per perturbation tag plus an `all` row.
pub fn robustness_report(
    pre_instances: &[QaInstance],
    post_instances: &[QaInstance],
    pre_answers: &HashMap<String, Vec<String>>,
    post_answers: &HashMap<String, Vec<String>>,
) -> Result<Vec<RobustnessRow>, EvalError> {
    #[derive(Default)]
    struct Acc {
        n: usize,
        pre: usize,
        post: usize,
        both: usize,
        same: usize,
    }
    let pre_by_id: HashMap<&str, &QaInstance> = pre_instances.iter().map(|i| (i.id.as_str(), i)).collect();
    let mut groups: BTreeMap<String, Acc> = BTreeMap::new();
    for post in post_instances {
        let pre = pre_by_id
            .get(post.id.as_str())
            .ok_or_else(|| EvalError::UnpairedInstance(post.id.clone()))?;
        let a_pre = pre_answers
            .get(&post.id)
            .ok_or_else(|| EvalError::UnpairedInstance(post.id.clone()))?;
        let a_post = post_answers
            .get(&post.id)
            .ok_or_else(|| EvalError::UnpairedInstance(post.id.clone()))?;
        let ok_pre = exact_match(a_pre, &pre.gold_answers);
        let ok_post = exact_match(a_post, &post.gold_answers);
        let tag = post
            .perturbation_tag
            .map_or_else(|| "untagged".to_string(), |t| t.to_string());
        for key in [tag, "all".to_string()] {
            let g = groups.entry(key).or_default();
            g.n += 1;
            g.pre += usize::from(ok_pre);
            g.post += usize::from(ok_post);
            g.both += usize::from(ok_pre && ok_post);
            g.same += usize::from(answers_agree(a_pre, a_post));
        }
    }
    Ok(groups
        .into_iter()
        .map(|(k, g)| RobustnessRow {
            perturbation: k,
            n: g.n,
            pre_accuracy: ratio(g.pre, g.n),
            post_accuracy: ratio(g.post, g.n),
            r_acc_ratio: ratio(g.both, g.pre),
            r_acc_consistency: ratio(g.same, g.n),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Perturbation;

    fn v(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn pred(id: &str, source: Source, answers: &[&str]) -> ModelPrediction {
        ModelPrediction {
            instance_id: id.into(),
            source,
            answers: v(answers),
            seq_logprob: -0.1,
            n_tokens: 1,
            sql_text: (source == Source::Text2Sql).then(|| "SELECT a FROM t".to_string()),
            exec_ok: None,
            candidates: None,
            candidate_confidences: None,
        }
    }

    fn setup() -> (Vec<QaInstance>, BTreeMap<String, TableData>, HashMap<String, ModelPrediction>, HashMap<String, ModelPrediction>) {
        let small = TableData::from_csv_str("s", "a\n1\n").unwrap();
        let rows: String = (0..25).map(|i| format!("{i}\n")).collect();
        let big = TableData::from_csv_str("b", &format!("a\n{rows}")).unwrap();
        let tables = BTreeMap::from([("s".to_string(), small), ("b".to_string(), big)]);
        let insts = vec![
            QaInstance::new("1", "q", "s", v(&["x"])),
            QaInstance::new("2", "q", "s", v(&["x"])),
            QaInstance::new("3", "q", "b", v(&["x"])),
            QaInstance::new("4", "q", "b", v(&["x"])),
        ];
        let sql = [("1", "x"), ("2", "x"), ("3", "y"), ("4", "y")];
        let e2e = [("1", "x"), ("2", "y"), ("3", "x"), ("4", "z")];
        let sp = sql.iter().map(|(i, a)| (i.to_string(), pred(i, Source::Text2Sql, &[a]))).collect();
        let ep = e2e.iter().map(|(i, a)| (i.to_string(), pred(i, Source::E2e, &[a]))).collect();
        (insts, tables, sp, ep)
    }

    #[test]
    fn quadrants_and_buckets() {
        let (insts, tables, sp, ep) = setup();
        let r = evaluate(&insts, &tables, &sp, &ep, None).unwrap();
        assert_eq!(r.quadrants, Quadrants { both_correct: 1, sql_only: 1, e2e_only: 1, both_wrong: 1 });
        assert_eq!(r.sql_accuracy, 0.5);
        assert_eq!(r.oracle_accuracy, 0.75);
        assert_eq!(r.buckets[0].acc.n, 2);
        assert_eq!(r.buckets[2].acc.n, 2);
        assert_eq!(r.buckets[2].rows, "21-30");
        assert_eq!(r.accuracy, None);
    }

    #[test]
    fn decisions_are_scored_and_checked() {
        let (insts, tables, sp, ep) = setup();
        let ds: Vec<SelectorDecision> = insts
            .iter()
            .map(|i| SelectorDecision {
                instance_id: i.id.clone(),
                chosen_source: Source::E2e,
                answers: v(&["x"]),
                score: 0.0,
                rationale_tag: "t".into(),
            })
            .collect();
        let r = evaluate(&insts, &tables, &sp, &ep, Some(&ds)).unwrap();
        assert_eq!(r.accuracy, Some(1.0));
        let mut extra = ds.clone();
        extra[0].instance_id = "zzz".into();
        assert_eq!(
            evaluate(&insts, &tables, &sp, &ep, Some(&extra)),
            Err(EvalError::MissingInstance("zzz".into()))
        );
    }

    #[test]
    fn bucket_edges() {
        assert_eq!(bucket_index(0), 0);
        assert_eq!(bucket_index(10), 0);
        assert_eq!(bucket_index(11), 1);
        assert_eq!(bucket_index(50), 3);
        assert_eq!(bucket_index(51), 4);
        assert_eq!(bucket_index(10_000), 4);
    }

    #[test]
    fn robustness_variants() {
        let mut pre = vec![
            QaInstance::new("a", "q", "t", v(&["1"])),
            QaInstance::new("b", "q", "t", v(&["2"])),
            QaInstance::new("c", "q", "t", v(&["3"])),
        ];
        let mut post = pre.clone();
        for p in &mut post {
            p.perturbation_tag = Some(Perturbation::SynonymReplacement);
        }
        pre[0].split = "pre".into();
        let pre_ans: HashMap<String, Vec<String>> =
            [("a", "1"), ("b", "2"), ("c", "9")].iter().map(|(k, a)| (k.to_string(), v(&[a]))).collect();
        let same = robustness_report(&pre, &post, &pre_ans, &pre_ans).unwrap();
        assert!(same.iter().all(|r| r.r_acc_ratio == 1.0 && r.r_acc_consistency == 1.0));

        let post_ans: HashMap<String, Vec<String>> =
            [("a", "1"), ("b", "7"), ("c", "3")].iter().map(|(k, a)| (k.to_string(), v(&[a]))).collect();
        let rows = robustness_report(&pre, &post, &pre_ans, &post_ans).unwrap();
        let syn = rows.iter().find(|r| r.perturbation == "synonym_replacement").unwrap();
        // pre correct {a, b}; post correct {a, c}; unchanged answers {a}
        assert_eq!(syn.r_acc_ratio, 0.5);
        assert!((syn.r_acc_consistency - 1.0 / 3.0).abs() < 1e-12);
        assert!((syn.pre_accuracy - 2.0 / 3.0).abs() < 1e-12);

        post.push(QaInstance::new("zz", "q", "t", v(&["1"])));
        assert!(matches!(
            robustness_report(&pre, &post, &pre_ans, &post_ans),
            Err(EvalError::UnpairedInstance(_))
        ));
    }
}
