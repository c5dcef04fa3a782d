//! Selection between the Text-to-SQL and E2E answers, and self-consistency
//! voting over sampled candidates.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::extract_features;
use crate::metrics::{answers_agree, effective_answers, prediction_correct};
use crate::selector::{Label, SelectorError, SelectorModel};
use crate::table::{ModelPrediction, QaInstance, Source, TableData};
use crate::text::normalize_answer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorDecision {
    pub instance_id: String,
    pub chosen_source: Source,
    pub answers: Vec<String>,
    pub score: f64,
    pub rationale_tag: String,
}

#[derive(Debug, thiserror::Error)]
pub enum EnsembleError {
    #[error("no candidates to vote on")]
    EmptyCandidates,
    #[error("{candidates} candidates but {confidences} confidences")]
    ConfidenceMismatch { candidates: usize, confidences: usize },
    #[error("instance `{instance}` has no {side} prediction")]
    MissingPrediction { instance: String, side: Source },
    #[error("instance `{instance}` refers to missing table `{table}`")]
    MissingTable { instance: String, table: String },
    #[error(transparent)]
    Selector(#[from] SelectorError),
}

/// Builds a decision that copies the chosen prediction's answers.
pub fn decide(
    sql: &ModelPrediction,
    e2e: &ModelPrediction,
    source: Source,
    score: f64,
    tag: &str,
) -> SelectorDecision {
    let pred = match source {
        Source::Text2Sql => sql,
        Source::E2e => e2e,
    };
    SelectorDecision {
        instance_id: sql.instance_id.clone(),
        chosen_source: source,
        answers: effective_answers(pred).to_vec(),
        score,
        rationale_tag: tag.to_string(),
    }
}

pub fn predictions_agree(sql: &ModelPrediction, e2e: &ModelPrediction) -> bool {
    answers_agree(effective_answers(sql), effective_answers(e2e))
}

fn agreement(sql: &ModelPrediction, e2e: &ModelPrediction) -> Option<SelectorDecision> {
    predictions_agree(sql, e2e).then(|| decide(sql, e2e, Source::Text2Sql, 1.0, "agreement"))
}

/// Picks a correct side when one exists, SQL when both are.
pub fn select_oracle(instance: &QaInstance, sql: &ModelPrediction, e2e: &ModelPrediction) -> SelectorDecision {
    let gold = &instance.gold_answers;
    match (prediction_correct(sql, gold), prediction_correct(e2e, gold)) {
        (true, true) => decide(sql, e2e, Source::Text2Sql, 1.0, "both_correct"),
        (true, false) => decide(sql, e2e, Source::Text2Sql, 1.0, "sql_correct"),
        (false, true) => decide(sql, e2e, Source::E2e, 0.0, "e2e_correct"),
        (false, false) => decide(sql, e2e, Source::Text2Sql, 1.0, "both_wrong"),
    }
}

/// Agreement short-circuit, then the classifier's label.
pub fn select_by_features(
    model: &SelectorModel,
    instance: &QaInstance,
    table: &TableData,
    sql: &ModelPrediction,
    e2e: &ModelPrediction,
    budget: usize,
) -> Result<SelectorDecision, SelectorError> {
    if let Some(d) = agreement(sql, e2e) {
        return Ok(d);
    }
    let v = extract_features(instance, table, sql, e2e, budget)?.encode();
    let (label, score) = model.predict(&v)?;
    let source = match label {
        Label::SqlCorrect => Source::Text2Sql,
        Label::E2eCorrect => Source::E2e,
    };
    Ok(decide(sql, e2e, source, score, "classifier"))
}

/// Higher length-normalized confidence wins, SQL on ties. The score is the
/// SQL share of the two confidences.
pub fn select_by_confidence(sql: &ModelPrediction, e2e: &ModelPrediction) -> SelectorDecision {
    if let Some(d) = agreement(sql, e2e) {
        return d;
    }
    let (s, e) = (sql.confidence(), e2e.confidence());
    let score = if s + e > 0.0 { s / (s + e) } else { 0.5 };
    let source = if s >= e { Source::Text2Sql } else { Source::E2e };
    decide(sql, e2e, source, score, "confidence")
}

fn vote_key(answers: &[String]) -> Vec<String> {
    let mut k: Vec<String> = answers.iter().map(|a| normalize_answer(a)).collect();
    k.sort();
    k
}

/// Majority vote over candidate answer lists compared as normalized
/// multisets. Ties go to the larger summed confidence, then to the
/// lexicographically smallest normalized form. The returned list is the
/// smallest verbatim member of the winning group, so the result does not
/// depend on candidate order.
pub fn vote_self_consistency(
    candidates: &[Vec<String>],
    confidences: Option<&[f64]>,
) -> Result<Vec<String>, EnsembleError> {
    if candidates.is_empty() {
        return Err(EnsembleError::EmptyCandidates);
    }
    if let Some(c) = confidences {
        if c.len() != candidates.len() {
            return Err(EnsembleError::ConfidenceMismatch {
                candidates: candidates.len(),
                confidences: c.len(),
            });
        }
    }
    struct Group<'a> {
        count: usize,
        confs: Vec<f64>,
        members: Vec<&'a Vec<String>>,
    }
    let mut groups: BTreeMap<Vec<String>, Group> = BTreeMap::new();
    for (i, cand) in candidates.iter().enumerate() {
        let g = groups.entry(vote_key(cand)).or_insert_with(|| Group {
            count: 0,
            confs: Vec::new(),
            members: Vec::new(),
        });
        g.count += 1;
        g.confs.push(confidences.map_or(0.0, |c| c[i]));
        g.members.push(cand);
    }
    let conf_sum = |g: &Group| {
        let mut c = g.confs.clone();
        c.sort_by(f64::total_cmp);
        c.iter().sum::<f64>()
    };
    // BTreeMap iterates keys in ascending order, so the first maximum on
    // (count, confidence) is the lexicographically smallest key.
    let mut best: Option<(&Vec<String>, &Group, f64)> = None;
    for (key, g) in &groups {
        let c = conf_sum(g);
        let better = match &best {
            None => true,
            Some((_, b, bc)) => g.count > b.count || (g.count == b.count && c > *bc),
        };
        if better {
            best = Some((key, g, c));
        }
    }
    let (_, group, _) = best.expect("at least one group");
    Ok(group.members.iter().min().map(|m| (*m).clone()).expect("non-empty group"))
}

/// Candidates of a prediction, falling back to its own answers.
fn candidate_pool(pred: &ModelPrediction) -> Vec<Vec<String>> {
    match &pred.candidates {
        Some(c) if !c.is_empty() => c.clone(),
        _ => vec![effective_answers(pred).to_vec()],
    }
}

/// Votes over the pooled candidates of both sides and returns whichever
/// side's answer gathers more matching candidates (SQL on ties), so the
/// result stays one of the two predictions.
pub fn select_by_vote(sql: &ModelPrediction, e2e: &ModelPrediction) -> SelectorDecision {
    if let Some(d) = agreement(sql, e2e) {
        return d;
    }
    let mut pool = candidate_pool(sql);
    pool.extend(candidate_pool(e2e));
    let votes = |answers: &[String]| pool.iter().filter(|c| answers_agree(c, answers)).count();
    let (s, e) = (votes(effective_answers(sql)), votes(effective_answers(e2e)));
    let score = if s + e > 0 { s as f64 / (s + e) as f64 } else { 0.5 };
    let source = if s >= e { Source::Text2Sql } else { Source::E2e };
    decide(sql, e2e, source, score, "vote")
}

/// Selection strategy for a batch run.
#[derive(Debug, Clone, Copy)]
pub enum Strategy<'a> {
    Oracle,
    Model(&'a SelectorModel),
    Confidence,
    Vote,
}

/// Applies a strategy to every instance, in instance order.
pub fn select_all(
    strategy: Strategy<'_>,
    instances: &[QaInstance],
    tables: &BTreeMap<String, TableData>,
    sql_preds: &HashMap<String, ModelPrediction>,
    e2e_preds: &HashMap<String, ModelPrediction>,
    budget: usize,
) -> Result<Vec<SelectorDecision>, EnsembleError> {
    instances
        .par_iter()
        .map(|inst| {
            let missing = |side| EnsembleError::MissingPrediction {
                instance: inst.id.clone(),
                side,
            };
            let sql = sql_preds.get(&inst.id).ok_or_else(|| missing(Source::Text2Sql))?;
            let e2e = e2e_preds.get(&inst.id).ok_or_else(|| missing(Source::E2e))?;
            Ok(match strategy {
                Strategy::Oracle => select_oracle(inst, sql, e2e),
                Strategy::Confidence => select_by_confidence(sql, e2e),
                Strategy::Vote => select_by_vote(sql, e2e),
                Strategy::Model(model) => {
                    let table = tables.get(&inst.table_id).ok_or_else(|| EnsembleError::MissingTable {
                        instance: inst.id.clone(),
                        table: inst.table_id.clone(),
                    })?;
                    select_by_features(model, inst, table, sql, e2e, budget)?
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn pred(id: &str, source: Source, answers: &[&str], lp: f64) -> ModelPrediction {
        ModelPrediction {
            instance_id: id.into(),
            source,
            answers: answers.iter().map(|s| s.to_string()).collect(),
            seq_logprob: lp,
            n_tokens: 1,
            sql_text: (source == Source::Text2Sql).then(|| "SELECT a FROM t".to_string()),
            exec_ok: None,
            candidates: None,
            candidate_confidences: None,
        }
    }

    fn v(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn oracle_choices() {
        let inst = QaInstance::new("q", "who", "t", v(&["x"]));
        let right_sql = pred("q", Source::Text2Sql, &["x"], -0.1);
        let wrong_sql = pred("q", Source::Text2Sql, &["y"], -0.1);
        let right_e2e = pred("q", Source::E2e, &["X"], -0.1);
        let wrong_e2e = pred("q", Source::E2e, &["z"], -0.1);
        assert_eq!(select_oracle(&inst, &right_sql, &right_e2e).chosen_source, Source::Text2Sql);
        assert_eq!(select_oracle(&inst, &wrong_sql, &right_e2e).chosen_source, Source::E2e);
        let d = select_oracle(&inst, &wrong_sql, &wrong_e2e);
        assert_eq!((d.chosen_source, d.rationale_tag.as_str()), (Source::Text2Sql, "both_wrong"));
        assert_eq!(d.answers, v(&["y"]));
    }

    #[test]
    fn confidence_rule() {
        let sql = pred("q", Source::Text2Sql, &["a"], 0.9f64.ln());
        let e2e = pred("q", Source::E2e, &["b"], 0.4f64.ln());
        assert_eq!(select_by_confidence(&sql, &e2e).chosen_source, Source::Text2Sql);
        let e2e = pred("q", Source::E2e, &["b"], 0.9f64.ln());
        assert_eq!(select_by_confidence(&sql, &e2e).chosen_source, Source::Text2Sql);
        let e2e = pred("q", Source::E2e, &["b"], 0.95f64.ln());
        assert_eq!(select_by_confidence(&sql, &e2e).chosen_source, Source::E2e);
    }

    #[test]
    fn agreement_short_circuits() {
        let sql = pred("q", Source::Text2Sql, &["A", "b"], -5.0);
        let e2e = pred("q", Source::E2e, &["b", "a"], -0.1);
        let d = select_by_confidence(&sql, &e2e);
        assert_eq!((d.chosen_source, d.rationale_tag.as_str()), (Source::Text2Sql, "agreement"));
    }

    #[test]
    fn failed_sql_contributes_no_answers() {
        let mut sql = pred("q", Source::Text2Sql, &["stale"], -0.01);
        sql.exec_ok = Some(false);
        let e2e = pred("q", Source::E2e, &["b"], -3.0);
        let d = select_by_confidence(&sql, &e2e);
        assert_eq!(d.chosen_source, Source::Text2Sql);
        assert!(d.answers.is_empty());
    }

    #[test]
    fn majority_vote() {
        let c: Vec<Vec<String>> = ["a", "a", "b", "a", "c"].iter().map(|s| v(&[s])).collect();
        assert_eq!(vote_self_consistency(&c, None).unwrap(), v(&["a"]));
    }

    #[test]
    fn tie_broken_by_confidence_then_lexicographic() {
        let c: Vec<Vec<String>> = ["a", "a", "b", "b", "c"].iter().map(|s| v(&[s])).collect();
        let conf = [0.1, 0.1, 0.4, 0.4, 0.9];
        assert_eq!(vote_self_consistency(&c, Some(&conf)).unwrap(), v(&["b"]));
        assert_eq!(vote_self_consistency(&c, None).unwrap(), v(&["a"]));
    }

    #[test]
    fn single_candidate_and_errors() {
        assert_eq!(vote_self_consistency(&[v(&["x", "y"])], None).unwrap(), v(&["x", "y"]));
        assert!(matches!(vote_self_consistency(&[], None), Err(EnsembleError::EmptyCandidates)));
        assert!(matches!(
            vote_self_consistency(&[v(&["x"])], Some(&[0.1, 0.2])),
            Err(EnsembleError::ConfidenceMismatch { .. })
        ));
    }

    #[test]
    fn vote_selection_counts_pooled_candidates() {
        let mut sql = pred("q", Source::Text2Sql, &["a"], -0.1);
        sql.candidates = Some(vec![v(&["a"]), v(&["b"]), v(&["b"])]);
        let mut e2e = pred("q", Source::E2e, &["b"], -0.1);
        e2e.candidates = Some(vec![v(&["b"]), v(&["a"])]);
        let d = select_by_vote(&sql, &e2e);
        assert_eq!(d.chosen_source, Source::E2e);
        assert_eq!(d.answers, v(&["b"]));
    }

    proptest! {
        #[test]
        fn vote_is_permutation_invariant(
            cands in prop::collection::vec(prop::collection::vec("[ab]|A| a", 1..3), 1..6),
            confs in prop::collection::vec(0.0f64..1.0, 6),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let conf = &confs[..cands.len()];
            let mut paired: Vec<(Vec<String>, f64)> = cands.iter().cloned().zip(conf.iter().copied()).collect();
            paired.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let (pc, pf): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
            prop_assert_eq!(
                vote_self_consistency(&cands, Some(conf)).unwrap(),
                vote_self_consistency(&pc, Some(&pf)).unwrap()
            );
        }
    }
}
