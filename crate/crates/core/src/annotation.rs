//! Accuracy as a function of the share of instances with SQL available.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{decide, select_by_features, SelectorDecision};
use crate::metrics::{exact_match, ratio};
use crate::selector::{build_training_set, train_forest, ForestParams, SelectorError, SelectorModel};
use crate::table::{ModelPrediction, QaInstance, Source, TableData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub accuracy: f64,
    /// Annotated instances among the evaluated (non-train) ones.
    pub n_annotated: usize,
    /// Size of the masked training pool.
    pub n_train: usize,
}

#[derive(Debug, Clone)]
pub struct CurveConfig {
    pub seed: u64,
    pub forest: ForestParams,
    pub forest_seed: u64,
    pub budget: usize,
}

/// Instances whose split is `train` form the training pool; all others are
/// evaluated. Annotated sets are nested: one permutation drawn from `seed`
/// is cut at `round(p * n)` for every `p`. Unannotated instances answer with
/// E2E. When no evaluated instance is annotated no model is trained.
pub fn annotation_curve(
    instances: &[QaInstance],
    tables: &BTreeMap<String, TableData>,
    sql_preds: &HashMap<String, ModelPrediction>,
    e2e_preds: &HashMap<String, ModelPrediction>,
    fractions: &[f64],
    config: &CurveConfig,
) -> Result<Vec<CurvePoint>, SelectorError> {
    if fractions.iter().any(|p| !(0.0..=1.0).contains(p)) || fractions.windows(2).any(|w| w[0] > w[1]) {
        return Err(SelectorError::InvalidParams("fractions must be sorted and lie in [0, 1]".into()));
    }
    let mut order: Vec<&str> = instances.iter().map(|i| i.id.as_str()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let (train, eval): (Vec<&QaInstance>, Vec<&QaInstance>) = instances.iter().partition(|i| i.split == "train");

    let mut out = Vec::with_capacity(fractions.len());
    for &p in fractions {
        let cut = (p * order.len() as f64).round() as usize;
        let annotated: HashSet<&str> = order[..cut].iter().copied().collect();
        let pool: Vec<QaInstance> = train
            .iter()
            .filter(|i| annotated.contains(i.id.as_str()))
            .map(|i| (*i).clone())
            .collect();
        let data = build_training_set(&pool, tables, sql_preds, e2e_preds, config.budget)?;
        let n_annotated = eval.iter().filter(|i| annotated.contains(i.id.as_str())).count();
        let model = if n_annotated > 0 {
            data.require_classes(2)?;
            Some(SelectorModel::Forest(train_forest(&data, config.forest, config.forest_seed)?))
        } else {
            None
        };

        let mut correct = 0;
        for inst in &eval {
            let (sql, e2e) = pair(inst, sql_preds, e2e_preds)?;
            let decision: SelectorDecision = match &model {
                Some(m) if annotated.contains(inst.id.as_str()) => {
                    let table = tables.get(&inst.table_id).ok_or_else(|| SelectorError::MissingTable {
                        instance: inst.id.clone(),
                        table: inst.table_id.clone(),
                    })?;
                    select_by_features(m, inst, table, sql, e2e, config.budget)?
                }
                _ => decide(sql, e2e, Source::E2e, 0.0, "unannotated"),
            };
            correct += usize::from(exact_match(&decision.answers, &inst.gold_answers));
        }
        out.push(CurvePoint {
            p,
            accuracy: ratio(correct, eval.len()),
            n_annotated,
            n_train: data.len(),
        });
    }
    Ok(out)
}

fn pair<'a>(
    inst: &QaInstance,
    sql_preds: &'a HashMap<String, ModelPrediction>,
    e2e_preds: &'a HashMap<String, ModelPrediction>,
) -> Result<(&'a ModelPrediction, &'a ModelPrediction), SelectorError> {
    match (sql_preds.get(&inst.id), e2e_preds.get(&inst.id)) {
        (Some(s), Some(e)) => Ok((s, e)),
        _ => Err(SelectorError::InvalidParams(format!("instance `{}` lacks a prediction pair", inst.id))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{select_all, Strategy};
    use crate::eval::evaluate;
    use crate::fixture::{make_fixture, FixtureSpec};
    use crate::reference::WTQ;
    use crate::table::DEFAULT_BUDGET;

    fn config(seed: u64) -> CurveConfig {
        CurveConfig {
            seed,
            forest: ForestParams {
                n_trees: 25,
                ..ForestParams::default()
            },
            forest_seed: 7,
            budget: DEFAULT_BUDGET,
        }
    }

    #[test]
    fn endpoints() {
        let fx = make_fixture(&FixtureSpec::shaped_like(&WTQ, 400, 1.0, 5)).unwrap();
        let (sql, e2e) = (fx.sql_map(), fx.e2e_map());
        let cfg = config(1);
        let curve = annotation_curve(&fx.instances, &fx.tables, &sql, &e2e, &[0.0, 1.0], &cfg).unwrap();

        let test = fx.split("test");
        let plain = evaluate(&test, &fx.tables, &sql, &e2e, None).unwrap();
        assert_eq!(curve[0].accuracy, plain.e2e_accuracy);
        assert_eq!(curve[0].n_annotated, 0);

        let data = build_training_set(&fx.split("train"), &fx.tables, &sql, &e2e, cfg.budget).unwrap();
        let model = SelectorModel::Forest(train_forest(&data, cfg.forest, cfg.forest_seed).unwrap());
        let ds = select_all(Strategy::Model(&model), &test, &fx.tables, &sql, &e2e, cfg.budget).unwrap();
        let full = evaluate(&test, &fx.tables, &sql, &e2e, Some(&ds)).unwrap();
        assert_eq!(Some(curve[1].accuracy), full.accuracy);
        assert_eq!(curve[1].n_annotated, test.len());
    }

    #[test]
    fn unsorted_fractions_rejected() {
        let fx = make_fixture(&FixtureSpec::new(20, [0.25; 4], 1.0, 1)).unwrap();
        let err = annotation_curve(&fx.instances, &fx.tables, &fx.sql_map(), &fx.e2e_map(), &[0.5, 0.1], &config(0));
        assert!(matches!(err, Err(SelectorError::InvalidParams(_))));
    }

    #[test]
    fn tiny_fraction_is_degenerate() {
        let fx = make_fixture(&FixtureSpec::shaped_like(&WTQ, 400, 1.0, 5)).unwrap();
        let err = annotation_curve(&fx.instances, &fx.tables, &fx.sql_map(), &fx.e2e_map(), &[0.005], &config(3));
        assert!(matches!(err, Err(SelectorError::DegenerateData(_))), "{err:?}");
    }
}
