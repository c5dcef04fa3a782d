mod support;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tqa_core::ensemble::{select_all, Strategy};
use tqa_core::eval::evaluate;
use tqa_core::features::extract_features;
use tqa_core::fixture::{make_fixture, FixtureSpec};
use tqa_core::repair::repair_sql;
use tqa_core::sql::run_sql;
use tqa_core::table::{TableData, DEFAULT_BUDGET};

use support::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn executor_agrees_with_naive_evaluator(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_table(&mut rng);
        let q = random_query(&t, &mut rng);
        let sql = render(&q, &t.header);
        let ours = run_sql(&sql, &t.table())
            .map(|v| v.iter().map(|c| c.to_string()).collect::<Vec<_>>())
            .map_err(|_| ());
        prop_assert_eq!(ours, naive_eval(&q, &t.naive()), "{}", sql);
    }

    #[test]
    fn repair_leaves_clean_queries_alone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = repair_case(&mut rng);
        let r = repair_sql(&case.clean(), &case.table).unwrap();
        prop_assert!(r.edits.is_empty());
        prop_assert_eq!(r.repaired_sql, case.clean());
    }

    #[test]
    fn repair_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = repair_case(&mut rng);
        let (typo, _) = case.with_typo(&mut rng);
        if let Ok(first) = repair_sql(&typo, &case.table) {
            let second = repair_sql(&first.repaired_sql, &case.table).unwrap();
            prop_assert!(second.edits.is_empty(), "{:?}", second);
        }
    }

    #[test]
    fn repair_never_breaks_a_working_query(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = repair_case(&mut rng);
        let (typo, _) = case.with_typo(&mut rng);
        if run_sql(&typo, &case.table).is_ok() {
            let r = repair_sql(&typo, &case.table).unwrap();
            prop_assert!(run_sql(&r.repaired_sql, &case.table).is_ok());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn features_ignore_row_order_on_untruncated_tables(seed in any::<u64>()) {
        let fx = make_fixture(&FixtureSpec::new(6, [0.25; 4], 0.5, seed)).unwrap();
        let (sql, e2e) = (fx.sql_map(), fx.e2e_map());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for inst in &fx.instances {
            let t = &fx.tables[&inst.table_id];
            if t.linearize(DEFAULT_BUDGET).1 {
                continue;
            }
            let mut rows = t.rows.clone();
            rows.shuffle(&mut rng);
            let shuffled = TableData::new(t.id.clone(), t.header.clone(), rows).unwrap();
            let a = extract_features(inst, t, &sql[&inst.id], &e2e[&inst.id], DEFAULT_BUDGET).unwrap();
            let b = extract_features(inst, &shuffled, &sql[&inst.id], &e2e[&inst.id], DEFAULT_BUDGET).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn header_overlap_is_bounded(seed in any::<u64>()) {
        let fx = make_fixture(&FixtureSpec::new(6, [0.25; 4], 0.5, seed)).unwrap();
        let (sql, e2e) = (fx.sql_map(), fx.e2e_map());
        for inst in &fx.instances {
            let t = &fx.tables[&inst.table_id];
            let f = extract_features(inst, t, &sql[&inst.id], &e2e[&inst.id], DEFAULT_BUDGET).unwrap();
            prop_assert!(f.header_overlap <= f.n_cols);
            prop_assert!(f.header_overlap <= f.question_len);
        }
    }

    #[test]
    fn oracle_bounds_every_selector(seed in any::<u64>(), signal in 0.0f64..=1.0) {
        let fx = make_fixture(&FixtureSpec::new(120, [0.4, 0.2, 0.2, 0.2], signal, seed)).unwrap();
        let (sql, e2e) = (fx.sql_map(), fx.e2e_map());
        let oracle = select_all(Strategy::Oracle, &fx.instances, &fx.tables, &sql, &e2e, DEFAULT_BUDGET).unwrap();
        let best = evaluate(&fx.instances, &fx.tables, &sql, &e2e, Some(&oracle)).unwrap();
        prop_assert_eq!(best.accuracy, Some(best.oracle_accuracy));
        prop_assert_eq!(
            best.quadrants.n(),
            best.quadrants.both_correct + best.quadrants.sql_only + best.quadrants.e2e_only + best.quadrants.both_wrong
        );
        for strategy in [Strategy::Confidence, Strategy::Vote] {
            let ds = select_all(strategy, &fx.instances, &fx.tables, &sql, &e2e, DEFAULT_BUDGET).unwrap();
            let r = evaluate(&fx.instances, &fx.tables, &sql, &e2e, Some(&ds)).unwrap();
            prop_assert!(r.accuracy.unwrap() <= best.accuracy.unwrap());
        }
    }
}
