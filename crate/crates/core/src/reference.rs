//! Published accuracies kept as reference data. None of these can be
//! reproduced without the original model predictions; they are used for
//! arithmetic consistency checks and for labelling reports.

use crate::metrics::Quadrants;
use crate::table::Perturbation;

/// Test accuracies (percent) of the strongest single models, the
/// random-forest ensemble, and the oracle on one benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkRow {
    pub name: &'static str,
    pub sql: f64,
    pub e2e: f64,
    pub ensemble_rf: f64,
    pub ensemble_llm: f64,
    pub oracle: f64,
    /// Reported share of questions solved by exactly one model.
    pub exclusive: f64,
}

pub const WTQ: BenchmarkRow = BenchmarkRow {
    name: "wtq",
    sql: 64.7,
    e2e: 62.6,
    ensemble_rf: 71.6,
    ensemble_llm: 70.4,
    oracle: 77.5,
    exclusive: 27.6,
};

pub const WIKISQL: BenchmarkRow = BenchmarkRow {
    name: "wikisql",
    sql: 89.6,
    e2e: 89.0,
    ensemble_rf: 93.2,
    ensemble_llm: 93.0,
    oracle: 95.1,
    exclusive: 11.7,
};

impl BenchmarkRow {
    /// Percent shares `[both, sql_only, e2e_only, neither]` solved by
    /// inclusion-exclusion from the individual and oracle accuracies.
    pub fn quadrant_shares(&self) -> [f64; 4] {
        let both = self.sql + self.e2e - self.oracle;
        [both, self.sql - both, self.e2e - both, 100.0 - self.oracle]
    }

    /// Integer quadrant counts for `n` instances, `n` a multiple of 1000 so
    /// that one-decimal percentages are exact.
    pub fn quadrants(&self, n: usize) -> Quadrants {
        let per = n as f64 / 100.0;
        let [b, s, e, w] = self.quadrant_shares().map(|x| (x * per).round() as usize);
        Quadrants {
            both_correct: b,
            sql_only: s,
            e2e_only: e,
            both_wrong: w,
        }
    }
}

/// End-to-end accuracy of alternative selector classifiers on WTQ.
pub const CLASSIFIER_COMPARISON: [(&str, f64); 5] = [
    ("random_forest", 71.6),
    ("logistic_regression", 70.8),
    ("svm", 70.1),
    ("mlp", 70.0),
    ("knn", 66.8),
];

/// Heuristic LLM router: (benchmark, accuracy, selection accuracy).
pub const ROUTER: [(&str, f64, f64); 2] = [("wtq", 74.4, 89.0), ("wikisql", 93.6, 87.1)];

/// Self-consistency on WTQ: Text-to-SQL, E2E, and their ensemble.
pub const SELF_CONSISTENCY: [(&str, f64); 3] = [("text2sql", 65.2), ("e2e", 62.9), ("ensemble", 71.8)];

/// Training split used for the annotation-efficiency experiment.
pub const TRAIN_RECORDS: usize = 11_340;
pub const TRAIN_WITH_SQL: usize = 9_032;

/// One perturbation row: pre/post accuracy and R-Acc for each model, and
/// the ensemble's oracle pre/post and post accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessRow {
    pub perturbation: Perturbation,
    pub sql: (f64, f64, f64),
    pub e2e: (f64, f64, f64),
    pub oracle: (f64, f64),
    pub ensemble_post: f64,
}

impl RobustnessRow {
    pub fn best_individual_post(&self) -> f64 {
        self.sql.1.max(self.e2e.1)
    }

    pub fn ensemble_gain(&self) -> f64 {
        self.ensemble_post - self.best_individual_post()
    }
}

pub const ROBUSTNESS: [RobustnessRow; 7] = [
    RobustnessRow {
        perturbation: Perturbation::SynonymReplacement,
        sql: (84.7, 72.6, 82.9),
        e2e: (84.7, 73.0, 83.4),
        oracle: (93.1, 86.5),
        ensemble_post: 79.6,
    },
    RobustnessRow {
        perturbation: Perturbation::AbbreviationReplacement,
        sql: (84.4, 76.2, 87.0),
        e2e: (84.2, 74.3, 85.7),
        oracle: (92.9, 87.5),
        ensemble_post: 81.2,
    },
    RobustnessRow {
        perturbation: Perturbation::ColumnExtension,
        sql: (89.6, 48.7, 52.9),
        e2e: (91.6, 54.8, 59.1),
        oracle: (95.5, 58.5),
        ensemble_post: 56.3,
    },
    RobustnessRow {
        perturbation: Perturbation::ColumnAdding,
        sql: (81.0, 79.7, 94.7),
        e2e: (81.5, 70.3, 83.4),
        oracle: (90.7, 87.5),
        ensemble_post: 83.8,
    },
    RobustnessRow {
        perturbation: Perturbation::WordParaphrase,
        sql: (87.3, 63.7, 70.6),
        e2e: (88.3, 66.0, 72.9),
        oracle: (94.3, 73.8),
        ensemble_post: 68.8,
    },
    RobustnessRow {
        perturbation: Perturbation::SentenceParaphrase,
        sql: (83.6, 71.5, 81.3),
        e2e: (83.8, 72.3, 83.1),
        oracle: (92.2, 83.7),
        ensemble_post: 78.0,
    },
    RobustnessRow {
        perturbation: Perturbation::Mix,
        sql: (87.0, 60.3, 66.8),
        e2e: (88.5, 63.4, 69.5),
        oracle: (94.0, 72.0),
        ensemble_post: 66.8,
    },
];
