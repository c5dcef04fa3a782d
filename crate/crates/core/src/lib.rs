//! Table question answering ensembles.
//!
//! Executes and repairs single-table SQL over in-memory tables, extracts
//! answer-selection features from paired Text-to-SQL and end-to-end model
//! predictions, trains selectors that pick the more probable correct answer,
//! and evaluates ensembles.

pub mod annotation;
pub mod cli;
pub mod ensemble;
pub mod eval;
pub mod features;
pub mod fixture;
pub mod metrics;
pub mod reference;
pub mod repair;
pub mod router;
pub mod selector;
pub mod sql;
pub mod table;
pub mod text;
