//! Experiment runner for `lossgeom`: loss analysis reports, the power-predictor
//! experiment, deficiency runs on data files and truncation comparisons.
//!
//! Each command builds a report, queues `report.json` plus a CSV table in an
//! [`Outputs`] buffer, and the caller writes the buffer once at the end.

pub mod analyze;
pub mod compare;
pub mod config;
pub mod deficiency;
pub mod error;
pub mod output;
pub mod runner;
pub mod selftest;
pub mod specs;
pub mod theorem2;

pub use analyze::{analyze, cmd_analyze, AnalysisReport};
pub use compare::{cmd_compare_truncated, compare_truncated, CompareReport, Triple};
pub use config::{ExperimentConfig, ExperimentKind, PoolEntry};
pub use deficiency::{cmd_deficiency, run_deficiency, DeficiencyReport};
pub use error::{Result, RunError};
pub use output::{Outputs, Quantity, Table};
pub use runner::execute;
pub use selftest::{cmd_selftest, selftest, SelftestReport};
pub use theorem2::{cmd_theorem2, theorem2, Theorem2Report};
