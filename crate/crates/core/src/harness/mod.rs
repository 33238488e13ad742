//! Benchmark corpus, end-to-end detection experiment, and reporting.

pub mod corpus;
pub mod experiment;
pub mod recipes;
pub mod report;

pub use experiment::{
    run_experiment, verify_golden_cleanliness, verify_non_interference, DetectionReport,
    DetectionSummary, ExperimentOutput, HarnessError, InstanceRecord,
};
pub use recipes::{fixture, BenchmarkFixture, CampaignKind, DirectedSet, MiningRecipe};
pub use report::{consolidate, parse_report_tsv, report_markdown, report_tsv, unified_diff};
