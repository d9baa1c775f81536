//! Seeded corpora and batch verification of the inequalities.

pub mod checks;
pub mod generate;
pub mod suite;

pub use checks::{CheckKind, CheckResult, ErrorEntry};
pub use suite::{run_suite, run_suite_spec, CorpusSpec, Generator, SuiteReport, SuiteSpec};
