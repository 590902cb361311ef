//! Experiment orchestration for feature-binding benchmarks: config, cached
//! and resumable runs, aggregation and reporting.

pub mod aggregate;
pub mod cache;
pub mod config;
pub mod records;
pub mod report;
pub mod run;
pub mod svg;

pub use aggregate::{aggregate, AggregateCell, Aggregation};
pub use cache::{CacheKey, ResponseCache};
pub use config::RunConfig;
pub use records::{read_records, RunRecord};
pub use report::write_report;
pub use run::{RunSummary, Runner};
