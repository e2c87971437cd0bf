//! Command-line harness for robotaxi placement: instance generation,
//! placement, evaluation, benchmarking and trip ingestion.

pub mod bench;
pub mod cli;
pub mod error;
pub mod ingest;

pub use bench::{cmd_bench, BenchConfig, BenchReport, BenchRow, ScatterRecord};
pub use error::{CliError, Result};
pub use ingest::ingest_trips;
