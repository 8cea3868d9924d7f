//! Workload ingestion, synthetic workload generation, and result
//! serialization.

mod ingest;
mod projection;
mod results;
mod synth;

pub use ingest::{ingest_csv, ColumnMap, IngestOptions, IngestReport};
pub use projection::{GeoBounds, Projection, EARTH_RADIUS_KM};
pub use results::{
    read_compare_csv, read_sweep_csv, write_compare_csv, write_report_csv, write_report_json,
    write_sweep_csv, write_workload_csv, CompareRow, SweepRow,
};
pub use synth::{generate, Hotspot, SyntheticSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("row {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("required column '{0}' not found in header")]
    MissingColumn(String),
    #[error("no usable trip records after filtering")]
    EmptyWorkload,
    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),
}
