//! Run configuration, table ingestion and report emission.

mod config;
mod emit;
mod ingest;

pub use config::RunConfig;
pub use emit::{emit, to_csv, to_json, write_output, CsvTable, Envelope, Format};
pub use ingest::{ingest_bytes, ingest_series, sha256_hex, IngestedSeries, Provenance};
