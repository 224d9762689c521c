//! Files in, files out: record ingestion, run configuration, artifacts.

pub mod config;
pub mod csvio;
pub mod ingest;
pub mod manifest;
pub mod run;
pub mod svg;

pub use config::{EnsembleSettings, FpSweepSettings, Mode, Model, RunConfig, SimulateSettings};
pub use ingest::{ingest, resample_linear, ColumnRef, Ingested, Provenance, RecordSpec, Resample, TimeDirection};
pub use manifest::Manifest;
pub use run::{rerun_manifest, run, RunOutcome, MANIFEST_FILE};
