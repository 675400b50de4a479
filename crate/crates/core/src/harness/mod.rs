//! Experiment harness: configuration, RNG stream discipline, the bytes
//! ledger, seeded runs with CSV metrics, and hyper-parameter sweeps.

pub mod config;
pub mod ledger;
pub mod rng;
pub mod runner;

pub use config::{parse_config, preset_pairs, Algorithm, ExperimentConfig, TaskKind};
pub use ledger::{iterations_per_epoch, predicted_bytes_per_epoch, BytesLedger};
pub use runner::{
    csv_string, materialize_task, run_experiment, run_seed, run_seed_detailed, sweep, sweep_csv,
    write_csv, ExperimentOutput, MetricsRecord, RunSummary, SeedRun, SweepAxis, SweepRow,
    TaskData, CSV_SCHEMA,
};
