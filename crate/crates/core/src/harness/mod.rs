//! Scenarios, runs and sweeps: TOML in, CSV and JSON out.

pub mod io;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use run::{run, run_or_resume, scenario_hash, RunError, RunManifest, SCHEMA_VERSION};
pub use scenario::{DataSpec, Scenario, ShapeName, SolverKind};
pub use sweep::{expand, sweep, SweepConfig, SweepOutcome, SweepRow, SUMMARY_COLUMNS};
