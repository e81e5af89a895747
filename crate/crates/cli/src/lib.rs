//! Configuration, presets, sweep orchestration and oracle checks for `qrs`.

pub mod config;
pub mod run;
pub mod verify;

pub use config::{Command, OracleSuite, RunConfig, PRESETS};
pub use run::{output_stem, run, write_artifacts, Artifacts};
