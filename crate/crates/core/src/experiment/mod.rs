//! Config-driven experiment runner behind the `cloudreg` binary.
//!
//! Every command takes an [`ExperimentConfig`], a seed and an output
//! directory, and writes CSV/JSON/SVG files whose bytes depend only on the
//! config and seed.

mod commands;
mod config;
pub mod svg;

pub use commands::{
    cmd_compare, cmd_decompose, cmd_gen_cloud, cmd_plot, cmd_simulate, cmd_stability, staircase, CompareRow,
    CompareTable, GenCloudSummary, RunArtifact,
};
pub use config::{
    lq_for, preset, preset_names, BuiltController, BuiltPlant, CloudControllerSpec, CloudSpec, CompareSpec,
    ControllerSpec, DecomposeSpec, ExperimentConfig, GeneralControllerSpec, LqSpec, MetricsSpec, PlantSpec,
};
