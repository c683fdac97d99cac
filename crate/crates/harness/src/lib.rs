//! Experiment driver for the `splinewave` command line tool.
//!
//! Each experiment takes an [`ExperimentConfig`], runs the solver over a list of meshes or
//! time steps and returns plain rows that [`output`] turns into CSV files and plot scripts.

pub mod config;
pub mod experiments;
pub mod output;
pub mod selftest;

pub use config::{Experiment, ExperimentConfig, Geometry, MethodChoice, Scale};
pub use experiments::{EnergyRow, ProjectionRow, ResultRow};
