//! Experiment harness for the shear-cascade transport library.
//!
//! This crate wraps [`cascade_core`] in a set of reproducible numerical
//! experiments (dissipation sweeps, particle statistics, norm growth, …),
//! each of which writes a machine-readable `report.json` and `data.csv`
//! into an output directory and returns an overall pass/fail verdict.

pub mod config;
pub mod experiments;
pub mod jobs;
pub mod report;
