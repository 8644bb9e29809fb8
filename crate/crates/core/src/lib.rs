//! Simulation library for a multiscale shear-mixing velocity field on the
//! 2-torus `[0, sqrt(2)) x [0, 1)` and the passive scalars / particle
//! ensembles it drives.
//!
//! The flow is organized as a cascade: a self-similar lattice of "windows"
//! in time ([`schedule`]), each window running a fixed program of banded
//! shear events that refine a two-cell pattern into ever finer checkerboards
//! inside a dyadic box lattice ([`geometry`], [`flow`]). Scalar fields are
//! cell-averaged grids with spectral heat and exact permutation transport
//! ([`field`], [`propagator`]); particle ensembles follow the same velocity
//! field analytically ([`particles`]).

pub mod error;
pub mod field;
pub mod flow;
pub mod geometry;
pub mod particles;
pub mod propagator;
pub mod schedule;

mod spectral;

pub use error::{CascadeError, Result};
