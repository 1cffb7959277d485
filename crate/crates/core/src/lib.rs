//! Two-species continuum Glauber dynamics with mutations.
//!
//! Geometry on a periodic box, the potential menu and cell-list energies,
//! the finite-configuration algebra (K-transform, Lebesgue-Poisson
//! integration), parameter-regime constants, an exact thinning simulator,
//! snapshot estimators and the mesoscopic kinetic equations.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! experiment orchestration live in the `wrglauber` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod cell_index;
pub mod configuration;
mod error;
pub mod estimators;
pub mod geometry;
pub mod kinetic;
pub mod potential;
pub mod quadrature;
pub mod regime;
pub mod rng;
pub mod simulator;

pub use cell_index::CellIndex;
pub use configuration::{Species, TwoTypeConfiguration};
pub use error::{Error, Result};
pub use geometry::{Domain, Point};
pub use potential::{PotentialSet, PotentialSpec};
pub use regime::{RegimeReport, RuelleWeight};
