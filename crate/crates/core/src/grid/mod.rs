//! Lattice domains, indicator sets with analytic exterior data, grid
//! functions, measures and rescaling.

mod config;
mod domain;
mod field;
mod set;
pub mod snapshot;

pub use config::{rescale, Configuration, EnergyBreakdown};
pub use domain::{build_domain, norm, Cell, Domain};
pub use field::{BoundaryData, ScalarField};
pub use set::{measure, Exterior, IndicatorSet};
