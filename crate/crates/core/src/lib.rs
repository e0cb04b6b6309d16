//! Numerical laboratory for minimizing pairs of the functional
//! `∫_Ω |∇u|² + Per_σ(E, Ω)` on one- and two-dimensional lattices.
//!
//! The crate is organised bottom-up:
//! - [`grid`]: domains, indicator sets, scalar fields, rescaling;
//! - [`kernel`]: singular interaction weights, `Per_σ`, flip deltas, `κ_σ`;
//! - [`harmonic`]: harmonic replacements and Dirichlet energies;
//! - [`extension`]: the Poisson-kernel extension and its weighted energy;
//! - [`minimize`]: descent search over indicator sets;
//! - [`diagnostics`]: monotonicity formulas, density and growth checks.

pub mod diagnostics;
pub mod error;
pub mod extension;
pub mod grid;
pub mod harmonic;
pub mod kernel;
pub mod linalg;
pub mod minimize;
pub mod quad;

pub use error::{FracError, Result};
pub use grid::{Cell, Configuration, Domain, EnergyBreakdown, Exterior, IndicatorSet, ScalarField};
