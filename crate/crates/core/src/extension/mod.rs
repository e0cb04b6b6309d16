//! The extension `U(x, z) = (χ_E − χ_{E^c}) * P(·, z)` on a graded
//! half-space mesh, its weighted energy `∫ z^{1−σ} |∇U|²`, constrained
//! minimization with prescribed trace, and calibration of `c_{n,σ}`.

pub mod calibrate;
pub mod energy;
pub mod mesh;
pub mod poisson;

pub use calibrate::{
    calibrate_constant, calibrate_samples, CalibrationParams, CalibrationResult, CalibrationSample, MAX_SPREAD,
};
pub use energy::{constrained_extension_solve, form_energy, weighted_energy};
pub use mesh::{poisson_extension, z_levels, ExtensionField, ExtensionMesh};
pub use poisson::{kernel_constant, PoissonKernel};
