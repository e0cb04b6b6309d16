//! Singular-kernel interactions: cell weights, exterior tails, the
//! fractional perimeter with incremental flips, and fractional curvature.

pub mod cache;
pub mod curvature;
pub mod interval;
pub mod perimeter;
pub mod tail;
pub mod weights;

pub use curvature::{disk_curvature, frac_curvature, CurvatureEvaluator};
pub use interval::{disjoint_intervals, interval_interaction};
pub use perimeter::{delta_per_flip, interaction, per_sigma, ExteriorPart, PerBreakdown, PerimeterModel};
pub use tail::TailSplit;
pub use weights::{build_weight_table, WeightTable, DEFAULT_DEPTH};
