//! Descent search for minimizing pairs `(u, E)` of
//! `J(u, E) = ∫_Ω |∇u|² + Per_σ(E, Ω)`.
//!
//! Proposals use a first-order estimate of the Dirichlet change plus the
//! exact perimeter delta; every sweep is then accepted or rolled back on
//! the recomputed total, and a final polish checks flips by exact re-solve.

mod problem;
mod search;

pub use problem::{
    dirichlet_estimate, exact_flip_delta, interface_scan_1d, phase_gradient_sq, propose_flip, total_energy,
    FlipScope, Problem, ScanPoint,
};
pub use search::{
    history_csv, minimize, minimize_from, sweep, HistoryRow, MinimizeResult, SearchParams, SearchState, SweepOutcome,
    HISTORY_HEADER, TIE_TOL,
};
