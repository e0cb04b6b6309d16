//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use fracmin_core::grid::{BoundaryData, Domain, Exterior, IndicatorSet};
use fracmin_core::minimize::Problem;

/// Unit ball with a truncation box of radius 2.
pub fn domain(n: usize, h: f64) -> Arc<Domain> {
    Arc::new(Domain::ball(n, 1.0, h, 2.0).expect("valid domain"))
}

pub fn normal(n: usize) -> [f64; 2] {
    if n == 1 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    }
}

/// `{x_n > 0}`.
pub fn half_space(d: &Arc<Domain>) -> IndicatorSet {
    IndicatorSet::from_exterior(d.clone(), Exterior::half_space(normal(d.n()), 0.0))
}

/// Two-phase linear benchmark with slope `beta` below the interface.
pub fn benchmark(n: usize, h: f64, beta: f64) -> Problem {
    let d = domain(n, h);
    Problem::new(BoundaryData::TwoPhaseLinear(beta).sample(d), Exterior::half_space(normal(n), 0.0), 0.5)
        .expect("valid problem")
}
