use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{invalid, FracError, Result};
use crate::grid::{Cell, Configuration, Domain, EnergyBreakdown, Exterior, IndicatorSet, ScalarField};
use crate::harmonic::{dirichlet_energy, two_phase_from, ReplacementProblem};
use crate::kernel::{build_weight_table, PerimeterModel, WeightTable, DEFAULT_DEPTH};

/// Which Ω cells a sweep may flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipScope {
    /// Cells on the discrete boundary of `E`.
    BoundaryOnly,
    /// Cells within `k` face steps of the discrete boundary.
    BoundaryBand(usize),
}

impl Default for FlipScope {
    fn default() -> Self {
        FlipScope::BoundaryBand(2)
    }
}

impl FlipScope {
    fn depth(&self) -> usize {
        match *self {
            FlipScope::BoundaryOnly => 0,
            FlipScope::BoundaryBand(k) => k,
        }
    }

    /// Ω indices in scope, ascending.
    pub fn cells(&self, set: &IndicatorSet) -> Vec<usize> {
        let d = set.domain();
        let no = d.omega().len();
        let mut dist = vec![usize::MAX; no];
        let mut queue = VecDeque::new();
        for k in set.boundary_omega() {
            dist[k] = 0;
            queue.push_back(k);
        }
        let depth = self.depth();
        while let Some(k) = queue.pop_front() {
            if dist[k] == depth {
                continue;
            }
            for nb in d.neighbors(d.omega()[k]) {
                if let Some(j) = d.omega_index(nb) {
                    if dist[j] == usize::MAX {
                        dist[j] = dist[k] + 1;
                        queue.push_back(j);
                    }
                }
            }
        }
        (0..no).filter(|&k| dist[k] != usize::MAX).collect()
    }

    pub fn contains(&self, set: &IndicatorSet, k: usize) -> bool {
        self.cells(set).binary_search(&k).is_ok()
    }
}

/// Boundary data, exterior datum and the perimeter model of one problem.
#[derive(Debug, Clone)]
pub struct Problem {
    phi: ScalarField,
    exterior: Exterior,
    sigma: f64,
    model: PerimeterModel,
}

impl Problem {
    /// `phi` supplies the boundary-layer values; `exterior` fixes `E₀`.
    pub fn new(phi: ScalarField, exterior: Exterior, sigma: f64) -> Result<Problem> {
        let table = Arc::new(build_weight_table(phi.domain(), sigma, DEFAULT_DEPTH)?);
        Self::with_table(phi, exterior, table)
    }

    pub fn with_table(phi: ScalarField, exterior: Exterior, table: Arc<WeightTable>) -> Result<Problem> {
        let base = IndicatorSet::from_exterior(phi.domain().clone(), exterior);
        Self::with_fixed(phi, &base, table)
    }

    /// Problem whose fixed cells outside Ω take their phases from `fixed`.
    pub fn with_fixed(phi: ScalarField, fixed: &IndicatorSet, table: Arc<WeightTable>) -> Result<Problem> {
        if !phi.all_finite() {
            return Err(invalid("phi", "boundary data must be finite"));
        }
        if **fixed.domain() != **phi.domain() {
            return Err(invalid("fixed", "set and boundary data live on different domains"));
        }
        let sigma = table.sigma();
        let model = PerimeterModel::new(fixed, table)?;
        Ok(Problem {
            phi,
            exterior: fixed.exterior(),
            sigma,
            model,
        })
    }

    /// The same configuration seen as a problem on the concentric ball of
    /// the given radius: `u` becomes the boundary data and the phases
    /// outside the smaller ball are frozen.
    pub fn restrict(&self, config: &Configuration, radius: f64) -> Result<(Problem, Configuration)> {
        let sub = Arc::new(self.domain().restrict(radius)?);
        let u = config.u();
        let values = (0..sub.field_len())
            .map(|k| {
                let c = sub.field_cell(k);
                u.get(c).ok_or(FracError::OutsideDomain(c))
            })
            .collect::<Result<Vec<f64>>>()?;
        let phi = ScalarField::from_values(sub.clone(), values);
        let set = IndicatorSet::from_phases(sub, config.set.phases().to_vec(), config.set.exterior())?;
        let problem = Problem::with_fixed(phi, &set, self.model.table().clone())?;
        let restricted = problem.evaluate(&set)?;
        Ok((problem, restricted))
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.phi.domain()
    }
    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }
    pub fn exterior(&self) -> Exterior {
        self.exterior
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn model(&self) -> &PerimeterModel {
        &self.model
    }

    /// `E₀` outside Ω with Ω phases from `inside`.
    pub fn set_from<F: Fn([f64; 2]) -> bool>(&self, inside: F) -> IndicatorSet {
        IndicatorSet::with_omega(self.domain().clone(), self.exterior, inside)
    }

    /// Sign of the unconstrained harmonic extension of `φ`; cells where it
    /// vanishes follow `E₀`.
    pub fn initial_set(&self) -> Result<IndicatorSet> {
        let d = self.domain().clone();
        let v = ReplacementProblem::new(&self.phi, &[])?.solve()?;
        let mut set = IndicatorSet::from_exterior(d.clone(), self.exterior);
        for (k, &c) in d.omega().iter().enumerate() {
            let x = v.values()[k];
            let inside = if x > 0.0 {
                true
            } else if x < 0.0 {
                false
            } else {
                self.exterior.contains(d.center(c))
            };
            set.set_phase(c, if inside { 1 } else { -1 })?;
        }
        Ok(set)
    }

    /// Replacement-consistent configuration with its energy breakdown.
    pub fn evaluate(&self, set: &IndicatorSet) -> Result<Configuration> {
        self.evaluate_from(set, None)
    }

    /// As [`Problem::evaluate`], warm-starting the solves from `guess`.
    pub fn evaluate_from(&self, set: &IndicatorSet, guess: Option<&Configuration>) -> Result<Configuration> {
        self.check_set(set)?;
        let tp = two_phase_from(&self.phi, set, guess.map(|g| (&g.u_plus, &g.u_minus)))?;
        let per = self.model.per_sigma(set);
        let dirichlet = dirichlet_energy(&tp.u_plus) + dirichlet_energy(&tp.u_minus);
        Ok(Configuration {
            sigma: self.sigma,
            set: set.clone(),
            u_plus: tp.u_plus,
            u_minus: tp.u_minus,
            breakdown: Some(EnergyBreakdown::new(dirichlet, per.interior, per.exterior)),
        })
    }

    fn check_set(&self, set: &IndicatorSet) -> Result<()> {
        if **set.domain() != **self.domain() {
            return Err(invalid("set", "set and problem live on different domains"));
        }
        if set.exterior() != self.exterior {
            return Err(invalid("set", "exterior datum differs from the problem's"));
        }
        Ok(())
    }
}

/// Recomputes both energy terms of a configuration from scratch.
pub fn total_energy(config: &Configuration, model: &PerimeterModel) -> EnergyBreakdown {
    let per = model.per_sigma(&config.set);
    let dirichlet = dirichlet_energy(&config.u_plus) + dirichlet_energy(&config.u_minus);
    EnergyBreakdown::new(dirichlet, per.interior, per.exterior)
}

/// `|∇v|²` at an Ω cell from one-sided differences, taking the larger one
/// along each axis so that a phase that vanishes on one side still sees
/// its slope.
pub fn phase_gradient_sq(v: &ScalarField, cell: Cell) -> f64 {
    let d = v.domain();
    let h = d.h();
    let Some(x) = v.get(cell) else { return 0.0 };
    let mut s = 0.0;
    for axis in 0..d.n() {
        let mut best: f64 = 0.0;
        for sign in [-1, 1] {
            let mut nb = cell;
            nb[axis] += sign;
            if let Some(y) = v.get(nb) {
                best = best.max((y - x).abs());
            }
        }
        s += best * best / (h * h);
    }
    s
}

/// First-order change of the Dirichlet energy when the Ω cell flips.
///
/// Leaving `E` forces `u⁺` to vanish there and frees `u⁻`:
/// `hⁿ (|∇u⁺|² − |∇u⁻|²)`; entering `E` reverses the sign.
pub fn dirichlet_estimate(config: &Configuration, cell: Cell) -> f64 {
    let d = config.domain();
    let gp = phase_gradient_sq(&config.u_plus, cell);
    let gm = phase_gradient_sq(&config.u_minus, cell);
    config.set.phase(cell) as f64 * d.cell_volume() * (gp - gm)
}

/// Estimated `ΔJ` of flipping `cell`: exact perimeter delta plus
/// [`dirichlet_estimate`]. Only an estimate; commits use recomputed totals.
pub fn propose_flip(config: &Configuration, cell: Cell, model: &PerimeterModel, scope: FlipScope) -> Result<f64> {
    let d = config.domain();
    let k = d.omega_index(cell).ok_or(FracError::OutsideDomain(cell))?;
    if !scope.contains(&config.set, k) {
        return Err(FracError::OutOfScope(cell));
    }
    Ok(model.delta_flip(&config.set, k) + dirichlet_estimate(config, cell))
}

/// Exact `ΔJ` of flipping `cell`, by re-solving both replacements.
pub fn exact_flip_delta(problem: &Problem, config: &Configuration, cell: Cell) -> Result<f64> {
    let d = config.domain();
    let k = d.omega_index(cell).ok_or(FracError::OutsideDomain(cell))?;
    let before = match config.breakdown {
        Some(b) => b.dirichlet,
        None => dirichlet_energy(&config.u_plus) + dirichlet_energy(&config.u_minus),
    };
    let dper = problem.model().delta_flip(&config.set, k);
    let mut set = config.set.clone();
    set.flip(cell)?;
    let tp = two_phase_from(problem.phi(), &set, Some((&config.u_plus, &config.u_minus)))?;
    let after = dirichlet_energy(&tp.u_plus) + dirichlet_energy(&tp.u_minus);
    Ok(after - before + dper)
}

/// One entry of an exhaustive single-interface scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    /// Interface position (a cell face).
    pub t: f64,
    pub breakdown: EnergyBreakdown,
}

/// 1D: `J` for every set `{x > t}` (`orientation = 1`) or `{x < t}`
/// (`orientation = −1`) with `t` on a cell face inside Ω.
pub fn interface_scan_1d(problem: &Problem, orientation: i8) -> Result<Vec<ScanPoint>> {
    let d = problem.domain();
    if d.n() != 1 {
        return Err(invalid("n", "the interface scan is one-dimensional"));
    }
    let h = d.h();
    let om = d.omega();
    let lo = om.iter().map(|c| c[0]).min().unwrap_or(0);
    let hi = om.iter().map(|c| c[0]).max().unwrap_or(0);
    let mut out = Vec::new();
    let mut guess: Option<Configuration> = None;
    for j in lo..=hi + 1 {
        let t = j as f64 * h;
        let set = problem.set_from(|x| if orientation > 0 { x[0] > t } else { x[0] < t });
        let config = problem.evaluate_from(&set, guess.as_ref())?;
        out.push(ScanPoint {
            t,
            breakdown: config.breakdown.expect("evaluated"),
        });
        guess = Some(config);
    }
    Ok(out)
}
