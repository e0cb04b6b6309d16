//! Harmonic replacements: discrete Dirichlet minimizers with prescribed
//! boundary-layer values and a vanishing constraint on a set of Ω cells.

use std::sync::Arc;

use crate::error::{FracError, Result};
use crate::grid::{Cell, Domain, IndicatorSet, ScalarField};
use crate::linalg::{pcg, Csr, Ic0, SolveStats};
use crate::quad::Neumaier;

/// Default relative residual of the linear solves.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Minimize `∫_Ω |∇v|²` over `v = φ` on the boundary layer, `v = 0` on `K`.
#[derive(Debug, Clone)]
pub struct ReplacementProblem {
    domain: Arc<Domain>,
    boundary: ScalarField,
    /// `K` as a mask over Ω cells.
    vanish: Vec<bool>,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl ReplacementProblem {
    /// `φ` supplies the layer values (its Ω values are ignored).
    pub fn new(phi: &ScalarField, vanish: &[Cell]) -> Result<ReplacementProblem> {
        let d = phi.domain().clone();
        let mut mask = vec![false; d.omega().len()];
        for &c in vanish {
            let k = d.omega_index(c).ok_or(FracError::OutsideDomain(c))?;
            mask[k] = true;
        }
        Ok(Self::from_mask(phi, mask))
    }

    pub fn from_mask(phi: &ScalarField, vanish: Vec<bool>) -> ReplacementProblem {
        let d = phi.domain().clone();
        assert_eq!(vanish.len(), d.omega().len());
        ReplacementProblem {
            domain: d.clone(),
            boundary: phi.clone(),
            vanish,
            tolerance: DEFAULT_TOL,
            max_iterations: 20 * d.omega().len() + 200,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }
    pub fn vanish_mask(&self) -> &[bool] {
        &self.vanish
    }

    /// Rejects `K` that swallows every Ω neighbor of a boundary-layer cell
    /// carrying nonzero data: the continuous trace could not be attained.
    /// The discrete system itself stays solvable, so solves do not call this.
    pub fn check_feasible(&self) -> Result<()> {
        let d = &self.domain;
        let no = d.omega().len();
        for (k, &c) in d.layer().iter().enumerate() {
            if self.boundary.values()[no + k] == 0.0 {
                continue;
            }
            let nbs: Vec<usize> = d.neighbors(c).into_iter().filter_map(|nb| d.omega_index(nb)).collect();
            if !nbs.is_empty() && nbs.iter().all(|&j| self.vanish[j]) {
                return Err(FracError::Infeasible(c));
            }
        }
        Ok(())
    }

    /// Solves, optionally warm-started from `guess`.
    pub fn solve_from(&self, guess: Option<&ScalarField>) -> Result<(ScalarField, SolveStats)> {
        let d = &self.domain;
        let no = d.omega().len();
        let mut unknown = vec![usize::MAX; no];
        let mut cells = Vec::new();
        for k in 0..no {
            if !self.vanish[k] {
                unknown[k] = cells.len();
                cells.push(k);
            }
        }
        let nu = cells.len();
        let phi = self.boundary.values();
        let mut trip = Vec::with_capacity(5 * nu);
        let mut rhs = vec![0.0; nu];
        // Value of a fixed endpoint: φ on the layer, 0 on K.
        let fixed = |f: usize| if f >= no { phi[f] } else { 0.0 };
        for &(a, b) in d.faces() {
            let ua = if a < no { unknown[a] } else { usize::MAX };
            let ub = if b < no { unknown[b] } else { usize::MAX };
            match (ua != usize::MAX, ub != usize::MAX) {
                (true, true) => {
                    trip.push((ua, ua, 1.0));
                    trip.push((ub, ub, 1.0));
                    trip.push((ua, ub, -1.0));
                    trip.push((ub, ua, -1.0));
                }
                (true, false) => {
                    trip.push((ua, ua, 1.0));
                    rhs[ua] += fixed(b);
                }
                (false, true) => {
                    trip.push((ub, ub, 1.0));
                    rhs[ub] += fixed(a);
                }
                (false, false) => {}
            }
        }
        let mut values = vec![0.0; d.field_len()];
        values[no..].copy_from_slice(&phi[no..]);
        let mut stats = SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        };
        if nu > 0 {
            let a = Csr::from_triplets(nu, trip);
            let mut x: Vec<f64> = match guess {
                Some(g) => cells.iter().map(|&k| g.values()[k]).collect(),
                None => vec![0.0; nu],
            };
            let m = Ic0::new(&a)?;
            stats = pcg(&a, &rhs, &mut x, &m, self.tolerance, self.max_iterations)?;
            for (i, &k) in cells.iter().enumerate() {
                values[k] = x[i];
            }
        }
        Ok((ScalarField::from_values(d.clone(), values), stats))
    }

    pub fn solve(&self) -> Result<ScalarField> {
        Ok(self.solve_from(None)?.0)
    }
}

/// The discrete harmonic replacement of `φ` vanishing on `K`.
pub fn harmonic_replacement(prob: &ReplacementProblem) -> Result<ScalarField> {
    prob.solve()
}

/// `Σ_faces Δv Δw h^{n−2}`.
pub fn dirichlet_form(v: &ScalarField, w: &ScalarField) -> f64 {
    let d = v.domain();
    let scale = d.h().powi(d.n() as i32 - 2);
    let (a, b) = (v.values(), w.values());
    let mut s = Neumaier::default();
    for &(i, j) in d.faces() {
        s.add((a[j] - a[i]) * (b[j] - b[i]));
    }
    s.value() * scale
}

/// Discrete Dirichlet energy `Σ_faces (Δv)² h^{n−2}` over faces touching Ω.
pub fn dirichlet_energy(v: &ScalarField) -> f64 {
    dirichlet_form(v, v)
}

/// `⟨∇w, ∇ψ⟩` for a test field vanishing on the boundary layer and on `K`.
pub fn orthogonality_residual(w: &ScalarField, vanish: &[bool], psi: &ScalarField) -> Result<f64> {
    let d = w.domain();
    let no = d.omega().len();
    for (k, &v) in psi.values().iter().enumerate() {
        let must_vanish = k >= no || vanish[k];
        if must_vanish && v != 0.0 {
            return Err(FracError::SupportViolation(d.field_cell(k)));
        }
    }
    Ok(dirichlet_form(w, psi))
}

/// Five-point (three-point in 1D) Laplacian at every Ω cell.
pub fn discrete_laplacian(v: &ScalarField) -> Vec<f64> {
    let d = v.domain();
    let h2 = d.h() * d.h();
    d.omega()
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let x = v.values()[k];
            let s: f64 = d
                .neighbors(c)
                .into_iter()
                .map(|nb| v.get(nb).expect("neighbors of Ω lie in the field") - x)
                .sum();
            s / h2
        })
        .collect()
}

/// The two one-phase replacements and `u = u⁺ − u⁻`.
#[derive(Debug, Clone)]
pub struct TwoPhase {
    pub u_plus: ScalarField,
    pub u_minus: ScalarField,
    pub u: ScalarField,
}

fn phase_mask(set: &IndicatorSet, vanish_where: i8) -> Vec<bool> {
    (0..set.domain().omega().len())
        .map(|k| set.omega_phase(k) == vanish_where)
        .collect()
}

/// `u⁺` is the replacement of `φ⁺` vanishing on `E^c ∩ Ω`, `u⁻` that of
/// `φ⁻` vanishing on `E ∩ Ω`.
pub fn two_phase_replacement(phi: &ScalarField, set: &IndicatorSet) -> Result<TwoPhase> {
    two_phase_from(phi, set, None)
}

/// As [`two_phase_replacement`], warm-started from a previous pair.
pub fn two_phase_from(phi: &ScalarField, set: &IndicatorSet, guess: Option<(&ScalarField, &ScalarField)>) -> Result<TwoPhase> {
    let plus = ReplacementProblem::from_mask(&phi.positive_part(), phase_mask(set, -1));
    let minus = ReplacementProblem::from_mask(&phi.negative_part(), phase_mask(set, 1));
    let (u_plus, _) = plus.solve_from(guess.map(|g| g.0))?;
    let (u_minus, _) = minus.solve_from(guess.map(|g| g.1))?;
    // The exact minimizers are one-signed; clip roundoff of the solver.
    let u_plus = u_plus.map(|v| v.max(0.0));
    let u_minus = u_minus.map(|v| v.max(0.0));
    let u = u_plus.zip_with(&u_minus, |a, b| a - b);
    Ok(TwoPhase { u_plus, u_minus, u })
}

/// Outcome of [`energy_difference`].
#[derive(Debug, Clone)]
pub struct EnergyDifference {
    /// `∫|∇v|² − ∫|∇w|²`.
    pub value: f64,
    /// `|A|`.
    pub measure: f64,
    /// `‖w‖_∞`.
    pub w_sup: f64,
    pub w: ScalarField,
    pub v: ScalarField,
}

impl EnergyDifference {
    /// Observed constant `C` in `value ≤ C |A| ‖w‖²_∞`.
    pub fn observed_constant(&self) -> f64 {
        if self.measure == 0.0 || self.w_sup == 0.0 {
            0.0
        } else {
            self.value / (self.measure * self.w_sup * self.w_sup)
        }
    }
}

/// Energy cost of additionally forcing the replacement to vanish on `A ⊂ E∩Ω`:
/// `w` vanishes on `E^c ∩ Ω`, `v` on `(E^c ∩ Ω) ∪ A`.
pub fn energy_difference(phi: &ScalarField, set: &IndicatorSet, a: &[Cell]) -> Result<EnergyDifference> {
    let d = set.domain();
    let base = phase_mask(set, -1);
    let mut with_a = base.clone();
    for &c in a {
        let k = d.omega_index(c).ok_or(FracError::NotContained(c))?;
        if set.omega_phase(k) < 0 {
            return Err(FracError::NotContained(c));
        }
        with_a[k] = true;
    }
    let w = ReplacementProblem::from_mask(phi, base).solve()?;
    let v = ReplacementProblem::from_mask(phi, with_a).solve_from(Some(&w))?.0;
    let value = if a.is_empty() { 0.0 } else { dirichlet_energy(&v) - dirichlet_energy(&w) };
    let w_sup = w.omega_values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut cells = a.to_vec();
    cells.sort();
    cells.dedup();
    Ok(EnergyDifference {
        value,
        measure: cells.len() as f64 * d.cell_volume(),
        w_sup,
        w,
        v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryData, Exterior};

    #[test]
    fn constant_data_gives_constant() {
        let d = Arc::new(Domain::ball(2, 1.0, 0.1, 2.0).unwrap());
        let phi = BoundaryData::Constant(2.0).sample(d.clone());
        let v = ReplacementProblem::new(&phi, &[]).unwrap().solve().unwrap();
        assert!(v.values().iter().all(|x| (x - 2.0).abs() < 1e-8));
        assert!(dirichlet_energy(&v) < 1e-14);
    }

    #[test]
    fn warm_start_agrees() {
        let d = Arc::new(Domain::ball(2, 1.0, 0.1, 2.0).unwrap());
        let phi = BoundaryData::Linear([1.0, 0.5]).sample(d.clone());
        let set = IndicatorSet::from_exterior(d.clone(), Exterior::half_space([0.0, 1.0], 0.2));
        let a = two_phase_replacement(&phi, &set).unwrap();
        let b = two_phase_from(&phi, &set, Some((&a.u_plus, &a.u_minus))).unwrap();
        for (x, y) in a.u.values().iter().zip(b.u.values()) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
