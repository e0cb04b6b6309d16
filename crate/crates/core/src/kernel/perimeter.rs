use std::sync::Arc;

use rayon::prelude::*;

use super::tail::{cell_tail_1d, cell_tail_2d, TailSplit};
use super::weights::WeightTable;
use crate::error::{FracError, Result};
use crate::grid::{Cell, Domain, Exterior, IndicatorSet};
use crate::quad::{Neumaier, Rect};

/// The two terms of `Per_σ(E, Ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerBreakdown {
    /// `L(E∩Ω, E^c)`.
    pub interior: f64,
    /// `L(E∖Ω, Ω∖E)`.
    pub exterior: f64,
    pub total: f64,
}

/// Precomputed interactions of every Ω cell with the fixed cells outside Ω
/// (lattice part plus analytic tail), so that `Per_σ` becomes an Ising-type
/// sum over Ω.
#[derive(Debug, Clone)]
pub struct PerimeterModel {
    domain: Arc<Domain>,
    table: Arc<WeightTable>,
    /// Interaction with exterior cells of phase +1 (and the `E₀` tail).
    ext_plus: Vec<f64>,
    /// Interaction with exterior cells of phase −1 (and the `E₀^c` tail).
    ext_minus: Vec<f64>,
}

/// Interaction of each Ω cell with the region beyond the lattice box.
pub fn omega_tails(domain: &Domain, ext: &Exterior, sigma: f64) -> Vec<TailSplit> {
    let l = domain.box_half_width();
    let h = domain.h();
    domain
        .omega()
        .par_iter()
        .map(|&c| {
            let x = domain.center(c);
            if domain.n() == 1 {
                cell_tail_1d(x[0] - 0.5 * h, x[0] + 0.5 * h, l, ext, sigma)
            } else {
                let rect = Rect {
                    lo: [x[0] - 0.5 * h, x[1] - 0.5 * h],
                    hi: [x[0] + 0.5 * h, x[1] + 0.5 * h],
                };
                cell_tail_2d(&rect, l, ext, sigma)
            }
        })
        .collect()
}

#[inline]
fn offset(a: Cell, b: Cell) -> Cell {
    [b[0] - a[0], b[1] - a[1]]
}

impl PerimeterModel {
    /// Builds the model from the fixed (non-Ω) phases of `set`.
    pub fn new(set: &IndicatorSet, table: Arc<WeightTable>) -> Result<PerimeterModel> {
        let domain = set.domain().clone();
        check_table(&domain, &table)?;
        let tails = omega_tails(&domain, &set.exterior(), table.sigma());
        let fixed: Vec<(Cell, i8)> = domain
            .lattice_cells()
            .filter(|c| !domain.is_omega(*c))
            .map(|c| (c, set.phase(c)))
            .collect();
        let pairs: Vec<(f64, f64)> = domain
            .omega()
            .par_iter()
            .enumerate()
            .map(|(k, &c)| {
                let mut plus = Neumaier::default();
                let mut minus = Neumaier::default();
                for &(j, s) in &fixed {
                    let w = table.get(offset(c, j));
                    if s > 0 {
                        plus.add(w);
                    } else {
                        minus.add(w);
                    }
                }
                plus.add(tails[k].inside);
                minus.add(tails[k].outside);
                (plus.value(), minus.value())
            })
            .collect();
        Ok(PerimeterModel {
            domain,
            table,
            ext_plus: pairs.iter().map(|p| p.0).collect(),
            ext_minus: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }
    pub fn table(&self) -> &Arc<WeightTable> {
        &self.table
    }
    pub fn ext_plus(&self) -> &[f64] {
        &self.ext_plus
    }
    pub fn ext_minus(&self) -> &[f64] {
        &self.ext_minus
    }

    /// Both terms of `Per_σ(E, Ω)`.
    pub fn per_sigma(&self, set: &IndicatorSet) -> PerBreakdown {
        let d = &self.domain;
        let om = d.omega();
        let phases: Vec<i8> = (0..om.len()).map(|k| set.omega_phase(k)).collect();
        // Each row k sums pairs (k, j) with j > k and opposite phases.
        let rows: Vec<(f64, f64)> = (0..om.len())
            .into_par_iter()
            .map(|k| {
                let mut inner = Neumaier::default();
                for j in (k + 1)..om.len() {
                    if phases[j] != phases[k] {
                        inner.add(self.table.get(offset(om[k], om[j])));
                    }
                }
                let (a, b) = if phases[k] > 0 {
                    (self.ext_minus[k], 0.0)
                } else {
                    (0.0, self.ext_plus[k])
                };
                (inner.value() + a, b)
            })
            .collect();
        let mut interior = Neumaier::default();
        let mut exterior = Neumaier::default();
        for (a, b) in rows {
            interior.add(a);
            exterior.add(b);
        }
        let interior = interior.value();
        let exterior = exterior.value();
        PerBreakdown {
            interior,
            exterior,
            total: interior + exterior,
        }
    }

    /// Local fields `f_k = Σ_{j∈Ω, j≠k} W(k−j) s_j + ext⁺_k − ext⁻_k`, so that
    /// flipping cell `k` changes `Per_σ` by `s_k f_k`.
    pub fn local_fields(&self, set: &IndicatorSet) -> Vec<f64> {
        let om = self.domain.omega();
        let phases: Vec<i8> = (0..om.len()).map(|k| set.omega_phase(k)).collect();
        (0..om.len())
            .into_par_iter()
            .map(|k| {
                let mut s = Neumaier::default();
                for j in 0..om.len() {
                    if j != k {
                        s.add(phases[j] as f64 * self.table.get(offset(om[k], om[j])));
                    }
                }
                s.add(self.ext_plus[k]);
                s.add(-self.ext_minus[k]);
                s.value()
            })
            .collect()
    }

    /// `Per_σ(E^k) − Per_σ(E)` for the Ω cell with index `k`.
    pub fn delta_flip(&self, set: &IndicatorSet, k: usize) -> f64 {
        let om = self.domain.omega();
        let ck = om[k];
        let mut s = Neumaier::default();
        for (j, &cj) in om.iter().enumerate() {
            if j != k {
                s.add(set.omega_phase(j) as f64 * self.table.get(offset(ck, cj)));
            }
        }
        s.add(self.ext_plus[k]);
        s.add(-self.ext_minus[k]);
        set.omega_phase(k) as f64 * s.value()
    }

    /// Updates local fields after cell `k` changed phase from `old` to `−old`.
    pub fn update_fields(&self, fields: &mut [f64], k: usize, old: i8) {
        let om = self.domain.omega();
        let ck = om[k];
        let f = -2.0 * old as f64;
        for (j, &cj) in om.iter().enumerate() {
            if j != k {
                fields[j] += f * self.table.get(offset(ck, cj));
            }
        }
    }
}

fn check_table(domain: &Domain, table: &WeightTable) -> Result<()> {
    if table.n() != domain.n() || (table.h() - domain.h()).abs() > 1e-12 * domain.h() {
        return Err(crate::error::invalid("table", "weight table does not match the domain"));
    }
    if table.max_offset() < 2 * domain.half_cells() - 1 {
        return Err(crate::error::invalid("table", "weight table does not cover the lattice"));
    }
    Ok(())
}

/// `Per_σ(E, Ω)` for a domain and indicator set.
pub fn per_sigma(set: &IndicatorSet, table: &Arc<WeightTable>) -> Result<PerBreakdown> {
    Ok(PerimeterModel::new(set, table.clone())?.per_sigma(set))
}

/// `Per_σ(E^i, Ω) − Per_σ(E, Ω)` for the Ω cell `cell`.
pub fn delta_per_flip(set: &IndicatorSet, cell: Cell, table: &Arc<WeightTable>) -> Result<f64> {
    let k = set
        .domain()
        .omega_index(cell)
        .ok_or(FracError::OutsideDomain(cell))?;
    Ok(PerimeterModel::new(set, table.clone())?.delta_flip(set, k))
}

/// Lattice cell lists plus an optional part of the analytic exterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExteriorPart {
    None,
    /// `E₀` beyond the box.
    Inside,
    /// `E₀^c` beyond the box.
    Outside,
}

/// `L(A, B) = Σ_{i∈A, j∈B} W(j − i)`, plus the interaction of `A` with the
/// selected part of the exterior when `B` extends past the lattice.
pub fn interaction(
    a: &[Cell],
    b: &[Cell],
    table: &WeightTable,
    tail: Option<(&Domain, &Exterior, ExteriorPart)>,
) -> Result<f64> {
    let bset: std::collections::HashSet<Cell> = b.iter().copied().collect();
    if let Some(c) = a.iter().find(|c| bset.contains(*c)) {
        return Err(FracError::NotDisjoint(*c));
    }
    let mut s = Neumaier::default();
    for &i in a {
        for &j in b {
            s.add(table.get(offset(i, j)));
        }
    }
    if let Some((domain, ext, part)) = tail {
        if part != ExteriorPart::None {
            let h = domain.h();
            let l = domain.box_half_width();
            for &i in a {
                let x = domain.center(i);
                let t = if domain.n() == 1 {
                    cell_tail_1d(x[0] - 0.5 * h, x[0] + 0.5 * h, l, ext, table.sigma())
                } else {
                    let rect = Rect {
                        lo: [x[0] - 0.5 * h, x[1] - 0.5 * h],
                        hi: [x[0] + 0.5 * h, x[1] + 0.5 * h],
                    };
                    cell_tail_2d(&rect, l, ext, table.sigma())
                };
                s.add(if part == ExteriorPart::Inside { t.inside } else { t.outside });
            }
        }
    }
    Ok(s.value())
}
