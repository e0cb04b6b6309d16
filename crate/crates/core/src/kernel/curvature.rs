//! Fractional curvature `κ_σ(x) = PV ∫ (χ_{E^c} − χ_E)(y) |x − y|^{−n−σ} dy`
//! evaluated at midpoints of interface faces.

use rayon::prelude::*;

use super::tail::{exterior_intervals_1d, ray_tail_2d};
use crate::error::{FracError, Result};
use crate::grid::{Cell, Domain, IndicatorSet};
use crate::quad::{polar_rect, Neumaier, Rect};

const NEAR_POLAR: i32 = 6;

/// Precomputed point-to-cell kernel integrals for points on cell faces.
///
/// Entry `(i, b)` holds `∫_Q |y|^{−n−σ} dy` over the unit square `Q`
/// centered at `(i + ½, b)`; a face midpoint sits at such an offset from
/// every lattice cell center (with the axes swapped for horizontal faces).
#[derive(Debug, Clone)]
pub struct CurvatureEvaluator {
    n: usize,
    h: f64,
    sigma: f64,
    side: usize,
    unit: Vec<f64>,
}

fn unit_weight_1d(i: usize, sigma: f64) -> f64 {
    if i == 0 {
        f64::INFINITY
    } else {
        let a = i as f64;
        (a.powf(-sigma) - (a + 1.0).powf(-sigma)) / sigma
    }
}

fn unit_weight_2d(i: usize, b: usize, sigma: f64) -> f64 {
    if i == 0 && b == 0 {
        return f64::INFINITY;
    }
    let cx = i as f64 + 0.5;
    let cy = b as f64;
    let rect = Rect {
        lo: [cx - 0.5, cy - 0.5],
        hi: [cx + 0.5, cy + 0.5],
    };
    if (i as i32) <= NEAR_POLAR && (b as i32) <= NEAR_POLAR {
        polar_rect([0.0, 0.0], &rect, |r| -r.powf(-sigma) / sigma, 1e-13)
    } else {
        let e = -(2.0 + sigma) / 2.0;
        crate::quad::gauss_rect(&rect, 4, |y| (y[0] * y[0] + y[1] * y[1]).powf(e))
    }
}

impl CurvatureEvaluator {
    pub fn new(domain: &Domain, sigma: f64) -> Result<CurvatureEvaluator> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(crate::error::invalid("sigma", format!("σ must lie in (0,1), got {sigma}")));
        }
        let side = (2 * domain.half_cells() + 1) as usize;
        let unit = if domain.n() == 1 {
            (0..side).map(|i| unit_weight_1d(i, sigma)).collect()
        } else {
            (0..side * side)
                .into_par_iter()
                .map(|k| unit_weight_2d(k % side, k / side, sigma))
                .collect()
        };
        Ok(CurvatureEvaluator {
            n: domain.n(),
            h: domain.h(),
            sigma,
            side,
            unit,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Kernel integral over the cell whose center sits at `(q − e/2) h` from
    /// the face midpoint, with `q` the cell offset and `e` the face normal.
    #[inline]
    fn weight(&self, q: Cell, axis: usize, sign: i32) -> f64 {
        // Half-integer component along the face normal, integer across.
        let along = (2 * q[axis] - sign).unsigned_abs() as usize / 2;
        let scale = self.h.powf(-self.sigma);
        if self.n == 1 {
            return self.unit[along] * scale;
        }
        let across = q[1 - axis].unsigned_abs() as usize;
        self.unit[across * self.side + along] * scale
    }

    /// `κ_σ` at the midpoint of the face between `cell` and its neighbor
    /// `cell + sign·e_axis`, which must carry the opposite phase.
    pub fn at_face(&self, set: &IndicatorSet, cell: Cell, axis: usize, sign: i32) -> Result<f64> {
        let d = set.domain();
        let nb = {
            let mut c = cell;
            c[axis] += sign;
            c
        };
        if !d.in_lattice(cell) || !d.in_lattice(nb) {
            return Err(FracError::OutsideDomain(cell));
        }
        if set.phase(cell) == set.phase(nb) {
            return Err(FracError::NotOnBoundary(cell));
        }
        let mut p = d.center(cell);
        p[axis] += 0.5 * sign as f64 * d.h();
        let mut acc = Neumaier::default();
        // Reflection through p maps cell + q to cell + e − q = nb − q.
        for j in d.lattice_cells() {
            if j == cell || j == nb {
                continue;
            }
            let q = [j[0] - cell[0], j[1] - cell[1]];
            let m = [nb[0] - q[0], nb[1] - q[1]];
            let g = -(set.phase(j) as f64);
            if d.in_lattice(m) {
                if d.linear(j) < d.linear(m) {
                    let gm = -(set.phase(m) as f64);
                    if g + gm != 0.0 {
                        acc.add((g + gm) * self.weight(q, axis, sign));
                    }
                }
            } else {
                acc.add(g * self.weight(q, axis, sign));
            }
        }
        acc.add(self.tail(set, p));
        Ok(acc.value())
    }

    /// Contribution of the region beyond the lattice box.
    fn tail(&self, set: &IndicatorSet, p: [f64; 2]) -> f64 {
        let d = set.domain();
        let l = d.box_half_width();
        let ext = set.exterior();
        let s = self.sigma;
        if self.n == 1 {
            let (ins, outs) = exterior_intervals_1d(&ext, l);
            let piece = |iv: &(f64, f64)| {
                let (a, b) = (iv.0 - p[0], iv.1 - p[0]);
                let (near, far) = if a >= 0.0 { (a, b.abs()) } else { (b.abs(), a.abs()) };
                (near.powf(-s) - if far.is_finite() { far.powf(-s) } else { 0.0 }) / s
            };
            let inside: f64 = ins.iter().map(piece).sum();
            let outside: f64 = outs.iter().map(piece).sum();
            return outside - inside;
        }
        let (inside, total) = ray_tail_2d(p, l, &ext, |r| -r.powf(-s) / s, 1e-12);
        total - 2.0 * inside
    }

    /// `κ_σ` at a discrete boundary cell: mean over its interface faces.
    pub fn at_cell(&self, set: &IndicatorSet, cell: Cell) -> Result<f64> {
        let d = set.domain();
        let mut vals = Vec::new();
        for axis in 0..d.n() {
            for sign in [1, -1] {
                let mut nb = cell;
                nb[axis] += sign;
                if d.in_lattice(nb) && set.phase(nb) != set.phase(cell) {
                    vals.push(self.at_face(set, cell, axis, sign)?);
                }
            }
        }
        if vals.is_empty() {
            return Err(FracError::NotOnBoundary(cell));
        }
        Ok(vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Curvature at every interface face inside Ω: `(cell, axis, sign, κ)`.
    pub fn along_boundary(&self, set: &IndicatorSet) -> Vec<(Cell, usize, i32, f64)> {
        let d = set.domain();
        let mut faces = Vec::new();
        for &c in d.omega() {
            for axis in 0..d.n() {
                let mut nb = c;
                nb[axis] += 1;
                if d.in_lattice(nb) && set.phase(nb) != set.phase(c) {
                    faces.push((c, axis, 1));
                }
            }
        }
        faces
            .par_iter()
            .map(|&(c, axis, sign)| {
                let k = self.at_face(set, c, axis, sign).unwrap_or(f64::NAN);
                (c, axis, sign, k)
            })
            .collect()
    }
}

/// `κ_σ` at a discrete boundary cell of `E` (mean over its interface faces).
pub fn frac_curvature(set: &IndicatorSet, cell: Cell, sigma: f64) -> Result<f64> {
    CurvatureEvaluator::new(set.domain(), sigma)?.at_cell(set, cell)
}

/// Closed form of `κ_σ` on the boundary of a disk of radius `ρ` in the
/// plane: `(2/σ)(2ρ)^{−σ} ∫_{−π/2}^{π/2} cos^{−σ}θ dθ`.
pub fn disk_curvature(rho: f64, sigma: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let beta = (ln_gamma(0.5) + ln_gamma(0.5 - 0.5 * sigma) - ln_gamma(1.0 - 0.5 * sigma)).exp();
    2.0 / sigma * (2.0 * rho).powf(-sigma) * beta
}
