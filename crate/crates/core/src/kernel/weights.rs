use rayon::prelude::*;

use super::interval::unit_second_difference;
use crate::error::{invalid, Result};
use crate::grid::{Cell, Domain};
use crate::quad::gauss;

/// Offsets with `max |Δ_i| ≤ NEAR` count as near field.
pub const NEAR: i32 = 4;
/// Subdivision depth used unless a caller asks otherwise.
pub const DEFAULT_DEPTH: usize = 4;
const ORDER: usize = 8;

/// Cell-pair interaction weights `W(Δ) = ∫_{cell 0} ∫_{cell Δ} |x−y|^{−n−σ}`.
#[derive(Debug, Clone)]
pub struct WeightTable {
    n: usize,
    h: f64,
    sigma: f64,
    depth: usize,
    max_offset: i32,
    scale: f64,
    unit: Vec<f64>,
}

/// Builds the weight table covering every offset between lattice cells.
pub fn build_weight_table(domain: &Domain, sigma: f64, depth: usize) -> Result<WeightTable> {
    WeightTable::new(domain.n(), domain.h(), 2 * domain.half_cells() - 1, sigma, depth)
}

impl WeightTable {
    pub fn new(n: usize, h: f64, max_offset: i32, sigma: f64, depth: usize) -> Result<WeightTable> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(invalid("sigma", format!("σ must lie in (0,1), got {sigma}")));
        }
        if depth < 2 {
            return Err(invalid("quadrature_depth", "depth must be at least 2"));
        }
        if n != 1 && n != 2 {
            return Err(invalid("n", "dimension must be 1 or 2"));
        }
        let m = max_offset.max(NEAR);
        let side = (2 * m + 1) as usize;
        let unit = if n == 1 {
            (0..side)
                .map(|i| {
                    let d = (i as i32 - m).abs();
                    if d == 0 {
                        0.0
                    } else {
                        unit_second_difference(d as f64, sigma)
                    }
                })
                .collect()
        } else {
            unit_table_2d(m, sigma, depth)
        };
        Ok(WeightTable {
            n,
            h,
            sigma,
            depth,
            max_offset: m,
            scale: h.powf(n as f64 - sigma),
            unit,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn depth(&self) -> usize {
        self.depth
    }
    pub fn max_offset(&self) -> i32 {
        self.max_offset
    }

    /// `W(Δ)` in physical units. `W(0)` is reported as 0 and never used.
    #[inline]
    pub fn get(&self, d: Cell) -> f64 {
        self.unit[self.index(d)] * self.scale
    }

    /// Unit-spacing weight `W₁(Δ)`.
    #[inline]
    pub fn unit(&self, d: Cell) -> f64 {
        self.unit[self.index(d)]
    }

    #[inline]
    fn index(&self, d: Cell) -> usize {
        let m = self.max_offset;
        debug_assert!(d[0].abs() <= m && d[1].abs() <= m, "offset {d:?} beyond table");
        if self.n == 1 {
            (d[0] + m) as usize
        } else {
            let side = 2 * m + 1;
            ((d[1] + m) * side + d[0] + m) as usize
        }
    }

    /// Every stored `(Δ, W₁(Δ))` pair in index order.
    pub fn entries(&self) -> Vec<(Cell, f64)> {
        let m = self.max_offset;
        let side = 2 * m + 1;
        (0..self.unit.len())
            .map(|i| {
                let c = if self.n == 1 {
                    [i as i32 - m, 0]
                } else {
                    [i as i32 % side - m, i as i32 / side - m]
                };
                (c, self.unit[i])
            })
            .collect()
    }

    pub(crate) fn from_parts(n: usize, h: f64, sigma: f64, depth: usize, max_offset: i32, unit: Vec<f64>) -> Self {
        WeightTable {
            n,
            h,
            sigma,
            depth,
            max_offset,
            scale: h.powf(n as f64 - sigma),
            unit,
        }
    }
}

/// `∫_{[−1,1]²} (1−|t₁|)(1−|t₂|) |Δ+t|^{−2−σ} dt` with tensor Gauss panels.
fn tent_integral(d: [f64; 2], sigma: f64, panels: usize) -> f64 {
    let rule = gauss(ORDER);
    let e = -(2.0 + sigma) / 2.0;
    let mut nodes = Vec::with_capacity(2 * panels * ORDER);
    let w = 1.0 / panels as f64;
    for side in [-1.0, 1.0] {
        for p in 0..panels {
            let a = p as f64 * w;
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                let t = a + 0.5 * w * (1.0 + x);
                nodes.push((side * t, (1.0 - t) * 0.5 * w * wt));
            }
        }
    }
    let mut s = 0.0;
    for &(t1, w1) in &nodes {
        let x = d[0] + t1;
        let mut row = 0.0;
        for &(t2, w2) in &nodes {
            let y = d[1] + t2;
            row += w2 * (x * x + y * y).powf(e);
        }
        s += w1 * row;
    }
    s
}

fn unit_table_2d(m: i32, sigma: f64, depth: usize) -> Vec<f64> {
    let side = (2 * m + 1) as usize;
    let near_panels = 1usize << depth.min(6);
    // Canonical offsets 0 ≤ d1 ≤ d0, excluding the singular block.
    let canon: Vec<(i32, i32)> = (0..=m)
        .flat_map(|a| (0..=a).map(move |b| (a, b)))
        .filter(|&(a, _)| a >= 2)
        .collect();
    let vals: Vec<f64> = canon
        .par_iter()
        .map(|&(a, b)| {
            let panels = if a <= NEAR { near_panels } else { 1 };
            tent_integral([a as f64, b as f64], sigma, panels)
        })
        .collect();
    let mut canon_val = std::collections::HashMap::with_capacity(canon.len());
    for (k, &(a, b)) in canon.iter().enumerate() {
        canon_val.insert((a, b), vals[k]);
    }
    let (face, corner) = singular_2d(sigma, |a, b| canon_val[&(a, b)]);
    let mut unit = vec![0.0; side * side];
    for iy in -m..=m {
        for ix in -m..=m {
            let (a, b) = {
                let (x, y) = (ix.abs(), iy.abs());
                if x >= y {
                    (x, y)
                } else {
                    (y, x)
                }
            };
            let v = match (a, b) {
                (0, 0) => 0.0,
                (1, 0) => face,
                (1, 1) => corner,
                _ => canon_val[&(a, b)],
            };
            unit[((iy + m) * (2 * m + 1) + ix + m) as usize] = v;
        }
    }
    unit
}

/// Face- and corner-adjacent unit weights from the self-similar identity
/// `W(Δ) = 2^{σ−2} Σ_{a,b∈{0,1}²} W(2Δ + b − a)` (halving both cells).
fn singular_2d<F: Fn(i32, i32) -> f64>(sigma: f64, known: F) -> (f64, f64) {
    let q = 2f64.powf(sigma - 2.0);
    let canon = |x: i32, y: i32| {
        let (x, y) = (x.abs(), y.abs());
        if x >= y {
            (x, y)
        } else {
            (y, x)
        }
    };
    // Unknowns: f = W(1,0), c = W(1,1); rows: f = q(αf f + αc c + r_f), c = q(βc c + r_c).
    let mut rows = [[0.0f64; 3]; 2];
    for (row, delta) in [(0usize, (1, 0)), (1usize, (1, 1))] {
        for bits in 0..16 {
            let (a0, a1, b0, b1) = (bits & 1, (bits >> 1) & 1, (bits >> 2) & 1, (bits >> 3) & 1);
            let d = (2 * delta.0 + b0 - a0, 2 * delta.1 + b1 - a1);
            match canon(d.0, d.1) {
                (1, 0) => rows[row][0] += 1.0,
                (1, 1) => rows[row][1] += 1.0,
                (0, 0) => unreachable!(),
                (x, y) => rows[row][2] += known(x, y),
            }
        }
    }
    // Corner row has no face coupling.
    debug_assert_eq!(rows[1][0], 0.0);
    let c = q * rows[1][2] / (1.0 - q * rows[1][1]);
    let f = q * (rows[0][1] * c + rows[0][2]) / (1.0 - q * rows[0][0]);
    (f, c)
}

/// One-dimensional analogue of [`singular_2d`], used as a self-check.
pub fn singular_1d(sigma: f64) -> f64 {
    let q = 2f64.powf(sigma - 1.0);
    let w = |d: f64| unit_second_difference(d, sigma);
    q * (2.0 * w(2.0) + w(3.0)) / (1.0 - q)
}
