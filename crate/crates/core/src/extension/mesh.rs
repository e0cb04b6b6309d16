//! Graded half-space meshes, extension fields and the Poisson extension.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use super::poisson::PoissonKernel;
use crate::error::{invalid, Result};
use crate::grid::{Cell, Domain, IndicatorSet};
use crate::kernel::tail::{exterior_intervals_1d, ray_tail_2d};
use crate::quad::Rect;

/// Growth ratio between consecutive z-levels.
pub const Z_RATIO: f64 = 1.2;

/// Levels `0 = z_0 < z_1 = z_min < z_1 ρ < …`, the last one `≥ z_max`.
pub fn z_levels(z_min: f64, ratio: f64, z_max: f64) -> Result<Vec<f64>> {
    if !(z_min > 0.0) || !(ratio > 1.0) || !(z_max > z_min) {
        return Err(invalid("z_levels", format!("need 0 < z_min < z_max and ratio > 1, got {z_min}, {ratio}, {z_max}")));
    }
    let mut z = vec![0.0, z_min];
    while *z.last().unwrap() < z_max {
        let next = z.last().unwrap() * ratio;
        z.push(next);
    }
    Ok(z)
}

/// Tensor mesh over a box around Ω times graded z-levels.
///
/// Each lattice cell carries `sub^n` nodes at the centers of its
/// subcells, so the x-spacing is `h / sub`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionMesh {
    domain: Arc<Domain>,
    sigma: f64,
    sub: usize,
    he: f64,
    /// Lattice cells per half-axis covered by the mesh.
    cells_half: i32,
    /// Nodes per half-axis.
    half: i32,
    z: Vec<f64>,
}

impl ExtensionMesh {
    /// Mesh with `z_min = h/(4 sub)`, ratio 1.2 and `z_max = 4·radius`,
    /// covering Ω plus two lattice cells on each side.
    pub fn new(domain: Arc<Domain>, sigma: f64, sub: usize) -> Result<ExtensionMesh> {
        if sub == 0 {
            return Err(invalid("sub", "at least one node per cell"));
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(invalid("sigma", format!("σ must lie in (0,1), got {sigma}")));
        }
        let he = domain.h() / sub as f64;
        let z = z_levels(0.25 * he, Z_RATIO, 4.0 * domain.radius())?;
        Self::with_levels(domain, sigma, sub, z)
    }

    /// Mesh with explicit z-levels (`z[0] = 0`, increasing, `z[1] ≤ h`).
    pub fn with_levels(domain: Arc<Domain>, sigma: f64, sub: usize, z: Vec<f64>) -> Result<ExtensionMesh> {
        if z.len() < 3 || z[0] != 0.0 || z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("z_levels", "levels must start at 0 and increase"));
        }
        if z[1] > domain.h() {
            return Err(invalid("z_levels", format!("z_min = {} exceeds h = {}", z[1], domain.h())));
        }
        let cells_half = (domain.radius() / domain.h() - 1e-9).ceil() as i32 + 2;
        if cells_half > domain.half_cells() {
            return Err(invalid("R", "lattice box too small for the extension mesh"));
        }
        Ok(ExtensionMesh {
            he: domain.h() / sub as f64,
            half: cells_half * sub as i32,
            cells_half,
            domain,
            sigma,
            sub,
            z,
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }
    pub fn n(&self) -> usize {
        self.domain.n()
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn sub(&self) -> usize {
        self.sub
    }
    /// Node spacing along x.
    pub fn he(&self) -> f64 {
        self.he
    }
    pub fn z(&self) -> &[f64] {
        &self.z
    }
    /// Nodes along each x-axis.
    pub fn nx(&self) -> usize {
        2 * self.half as usize
    }
    pub fn ny(&self) -> usize {
        if self.n() == 2 {
            self.nx()
        } else {
            1
        }
    }
    pub fn per_level(&self) -> usize {
        self.nx() * self.ny()
    }
    pub fn len(&self) -> usize {
        self.per_level() * self.z.len()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Half-width of the x-box spanned by the nodes.
    pub fn x_extent(&self) -> f64 {
        self.half as f64 * self.he
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.half as f64 + 0.5) * self.he
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, k: usize) -> usize {
        k * self.per_level() + iy * self.nx() + ix
    }

    /// `(ix, iy, k)` of a linear node index.
    #[inline]
    pub fn node(&self, idx: usize) -> (usize, usize, usize) {
        let pl = self.per_level();
        let k = idx / pl;
        let r = idx % pl;
        (r % self.nx(), r / self.nx(), k)
    }

    /// Horizontal position of a node column.
    #[inline]
    pub fn x_of(&self, ix: usize, iy: usize) -> [f64; 2] {
        if self.n() == 1 {
            [self.coord(ix), 0.0]
        } else {
            [self.coord(ix), self.coord(iy)]
        }
    }

    /// Lattice cell containing a node column.
    #[inline]
    pub fn cell_of(&self, ix: usize, iy: usize) -> Cell {
        let c = |i: usize| (i as i32 - self.half).div_euclid(self.sub as i32);
        if self.n() == 1 {
            [c(ix), 0]
        } else {
            [c(ix), c(iy)]
        }
    }
}

/// Values `U(x, z)` on an [`ExtensionMesh`]; level 0 holds the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionField {
    mesh: Arc<ExtensionMesh>,
    values: Vec<f64>,
}

impl ExtensionField {
    pub fn from_values(mesh: Arc<ExtensionMesh>, values: Vec<f64>) -> ExtensionField {
        assert_eq!(values.len(), mesh.len());
        ExtensionField { mesh, values }
    }

    pub fn constant(mesh: Arc<ExtensionMesh>, c: f64) -> ExtensionField {
        let len = mesh.len();
        ExtensionField::from_values(mesh, vec![c; len])
    }

    pub fn mesh(&self) -> &Arc<ExtensionMesh> {
        &self.mesh
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn get(&self, ix: usize, iy: usize, k: usize) -> f64 {
        self.values[self.mesh.index(ix, iy, k)]
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// CSV with columns `x,[y,]z,U`, one row per node.
    pub fn to_csv(&self) -> String {
        let m = &self.mesh;
        let mut out = String::from(if m.n() == 1 { "x,z,U\n" } else { "x,y,z,U\n" });
        for (idx, v) in self.values.iter().enumerate() {
            let (ix, iy, k) = m.node(idx);
            let x = m.x_of(ix, iy);
            if m.n() == 1 {
                let _ = writeln!(out, "{},{},{}", x[0], m.z[k], v);
            } else {
                let _ = writeln!(out, "{},{},{},{}", x[0], x[1], m.z[k], v);
            }
        }
        out
    }
}

/// Maximal runs `[a, b)` of equal phase along one lattice row.
fn row_runs(set: &IndicatorSet, jy: i32) -> Vec<(i32, i32, f64)> {
    let d = set.domain();
    let n = d.half_cells();
    let mut runs: Vec<(i32, i32, f64)> = Vec::new();
    for jx in -n..n {
        let s = set.phase([jx, jy]) as f64;
        match runs.last_mut() {
            Some(r) if r.2 == s => r.1 = jx + 1,
            _ => runs.push((jx, jx + 1, s)),
        }
    }
    runs
}

/// `U = (χ_E − χ_{E^c}) * P(·, z)` at every node, with the exact trace on
/// level 0. Lattice cells are integrated exactly (1D) or semi-analytically
/// (2D); the exterior beyond the lattice box enters analytically.
pub fn poisson_extension(set: &IndicatorSet, mesh: &Arc<ExtensionMesh>) -> Result<ExtensionField> {
    let d = set.domain();
    if **d != **mesh.domain() {
        return Err(invalid("mesh", "mesh and set live on different domains"));
    }
    let kernel = PoissonKernel::new(d.n(), mesh.sigma())?;
    let mut values = vec![0.0; mesh.len()];
    let pl = mesh.per_level();
    for (idx, v) in values[..pl].iter_mut().enumerate() {
        let (ix, iy, _) = mesh.node(idx);
        *v = set.phase(mesh.cell_of(ix, iy)) as f64;
    }
    if d.n() == 1 {
        extend_1d(set, mesh, &kernel, &mut values[pl..]);
    } else {
        extend_2d(set, mesh, &kernel, &mut values[pl..]);
    }
    Ok(ExtensionField::from_values(mesh.clone(), values))
}

fn extend_1d(set: &IndicatorSet, mesh: &ExtensionMesh, kernel: &PoissonKernel, out: &mut [f64]) {
    let d = set.domain();
    let h = d.h();
    let l = d.box_half_width();
    let mut segs: Vec<(f64, f64, f64)> = row_runs(set, 0)
        .into_iter()
        .map(|(a, b, s)| (a as f64 * h, b as f64 * h, s))
        .collect();
    let (ins, outs) = exterior_intervals_1d(&set.exterior(), l);
    segs.extend(ins.into_iter().map(|(a, b)| (a, b, 1.0)));
    segs.extend(outs.into_iter().map(|(a, b)| (a, b, -1.0)));
    segs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let nx = mesh.nx();
    let z = mesh.z();
    out.par_iter_mut().enumerate().for_each(|(i, v)| {
        let k = 1 + i / nx;
        let x = mesh.coord(i % nx);
        *v = segs.iter().map(|&(a, b, s)| s * kernel.interval_mass(a, b, x, z[k])).sum();
    });
}

fn extend_2d(set: &IndicatorSet, mesh: &ExtensionMesh, kernel: &PoissonKernel, out: &mut [f64]) {
    let d = set.domain();
    let (h, he) = (d.h(), mesh.he());
    let n = d.half_cells();
    let m = mesh.sub() as i32;
    let half = mesh.half;
    let l = d.box_half_width();
    let ext = set.exterior();
    let runs: Vec<Vec<(i32, i32, f64)>> = (-n..n).map(|jy| row_runs(set, jy)).collect();
    // Offsets d = j·m − i' between a lattice cell j and a node i'.
    let d_min = -n * m - half + 1;
    let d_max = (n - 1) * m + half;
    let span = (d_max - d_min + 1) as usize;
    let pl = mesh.per_level();
    for (level, chunk) in out.chunks_mut(pl).enumerate() {
        let z = mesh.z()[level + 1];
        let axis = |dd: i32| (he * (dd as f64 - 0.5), he * (dd as f64 - 0.5) + h);
        let table: Vec<f64> = (0..span * span)
            .into_par_iter()
            .map(|t| {
                let (dx, dy) = ((t % span) as i32 + d_min, (t / span) as i32 + d_min);
                let (x0, x1) = axis(dx);
                let (y0, y1) = axis(dy);
                kernel.rect_mass(&Rect { lo: [x0, y0], hi: [x1, y1] }, z, h)
            })
            .collect();
        // Cumulative sums along x with stride m: cum[dx] = T[dx] + cum[dx − m].
        let mut cum = table;
        for row in cum.chunks_mut(span) {
            for t in m as usize..span {
                row[t] += row[t - m as usize];
            }
        }
        let exact = |p: [f64; 2]| {
            let (inside, total) = ray_tail_2d(p, l, &ext, |rho| kernel.radial_antiderivative(rho, z), 1e-10);
            2.0 * inside - total
        };
        // Interpolate only when the sample grid is smaller than the level.
        let grid = TailGrid::plan(mesh.x_extent(), l - mesh.x_extent());
        let tail = (grid.points() < pl).then(|| grid.sample(exact));
        let cum_at = |dx: i32, dy: i32| -> f64 {
            if dx < d_min {
                0.0
            } else {
                cum[(dy - d_min) as usize * span + (dx - d_min) as usize]
            }
        };
        chunk.par_iter_mut().enumerate().for_each(|(i, v)| {
            let (ix, iy) = (i % mesh.nx(), i / mesh.nx());
            let (px, py) = (ix as i32 - half, iy as i32 - half);
            let mut s = 0.0;
            for (r, row) in runs.iter().enumerate() {
                let dy = (r as i32 - n) * m - py;
                for &(a, b, sign) in row {
                    s += sign * (cum_at((b - 1) * m - px, dy) - cum_at((a - 1) * m - px, dy));
                }
            }
            let p = mesh.x_of(ix, iy);
            *v = s + tail.as_ref().map_or_else(|| exact(p), |t| t.eval(p));
        });
    }
}

const STENCIL: usize = 6;

/// Exterior contribution sampled on a coarse grid over the mesh box and
/// interpolated by tensor quintics. The tail is smooth there, since its
/// sources lie outside the lattice box.
pub(crate) struct TailGrid {
    x0: f64,
    step: f64,
    pts: usize,
    values: Vec<f64>,
}

impl TailGrid {
    /// Grid over `[−extent, extent]²` for sources at least `dist` away.
    pub(crate) fn plan(extent: f64, dist: f64) -> TailGrid {
        // Two spare intervals per side keep the stencil centered at the edges.
        let step = dist / 12.0;
        let intervals = (2.0 * extent / step).ceil() as usize + 4;
        TailGrid {
            x0: -0.5 * intervals as f64 * step,
            step,
            pts: intervals + 1,
            values: Vec::new(),
        }
    }

    pub(crate) fn points(&self) -> usize {
        self.pts * self.pts
    }

    pub(crate) fn sample<F: Fn([f64; 2]) -> f64 + Sync>(mut self, f: F) -> TailGrid {
        let (x0, step, pts) = (self.x0, self.step, self.pts);
        self.values = (0..pts * pts)
            .into_par_iter()
            .map(|t| f([x0 + (t % pts) as f64 * step, x0 + (t / pts) as f64 * step]))
            .collect();
        self
    }

    /// Lagrange weights of the `STENCIL` points starting at the returned index.
    fn stencil(&self, x: f64) -> (usize, [f64; STENCIL]) {
        let u = (x - self.x0) / self.step;
        let lo = u.floor() as i64 - (STENCIL as i64 / 2 - 1);
        let i = lo.clamp(0, (self.pts - STENCIL) as i64) as usize;
        let t = u - i as f64;
        let mut w = [1.0; STENCIL];
        for (a, wa) in w.iter_mut().enumerate() {
            for b in 0..STENCIL {
                if b != a {
                    *wa *= (t - b as f64) / (a as f64 - b as f64);
                }
            }
        }
        (i, w)
    }

    pub(crate) fn eval(&self, p: [f64; 2]) -> f64 {
        let (i, wx) = self.stencil(p[0]);
        let (j, wy) = self.stencil(p[1]);
        let mut s = 0.0;
        for (b, wb) in wy.iter().enumerate() {
            for (a, wa) in wx.iter().enumerate() {
                s += wa * wb * self.values[(j + b) * self.pts + i + a];
            }
        }
        s
    }
}
