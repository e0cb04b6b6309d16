//! Interactions with the analytic exterior beyond the lattice box.

use std::f64::consts::PI;

use super::interval::disjoint_intervals;
use crate::grid::Exterior;
use crate::quad::{adaptive_pieces, Rect};

/// Exterior interaction split by membership in `E₀`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TailSplit {
    /// Part inside `E₀`.
    pub inside: f64,
    /// Part inside the complement of `E₀`.
    pub outside: f64,
}

impl TailSplit {
    pub fn signed(&self) -> f64 {
        self.inside - self.outside
    }
}

/// Regions of the real line beyond `[-l, l]`, split by membership in `E₀`.
pub fn exterior_intervals_1d(ext: &Exterior, l: f64) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let comp = ext.complement();
    let mut ins = ext.intervals_1d(f64::NEG_INFINITY, -l);
    ins.extend(ext.intervals_1d(l, f64::INFINITY));
    let mut outs = comp.intervals_1d(f64::NEG_INFINITY, -l);
    outs.extend(comp.intervals_1d(l, f64::INFINITY));
    (ins, outs)
}

/// Exact interaction of the interval `[a, b]` with the exterior beyond `[-l, l]`.
pub fn cell_tail_1d(a: f64, b: f64, l: f64, ext: &Exterior, sigma: f64) -> TailSplit {
    let (ins, outs) = exterior_intervals_1d(ext, l);
    let f = |v: &[(f64, f64)]| v.iter().map(|&iv| disjoint_intervals((a, b), iv, sigma)).sum();
    TailSplit {
        inside: f(&ins),
        outside: f(&outs),
    }
}

/// Angular breakpoints (sorted, spanning one full turn) for rays from `p`
/// inside the box `[-l, l]²`.
pub fn ray_breakpoints(p: [f64; 2], l: f64, ext: &Exterior) -> Vec<f64> {
    let mut a: Vec<f64> = [[l, l], [-l, l], [-l, -l], [l, -l]]
        .iter()
        .map(|c| (c[1] - p[1]).atan2(c[0] - p[0]))
        .collect();
    a.extend(ext.critical_angles(p, l));
    let base = a[0];
    let mut v: Vec<f64> = a
        .into_iter()
        .map(|t| {
            let mut x = (t - base) % (2.0 * PI);
            if x < 0.0 {
                x += 2.0 * PI;
            }
            base + x
        })
        .collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    v.push(base + 2.0 * PI);
    v
}

/// Exit distance of the ray `p + r e` from the box `[-l, l]²` (p inside).
#[inline]
pub fn box_exit(p: [f64; 2], e: [f64; 2], l: f64) -> f64 {
    let mut t = f64::INFINITY;
    for d in 0..2 {
        if e[d] > 0.0 {
            t = t.min((l - p[d]) / e[d]);
        } else if e[d] < 0.0 {
            t = t.min((-l - p[d]) / e[d]);
        }
    }
    t
}

/// Angular integrals over rays from `p` beyond the box exit:
/// returns `(∫_θ Σ_{E₀ segments}[F(b) − F(a)], ∫_θ [F(∞) − F(ρ)])`
/// for a radial antiderivative `F` with `F(∞) = 0`.
pub fn ray_tail_2d<F: Fn(f64) -> f64>(p: [f64; 2], l: f64, ext: &Exterior, anti: F, rel_tol: f64) -> (f64, f64) {
    let breaks = ray_breakpoints(p, l, ext);
    let seg_val = |a: f64, b: f64| -> f64 {
        let fb = if b.is_finite() { anti(b) } else { 0.0 };
        fb - anti(a)
    };
    let inside = match ext {
        Exterior::AllOutside => 0.0,
        _ => adaptive_pieces(
            |th| {
                let e = [th.cos(), th.sin()];
                let r0 = box_exit(p, e, l);
                ext.ray_segments(p, e, r0).iter().map(|&(a, b)| seg_val(a, b)).sum()
            },
            &breaks,
            1e-15,
            rel_tol,
        ),
    };
    let total = adaptive_pieces(
        |th| {
            let e = [th.cos(), th.sin()];
            -anti(box_exit(p, e, l))
        },
        &breaks,
        1e-15,
        rel_tol,
    );
    let inside = if matches!(ext, Exterior::AllInside) { total } else { inside };
    (inside, total)
}

/// Kernel tail `∫_{box^c} |p − y|^{−2−σ} dy` split by `E₀`, at a point.
pub fn point_tail_2d(p: [f64; 2], l: f64, ext: &Exterior, sigma: f64) -> TailSplit {
    let (inside, total) = ray_tail_2d(p, l, ext, |r| -r.powf(-sigma) / sigma, 1e-11);
    TailSplit {
        inside,
        outside: total - inside,
    }
}

/// Cell-integrated kernel tail in 2D (3×3 Gauss over the cell).
pub fn cell_tail_2d(rect: &Rect, l: f64, ext: &Exterior, sigma: f64) -> TailSplit {
    let rule = crate::quad::gauss(3);
    let c = [0.5 * (rect.lo[0] + rect.hi[0]), 0.5 * (rect.lo[1] + rect.hi[1])];
    let r = [0.5 * (rect.hi[0] - rect.lo[0]), 0.5 * (rect.hi[1] - rect.lo[1])];
    let mut out = TailSplit::default();
    for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
        for (yj, wj) in rule.nodes.iter().zip(&rule.weights) {
            let t = point_tail_2d([c[0] + r[0] * xi, c[1] + r[1] * yj], l, ext, sigma);
            let w = wi * wj * r[0] * r[1];
            out.inside += w * t.inside;
            out.outside += w * t.outside;
        }
    }
    out
}

/// Upper bound `|S^{n−1}| (R − |x|)^{−σ}/σ` on the tail magnitude at `x`.
pub fn tail_bound(n: usize, dist_to_box: f64, sigma: f64) -> f64 {
    let surface = if n == 1 { 2.0 } else { 2.0 * PI };
    surface * dist_to_box.powf(-sigma) / sigma
}
