use std::sync::Arc;

use super::domain::{norm, Cell, Domain};
use crate::error::{FracError, Result};

/// Analytic description of the exterior datum `E₀` beyond the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exterior {
    /// `{y : y·normal > offset}`.
    HalfSpace { normal: [f64; 2], offset: f64 },
    /// `{y : |y − center| > radius}`.
    ComplementOfBall { center: [f64; 2], radius: f64 },
    /// `{y : |y − center| < radius}`.
    Ball { center: [f64; 2], radius: f64 },
    AllInside,
    AllOutside,
}

impl Exterior {
    /// Half-space with normal normalized to unit length.
    pub fn half_space(normal: [f64; 2], offset: f64) -> Exterior {
        let l = norm(normal);
        Exterior::HalfSpace {
            normal: [normal[0] / l, normal[1] / l],
            offset,
        }
    }

    pub fn contains(&self, y: [f64; 2]) -> bool {
        match *self {
            Exterior::HalfSpace { normal, offset } => y[0] * normal[0] + y[1] * normal[1] > offset,
            Exterior::ComplementOfBall { center, radius } => {
                norm([y[0] - center[0], y[1] - center[1]]) > radius
            }
            Exterior::Ball { center, radius } => norm([y[0] - center[0], y[1] - center[1]]) < radius,
            Exterior::AllInside => true,
            Exterior::AllOutside => false,
        }
    }

    /// Image under `y ↦ y / s`.
    pub fn scaled(&self, s: f64) -> Exterior {
        match *self {
            Exterior::HalfSpace { normal, offset } => Exterior::HalfSpace {
                normal,
                offset: offset / s,
            },
            Exterior::ComplementOfBall { center, radius } => Exterior::ComplementOfBall {
                center: [center[0] / s, center[1] / s],
                radius: radius / s,
            },
            Exterior::Ball { center, radius } => Exterior::Ball {
                center: [center[0] / s, center[1] / s],
                radius: radius / s,
            },
            e => e,
        }
    }

    /// Set complement.
    pub fn complement(&self) -> Exterior {
        match *self {
            Exterior::HalfSpace { normal, offset } => Exterior::HalfSpace {
                normal: [-normal[0], -normal[1]],
                offset: -offset,
            },
            Exterior::ComplementOfBall { center, radius } => Exterior::Ball { center, radius },
            Exterior::Ball { center, radius } => Exterior::ComplementOfBall { center, radius },
            Exterior::AllInside => Exterior::AllOutside,
            Exterior::AllOutside => Exterior::AllInside,
        }
    }

    /// Parameter intervals `r ∈ [r0, ∞)` on which `p + r e` lies in the set.
    /// `e` must be a unit vector. `f64::INFINITY` marks unbounded ends.
    pub fn ray_segments(&self, p: [f64; 2], e: [f64; 2], r0: f64) -> Vec<(f64, f64)> {
        let inf = f64::INFINITY;
        let clip = |a: f64, b: f64| -> Option<(f64, f64)> {
            let a = a.max(r0);
            (b > a).then_some((a, b))
        };
        match *self {
            Exterior::AllInside => vec![(r0, inf)],
            Exterior::AllOutside => vec![],
            Exterior::HalfSpace { normal, offset } => {
                let pn = p[0] * normal[0] + p[1] * normal[1];
                let en = e[0] * normal[0] + e[1] * normal[1];
                if en.abs() < 1e-300 {
                    if pn > offset {
                        vec![(r0, inf)]
                    } else {
                        vec![]
                    }
                } else {
                    let t = (offset - pn) / en;
                    if en > 0.0 {
                        clip(t, inf).into_iter().collect()
                    } else {
                        clip(f64::NEG_INFINITY, t).into_iter().collect()
                    }
                }
            }
            Exterior::ComplementOfBall { center, radius } | Exterior::Ball { center, radius } => {
                let q = [p[0] - center[0], p[1] - center[1]];
                let b = q[0] * e[0] + q[1] * e[1];
                let c = q[0] * q[0] + q[1] * q[1] - radius * radius;
                let disc = b * b - c;
                let inside_ball = if disc > 0.0 {
                    let s = disc.sqrt();
                    Some((-b - s, -b + s))
                } else {
                    None
                };
                let is_ball = matches!(self, Exterior::Ball { .. });
                match (inside_ball, is_ball) {
                    (None, true) => vec![],
                    (None, false) => vec![(r0, inf)],
                    (Some((t1, t2)), true) => clip(t1, t2).into_iter().collect(),
                    (Some((t1, t2)), false) => {
                        let mut v = Vec::new();
                        if let Some(s) = clip(f64::NEG_INFINITY, t1) {
                            v.push(s);
                        }
                        if let Some(s) = clip(t2, inf) {
                            v.push(s);
                        }
                        v
                    }
                }
            }
        }
    }

    /// One-dimensional intersection with `(lo, hi)`; `lo`/`hi` may be infinite.
    pub fn intervals_1d(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let r = if lo.is_finite() {
            self.ray_segments([lo, 0.0], [1.0, 0.0], 0.0)
                .into_iter()
                .map(|(a, b)| (lo + a, lo + b))
                .collect::<Vec<_>>()
        } else {
            self.ray_segments([hi, 0.0], [-1.0, 0.0], 0.0)
                .into_iter()
                .map(|(a, b)| (hi - b, hi - a))
                .collect()
        };
        r.into_iter()
            .filter_map(|(a, b)| {
                let a = a.max(lo);
                let b = b.min(hi);
                (b > a).then_some((a, b))
            })
            .collect()
    }

    /// Directions (angles about `p`) at which the ray structure changes:
    /// boundary crossings of the box and tangencies of ball boundaries.
    pub fn critical_angles(&self, p: [f64; 2], box_half: f64) -> Vec<f64> {
        let mut pts: Vec<[f64; 2]> = Vec::new();
        let l = box_half;
        match *self {
            Exterior::HalfSpace { normal, offset } => {
                for side in 0..4 {
                    let (axis, val) = (side / 2, if side % 2 == 0 { l } else { -l });
                    let other = 1 - axis;
                    if normal[other].abs() > 1e-300 {
                        let t = (offset - normal[axis] * val) / normal[other];
                        if t.abs() <= l {
                            let mut q = [0.0; 2];
                            q[axis] = val;
                            q[other] = t;
                            pts.push(q);
                        }
                    }
                }
            }
            Exterior::ComplementOfBall { center, radius } | Exterior::Ball { center, radius } => {
                for side in 0..4 {
                    let (axis, val) = (side / 2, if side % 2 == 0 { l } else { -l });
                    let other = 1 - axis;
                    let d = val - center[axis];
                    let s2 = radius * radius - d * d;
                    if s2 >= 0.0 {
                        for sgn in [-1.0, 1.0] {
                            let t = center[other] + sgn * s2.sqrt();
                            if t.abs() <= l {
                                let mut q = [0.0; 2];
                                q[axis] = val;
                                q[other] = t;
                                pts.push(q);
                            }
                        }
                    }
                }
                let q = [center[0] - p[0], center[1] - p[1]];
                let dist = norm(q);
                if dist > radius {
                    let base = q[1].atan2(q[0]);
                    let half = (radius / dist).asin();
                    return pts
                        .iter()
                        .map(|c| (c[1] - p[1]).atan2(c[0] - p[0]))
                        .chain([base - half, base + half])
                        .collect();
                }
            }
            _ => {}
        }
        pts.iter().map(|c| (c[1] - p[1]).atan2(c[0] - p[0])).collect()
    }
}

/// Per-cell phase (+1 in `E`, −1 in `E^c`) on the extended lattice,
/// together with the analytic exterior beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSet {
    domain: Arc<Domain>,
    phases: Vec<i8>,
    exterior: Exterior,
}

impl IndicatorSet {
    /// All lattice cells take their phase from the exterior descriptor.
    pub fn from_exterior(domain: Arc<Domain>, exterior: Exterior) -> Self {
        let phases = domain
            .lattice_cells()
            .map(|c| if exterior.contains(domain.center(c)) { 1 } else { -1 })
            .collect();
        IndicatorSet {
            domain,
            phases,
            exterior,
        }
    }

    /// Exterior phases from the descriptor; Ω phases from `inside`.
    pub fn with_omega<F: Fn([f64; 2]) -> bool>(domain: Arc<Domain>, exterior: Exterior, inside: F) -> Self {
        let mut s = Self::from_exterior(domain.clone(), exterior);
        for &c in domain.omega() {
            let l = domain.linear(c);
            s.phases[l] = if inside(domain.center(c)) { 1 } else { -1 };
        }
        s
    }

    /// Raw constructor; `phases` is indexed by lattice linear index.
    pub fn from_phases(domain: Arc<Domain>, phases: Vec<i8>, exterior: Exterior) -> Result<Self> {
        if phases.len() != domain.lattice_len() {
            return Err(crate::error::invalid("phases", "length does not match the lattice"));
        }
        if phases.iter().any(|&p| p != 1 && p != -1) {
            return Err(crate::error::invalid("phases", "phase values must be ±1"));
        }
        Ok(IndicatorSet {
            domain,
            phases,
            exterior,
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }
    pub fn exterior(&self) -> Exterior {
        self.exterior
    }
    pub fn phases(&self) -> &[i8] {
        &self.phases
    }

    /// Phase of a cell; beyond the lattice the exterior descriptor decides.
    #[inline]
    pub fn phase(&self, c: Cell) -> i8 {
        if self.domain.in_lattice(c) {
            self.phases[self.domain.linear(c)]
        } else if self.exterior.contains(self.domain.center(c)) {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn phase_linear(&self, l: usize) -> i8 {
        self.phases[l]
    }

    /// Phase of the `k`-th Ω cell.
    #[inline]
    pub fn omega_phase(&self, k: usize) -> i8 {
        self.phases[self.domain.linear(self.domain.omega()[k])]
    }

    pub fn set_phase(&mut self, c: Cell, phase: i8) -> Result<()> {
        if !self.domain.is_omega(c) {
            return Err(FracError::OutsideDomain(c));
        }
        let l = self.domain.linear(c);
        self.phases[l] = if phase > 0 { 1 } else { -1 };
        Ok(())
    }

    /// Flips an Ω cell.
    pub fn flip(&mut self, c: Cell) -> Result<()> {
        if !self.domain.is_omega(c) {
            return Err(FracError::OutsideDomain(c));
        }
        let l = self.domain.linear(c);
        self.phases[l] = -self.phases[l];
        Ok(())
    }

    /// Whether a cell has a face-neighbor of opposite phase.
    pub fn is_boundary(&self, c: Cell) -> bool {
        let p = self.phase(c);
        self.domain.neighbors(c).into_iter().any(|nb| self.phase(nb) != p)
    }

    /// Ω cells on the discrete boundary of `E`, in Ω order.
    pub fn boundary_omega(&self) -> Vec<usize> {
        (0..self.domain.omega().len())
            .filter(|&k| self.is_boundary(self.domain.omega()[k]))
            .collect()
    }

    /// The complementary set (phases and exterior negated).
    pub fn complement(&self) -> IndicatorSet {
        IndicatorSet {
            domain: self.domain.clone(),
            phases: self.phases.iter().map(|p| -p).collect(),
            exterior: self.exterior.complement(),
        }
    }

    /// Whether every lattice cell outside Ω agrees with the descriptor.
    pub fn exterior_consistent(&self) -> bool {
        self.domain.lattice_cells().all(|c| {
            self.domain.is_omega(c)
                || (self.phase(c) > 0) == self.exterior.contains(self.domain.center(c))
        })
    }

    /// Discrete boundary points: midpoints of faces between opposite phases
    /// (both cells in the lattice).
    pub fn interface_points(&self) -> Vec<[f64; 2]> {
        let d = &self.domain;
        let h = d.h();
        let mut pts = Vec::new();
        for c in d.lattice_cells() {
            for axis in 0..d.n() {
                let nb = {
                    let mut x = c;
                    x[axis] += 1;
                    x
                };
                if d.in_lattice(nb) && self.phase(c) != self.phase(nb) {
                    let mut p = d.center(c);
                    p[axis] += 0.5 * h;
                    pts.push(p);
                }
            }
        }
        pts
    }
}

/// Measures of `E ∩ B` and `E^c ∩ B` by center-in-ball cell counts.
pub fn measure(set: &IndicatorSet, center: [f64; 2], radius: f64) -> (f64, f64) {
    let d = set.domain();
    let mut inside = 0usize;
    let mut outside = 0usize;
    for c in d.lattice_cells() {
        let p = d.center(c);
        if norm([p[0] - center[0], p[1] - center[1]]) < radius {
            if set.phase(c) > 0 {
                inside += 1;
            } else {
                outside += 1;
            }
        }
    }
    let v = d.cell_volume();
    (inside as f64 * v, outside as f64 * v)
}
