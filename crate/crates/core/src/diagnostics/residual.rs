use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{Cell, Configuration, IndicatorSet, ScalarField};
use crate::kernel::CurvatureEvaluator;

/// Euler–Lagrange balance at one interface face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualCell {
    /// The cell on the `E` side of the face.
    pub cell: Cell,
    pub kappa: f64,
    pub grad_plus_sq: f64,
    pub grad_minus_sq: f64,
    /// `κ_σ − (|∇u⁺|² − |∇u⁻|²)`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub n: usize,
    pub cells: Vec<ResidualCell>,
    /// Interface faces that failed the flatness screen.
    pub skipped: usize,
}

impl ResidualReport {
    pub fn max_abs(&self) -> f64 {
        self.cells.iter().fold(0.0, |m, c| m.max(c.residual.abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.n == 1 { "ix" } else { "ix,iy" });
        out.push_str(",kappa,grad_plus_sq,grad_minus_sq,residual\n");
        for c in &self.cells {
            if self.n == 1 {
                let _ = write!(out, "{}", c.cell[0]);
            } else {
                let _ = write!(out, "{},{}", c.cell[0], c.cell[1]);
            }
            let _ = writeln!(out, ",{},{},{},{}", c.kappa, c.grad_plus_sq, c.grad_minus_sq, c.residual);
        }
        out
    }
}

fn shift(c: Cell, axis: usize, k: i32) -> Cell {
    let mut x = c;
    x[axis] += k;
    x
}

/// Exactly one phase change along the six cells `b − 2e … a + 2e`
/// (offset tangentially by `t`), where `a = b + e`.
fn single_change(set: &IndicatorSet, b: Cell, axis: usize, dir: i32, t: Option<(usize, i32)>) -> bool {
    let d = set.domain();
    let mut prev: Option<i8> = None;
    let mut changes = 0;
    for k in -2..=3 {
        let mut c = shift(b, axis, k * dir);
        if let Some((ta, off)) = t {
            c = shift(c, ta, off);
        }
        if !d.in_lattice(c) {
            return false;
        }
        let p = set.phase(c);
        if prev.is_some_and(|q| q != p) {
            changes += 1;
        }
        prev = Some(p);
    }
    changes == 1
}

/// Squared gradient of `v` at `c`: slope of the linear fit through
/// `c, c + e, c + 2e` along the normal, central difference across it.
fn one_sided_grad_sq(v: &ScalarField, c: Cell, axis: usize, dir: i32) -> Option<f64> {
    let d = v.domain();
    let h = d.h();
    let v0 = v.get(c)?;
    let v2 = v.get(shift(c, axis, 2 * dir))?;
    let normal = (v2 - v0) / (2.0 * h);
    let mut g = normal * normal;
    if d.n() == 2 {
        let ta = 1 - axis;
        let tan = (v.get(shift(c, ta, 1))? - v.get(shift(c, ta, -1))?) / (2.0 * h);
        g += tan * tan;
    }
    Some(g)
}

/// `κ_σ − (|∇u⁺|² − |∇u⁻|²)` at every interface face between two Ω
/// cells whose neighborhood is flat: a single phase change along the
/// normal line through the face and, in 2D, along the two parallel lines.
pub fn el_residual(config: &Configuration, evaluator: &CurvatureEvaluator) -> Result<ResidualReport> {
    let set = &config.set;
    let d = set.domain();
    let mut faces = Vec::new();
    for &c in d.omega() {
        for axis in 0..d.n() {
            let nb = shift(c, axis, 1);
            if d.is_omega(nb) && set.phase(nb) != set.phase(c) {
                faces.push((c, axis));
            }
        }
    }
    let results: Vec<Option<ResidualCell>> = faces
        .par_iter()
        .map(|&(c, axis)| -> Result<Option<ResidualCell>> {
            let nb = shift(c, axis, 1);
            // `a` in E, `b` outside, `dir` points from b into E.
            let (a, b, dir) = if set.phase(nb) > 0 { (nb, c, 1) } else { (c, nb, -1) };
            let mut flat = single_change(set, b, axis, dir, None);
            if d.n() == 2 {
                let ta = 1 - axis;
                flat = flat && single_change(set, b, axis, dir, Some((ta, 1))) && single_change(set, b, axis, dir, Some((ta, -1)));
            }
            if !flat {
                return Ok(None);
            }
            let gp = one_sided_grad_sq(&config.u_plus, a, axis, dir);
            let gm = one_sided_grad_sq(&config.u_minus, b, axis, -dir);
            let (Some(gp), Some(gm)) = (gp, gm) else { return Ok(None) };
            let kappa = evaluator.at_face(set, c, axis, 1)?;
            Ok(Some(ResidualCell {
                cell: a,
                kappa,
                grad_plus_sq: gp,
                grad_minus_sq: gm,
                residual: kappa - (gp - gm),
            }))
        })
        .collect::<Result<_>>()?;
    let skipped = results.iter().filter(|r| r.is_none()).count();
    Ok(ResidualReport {
        n: d.n(),
        cells: results.into_iter().flatten().collect(),
        skipped,
    })
}
