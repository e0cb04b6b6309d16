//! Weighted Dirichlet energies `∫ z^{1−σ} |∇U|² dX` on half-balls and the
//! constrained minimization behind the calibration identity.

use super::mesh::{ExtensionField, ExtensionMesh};
use crate::error::{FracError, Result};
use crate::grid::IndicatorSet;
use crate::linalg::{pcg, Csr, Ic0};
use crate::quad::Neumaier;

/// `∫_a^b z^{1−σ} dz`.
fn weight_integral(a: f64, b: f64, sigma: f64) -> f64 {
    (b.powf(2.0 - sigma) - a.powf(2.0 - sigma)) / (2.0 - sigma)
}

/// Conductance of the z-face between levels `a < b`: the exact integral
/// harmonic mean `σ / (b^σ − a^σ)` of the weight over the segment.
#[inline]
fn z_conductance(a: f64, b: f64, sigma: f64) -> f64 {
    sigma / (b.powf(sigma) - a.powf(sigma))
}

/// Dual-cell extent in z of level `k`.
fn dual(z: &[f64], k: usize) -> (f64, f64) {
    let lo = if k == 0 { 0.0 } else { 0.5 * (z[k - 1] + z[k]) };
    let hi = if k + 1 == z.len() { z[k] } else { 0.5 * (z[k] + z[k + 1]) };
    (lo, hi)
}

fn check_region(mesh: &ExtensionMesh, r: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(FracError::RegionTooLarge(format!("radius {r} must be positive")));
    }
    if r > mesh.x_extent() - mesh.he() {
        return Err(FracError::RegionTooLarge(format!(
            "radius {r} exceeds the x-extent {} of the mesh",
            mesh.x_extent() - mesh.he()
        )));
    }
    if r >= *mesh.z().last().unwrap() {
        return Err(FracError::RegionTooLarge(format!("radius {r} exceeds z_max")));
    }
    Ok(())
}

#[inline]
fn norm2(x: [f64; 2]) -> f64 {
    x[0] * x[0] + x[1] * x[1]
}

/// `∫_{𝓑_r⁺} z^{1−σ} |∇U|² dX` over the half-ball of radius `r` centered
/// at the origin, without the `c_{n,σ}` prefactor.
///
/// Finite differences across each face are integrated over the part of the
/// face's dual cell that lies inside the half-ball.
pub fn weighted_energy(u: &ExtensionField, r: f64) -> Result<f64> {
    let mesh = u.mesh();
    check_region(mesh, r)?;
    let (n, he, sigma) = (mesh.n(), mesh.he(), mesh.sigma());
    let z = mesh.z();
    let r2 = r * r;
    let scale_x = he.powi(n as i32 - 2);
    let scale_z = he.powi(n as i32);
    let mut acc = Neumaier::default();
    for iy in 0..mesh.ny() {
        for ix in 0..mesh.nx() {
            let x = mesh.x_of(ix, iy);
            // Faces towards +x (and +y).
            for axis in 0..n {
                let (jx, jy) = if axis == 0 { (ix + 1, iy) } else { (ix, iy + 1) };
                if jx >= mesh.nx() || jy >= mesh.ny() {
                    continue;
                }
                let mut mid = x;
                mid[axis] += 0.5 * he;
                let m2 = norm2(mid);
                if m2 >= r2 {
                    continue;
                }
                let zc = (r2 - m2).sqrt();
                for k in 0..z.len() {
                    let (lo, hi) = dual(z, k);
                    if lo >= zc {
                        break;
                    }
                    let du = u.get(jx, jy, k) - u.get(ix, iy, k);
                    acc.add(scale_x * weight_integral(lo, hi.min(zc), sigma) * du * du);
                }
            }
            let x2 = norm2(x);
            if x2 >= r2 {
                continue;
            }
            let zc = (r2 - x2).sqrt();
            for k in 0..z.len() - 1 {
                let (a, b) = (z[k], z[k + 1]);
                if a >= zc {
                    break;
                }
                let frac = (b.min(zc) - a) / (b - a);
                let du = u.get(ix, iy, k + 1) - u.get(ix, iy, k);
                acc.add(scale_z * z_conductance(a, b, sigma) * frac * du * du);
            }
        }
    }
    Ok(acc.value())
}

/// Nodes strictly inside the open half-ball (level 0 excluded).
fn interior_mask(mesh: &ExtensionMesh, r: f64) -> Vec<bool> {
    let z = mesh.z();
    (0..mesh.len())
        .map(|idx| {
            let (ix, iy, k) = mesh.node(idx);
            k > 0 && norm2(mesh.x_of(ix, iy)) + z[k] * z[k] < r * r
        })
        .collect()
}

/// Faces `(p, q, conductance)` with at least one endpoint in `inner`.
fn faces(mesh: &ExtensionMesh, inner: &[bool]) -> Vec<(usize, usize, f64)> {
    let (n, he, sigma) = (mesh.n(), mesh.he(), mesh.sigma());
    let z = mesh.z();
    let scale_x = he.powi(n as i32 - 2);
    let scale_z = he.powi(n as i32);
    let mut out = Vec::new();
    for (p, &inside) in inner.iter().enumerate() {
        let (ix, iy, k) = mesh.node(p);
        let mut push = |q: usize, g: f64| {
            if inside || inner[q] {
                out.push((p, q, g));
            }
        };
        if k > 0 {
            let (lo, hi) = dual(z, k);
            let gx = scale_x * weight_integral(lo, hi, sigma);
            if ix + 1 < mesh.nx() {
                push(mesh.index(ix + 1, iy, k), gx);
            }
            if n == 2 && iy + 1 < mesh.ny() {
                push(mesh.index(ix, iy + 1, k), gx);
            }
        }
        if k + 1 < z.len() {
            push(mesh.index(ix, iy, k + 1), scale_z * z_conductance(z[k], z[k + 1], sigma));
        }
    }
    out
}

/// The discrete functional minimized by [`constrained_extension_solve`]:
/// conductance-weighted squared differences over faces touching the
/// interior nodes of the half-ball.
pub fn form_energy(u: &ExtensionField, r: f64) -> Result<f64> {
    let mesh = u.mesh();
    check_region(mesh, r)?;
    let inner = interior_mask(mesh, r);
    let v = u.values();
    let mut acc = Neumaier::default();
    for (p, q, g) in faces(mesh, &inner) {
        let d = v[q] - v[p];
        acc.add(g * d * d);
    }
    Ok(acc.value())
}

/// Minimizes [`form_energy`] over fields equal to `χ_F − χ_{F^c}` on
/// level 0 and to `boundary` outside the half-ball of radius `r`.
pub fn constrained_extension_solve(trace: &IndicatorSet, boundary: &ExtensionField, r: f64) -> Result<ExtensionField> {
    let mesh = boundary.mesh();
    check_region(mesh, r)?;
    if **trace.domain() != **mesh.domain() {
        return Err(crate::error::invalid("trace", "trace and mesh live on different domains"));
    }
    let mut values = boundary.values().to_vec();
    for (idx, v) in values[..mesh.per_level()].iter_mut().enumerate() {
        let (ix, iy, _) = mesh.node(idx);
        *v = trace.phase(mesh.cell_of(ix, iy)) as f64;
    }
    let inner = interior_mask(mesh, r);
    let mut unknown = vec![usize::MAX; mesh.len()];
    let mut nodes = Vec::new();
    for (p, &inside) in inner.iter().enumerate() {
        if inside {
            unknown[p] = nodes.len();
            nodes.push(p);
        }
    }
    let nu = nodes.len();
    if nu == 0 {
        return Ok(ExtensionField::from_values(mesh.clone(), values));
    }
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; nu];
    for (p, q, g) in faces(mesh, &inner) {
        let (up, uq) = (unknown[p], unknown[q]);
        if up != usize::MAX {
            trip.push((up, up, g));
        }
        if uq != usize::MAX {
            trip.push((uq, uq, g));
        }
        match (up != usize::MAX, uq != usize::MAX) {
            (true, true) => {
                trip.push((up, uq, -g));
                trip.push((uq, up, -g));
            }
            (true, false) => rhs[up] += g * values[q],
            (false, true) => rhs[uq] += g * values[p],
            (false, false) => {}
        }
    }
    let a = Csr::from_triplets(nu, trip);
    let mut x: Vec<f64> = nodes.iter().map(|&p| values[p]).collect();
    let pre = Ic0::new(&a)?;
    pcg(&a, &rhs, &mut x, &pre, 1e-11, 20 * nu + 500)?;
    for (i, &p) in nodes.iter().enumerate() {
        values[p] = x[i];
    }
    Ok(ExtensionField::from_values(mesh.clone(), values))
}
