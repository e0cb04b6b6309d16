use super::growth::check_radius;
use crate::error::{invalid, Result};
use crate::extension::{weighted_energy, ExtensionField};
use crate::grid::{norm, Configuration, Domain, ScalarField};
use crate::quad::Neumaier;

/// Weight of a face in `B_r`: 1 inside, ½ on the sphere, 0 outside.
fn face_weight(m: f64, r: f64, h: f64) -> f64 {
    let tol = 1e-9 * h;
    if m < r - tol {
        1.0
    } else if m <= r + tol {
        0.5
    } else {
        0.0
    }
}

/// Face midpoints and squared jumps of `v`.
fn face_terms<'a>(v: &'a ScalarField) -> impl Iterator<Item = ([f64; 2], f64)> + 'a {
    let d = v.domain();
    let vals = v.values();
    d.faces().iter().map(move |&(a, b)| {
        let (p, q) = (d.center(d.field_cell(a)), d.center(d.field_cell(b)));
        let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        let du = vals[b] - vals[a];
        (mid, du * du)
    })
}

/// `∫_{B_r} |∇v|² w(|x|)` from face differences, `w` evaluated at the
/// face midpoint.
fn ball_dirichlet<W: Fn(f64) -> f64>(v: &ScalarField, r: f64, w: W) -> f64 {
    let d = v.domain();
    let (h, n) = (d.h(), d.n());
    let scale = h.powi(n as i32 - 2);
    let mut acc = Neumaier::default();
    for (mid, du2) in face_terms(v) {
        let m = norm(mid);
        let fw = face_weight(m, r, h);
        if fw > 0.0 {
            acc.add(fw * scale * du2 * w(m));
        }
    }
    acc.value()
}

/// `∫_{∂B_r} v²`: the mean of `v²` over cells with
/// `|x| ∈ [r − h/2, r + h/2)` times the measure of the sphere.
pub fn shell_integral(v: &ScalarField, r: f64) -> f64 {
    let d = v.domain();
    let h = d.h();
    let mut acc = Neumaier::default();
    let mut count = 0usize;
    for k in 0..d.field_len() {
        let rho = norm(d.center(d.field_cell(k)));
        if rho >= r - 0.5 * h && rho < r + 0.5 * h {
            let x = v.values()[k];
            acc.add(x * x);
            count += 1;
        }
    }
    if count == 0 {
        return 0.0;
    }
    let sphere = if d.n() == 1 { 2.0 } else { 2.0 * std::f64::consts::PI * r };
    sphere * acc.value() / count as f64
}

fn same_domain(a: &Domain, b: &Domain) -> Result<()> {
    if a != b {
        return Err(invalid("U", "extension mesh lives on a different domain"));
    }
    Ok(())
}

/// Weiss energy
/// `Φ(r) = r^{σ−n}(∫_{B_r}|∇u|² + ĉ ∫_{𝓑_r⁺} z^{1−σ}|∇U|²) − (1 − σ/2) r^{σ−n−1} ∫_{∂B_r} u²`.
///
/// The Dirichlet part counts both phases, as in the functional.
pub fn weiss_phi(config: &Configuration, ext: &ExtensionField, r: f64, c_hat: f64) -> Result<f64> {
    let d = config.domain();
    same_domain(d, ext.mesh().domain())?;
    check_radius(d, r, 4.0)?;
    if !(c_hat.is_finite() && c_hat > 0.0) {
        return Err(invalid("c_hat", format!("must be positive, got {c_hat}")));
    }
    let (n, s) = (d.n() as f64, config.sigma);
    let dir = ball_dirichlet(&config.u_plus, r, |_| 1.0) + ball_dirichlet(&config.u_minus, r, |_| 1.0);
    let we = weighted_energy(ext, r)?;
    let shell = shell_integral(&config.u(), r);
    Ok(r.powf(s - n) * (dir + c_hat * we) - (1.0 - 0.5 * s) * r.powf(s - n - 1.0) * shell)
}

/// Alt–Caffarelli–Friedman functional
/// `Ψ(r) = r^{−4} ∫_{B_r}|∇u⁺|²|x|^{2−n} · ∫_{B_r}|∇u⁻|²|x|^{2−n}`.
///
/// In 1D the weight `|x|^{−1}` is capped at `2/h` so the face through
/// the origin stays finite.
pub fn acf_psi(u_plus: &ScalarField, u_minus: &ScalarField, r: f64) -> Result<f64> {
    let d = u_plus.domain();
    if **d != **u_minus.domain() {
        return Err(invalid("u_minus", "phases live on different domains"));
    }
    check_radius(d, r, 4.0)?;
    let (n, h) = (d.n(), d.h());
    let w = |m: f64| if n == 2 { 1.0 } else { 1.0 / m.max(0.5 * h) };
    let a = ball_dirichlet(u_plus, r, w);
    let b = ball_dirichlet(u_minus, r, w);
    Ok(a * b / r.powi(4))
}
