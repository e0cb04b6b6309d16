use crate::error::{invalid, FracError, Result};
use crate::grid::{measure, norm, rescale, Cell, Configuration, Domain, IndicatorSet, ScalarField};

/// Least-squares power law `y ≈ C r^p`, fitted in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    /// Root-mean-square residual of `log y`.
    pub residual: f64,
}

/// Fits `log y = log C + p log r`. Nonpositive samples make the fit
/// degenerate.
pub fn power_fit(radii: &[f64], values: &[f64]) -> Result<PowerFit> {
    if radii.len() != values.len() {
        return Err(invalid("values", "one value per radius"));
    }
    if radii.len() < 2 {
        return Err(FracError::DegenerateFit("need at least two radii".into()));
    }
    if values.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(FracError::DegenerateFit("exactly flat".into()));
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return Err(FracError::DegenerateFit("radii are not distinct".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let p = sxy / sxx;
    let b = my - p * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - b - p * x).powi(2)).sum();
    Ok(PowerFit {
        exponent: p,
        constant: b.exp(),
        residual: (rss / m).sqrt(),
    })
}

/// Dyadic radii `r_max, r_max/2, …` down to `r_min`, ascending.
pub fn dyadic_radii(r_min: f64, r_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = r_max;
    while r >= r_min * (1.0 - 1e-12) {
        out.push(r);
        r *= 0.5;
    }
    out.reverse();
    out
}

/// Every radius must resolve at least `min_cells` cells and fit inside Ω.
pub(crate) fn check_radius(d: &Domain, r: f64, min_cells: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid("r", format!("radius must be positive, got {r}")));
    }
    if r < min_cells * d.h() * (1.0 - 1e-12) {
        return Err(FracError::UnderResolved(format!(
            "radius {r} is below {min_cells}h = {}",
            min_cells * d.h()
        )));
    }
    if r > d.radius() * (1.0 + 1e-12) {
        return Err(invalid("r", format!("radius {r} exceeds the domain radius {}", d.radius())));
    }
    Ok(())
}

/// Errors unless the cells around the origin carry both phases.
pub fn check_origin_on_boundary(set: &IndicatorSet) -> Result<()> {
    let d = set.domain();
    let around: Vec<Cell> = if d.n() == 1 {
        vec![[-1, 0], [0, 0]]
    } else {
        vec![[-1, -1], [0, -1], [-1, 0], [0, 0]]
    };
    let first = set.phase(around[0]);
    if around.iter().all(|&c| set.phase(c) == first) {
        return Err(FracError::NotOnBoundary([0, 0]));
    }
    Ok(())
}

/// `max |v|` over field cells whose center lies in `B_r`.
pub(crate) fn sup_in_ball(v: &ScalarField, r: f64) -> f64 {
    let d = v.domain();
    (0..d.field_len())
        .filter(|&k| norm(d.center(d.field_cell(k))) < r)
        .map(|k| v.values()[k].abs())
        .fold(0.0, f64::max)
}

/// `min(|B_r∩E|, |B_r∩E^c|) / |B_r|` per radius, with the discrete
/// measure of the ball as denominator.
pub fn density_report(set: &IndicatorSet, radii: &[f64]) -> Result<Vec<f64>> {
    check_origin_on_boundary(set)?;
    radii
        .iter()
        .map(|&r| {
            check_radius(set.domain(), r, 4.0)?;
            let (a, b) = measure(set, [0.0, 0.0], r);
            Ok(a.min(b) / (a + b))
        })
        .collect()
}

/// Growth exponent of `sup_{B_r} |u|` against `r`.
///
/// A field vanishing on some ball is reported as
/// [`FracError::DegenerateFit`] ("exactly flat").
pub fn holder_fit(u: &ScalarField, radii: &[f64]) -> Result<PowerFit> {
    for &r in radii {
        check_radius(u.domain(), r, 4.0)?;
    }
    let sups: Vec<f64> = radii.iter().map(|&r| sup_in_ball(u, r)).collect();
    power_fit(radii, &sups)
}

/// Normalized phase sizes `λ_r^± = r^{σ/2−1} sup_{B_r} u^±`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaReport {
    pub radii: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub product: Vec<f64>,
    /// Decay of the product; `None` when it vanishes (one-phase data).
    pub fit: Option<PowerFit>,
}

pub fn lambda_product(u_plus: &ScalarField, u_minus: &ScalarField, radii: &[f64], sigma: f64) -> Result<LambdaReport> {
    for &r in radii {
        check_radius(u_plus.domain(), r, 4.0)?;
    }
    let lam = |v: &ScalarField| -> Vec<f64> {
        radii.iter().map(|&r| r.powf(0.5 * sigma - 1.0) * sup_in_ball(v, r)).collect()
    };
    let plus = lam(u_plus);
    let minus = lam(u_minus);
    let product: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| a * b).collect();
    let fit = match power_fit(radii, &product) {
        Ok(f) => Some(f),
        Err(FracError::DegenerateFit(_)) if product.contains(&0.0) => None,
        Err(e) => return Err(e),
    };
    Ok(LambdaReport {
        radii: radii.to_vec(),
        plus,
        minus,
        product,
        fit,
    })
}

/// Difference between consecutive rescalings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupStep {
    pub from: f64,
    pub to: f64,
    /// `max_Ω |u_to − u_from| / max_Ω |u_from|` (zero when both vanish).
    pub defect: f64,
}

/// Rescales at each radius in the given order and compares neighbors on
/// the common unit-ball lattice.
pub fn blowup_sequence(config: &Configuration, radii: &[f64]) -> Result<Vec<BlowupStep>> {
    check_origin_on_boundary(&config.set)?;
    let scaled = radii.iter().map(|&r| rescale(config, r).map(|c| c.u())).collect::<Result<Vec<_>>>()?;
    Ok(radii
        .windows(2)
        .zip(scaled.windows(2))
        .map(|(r, u)| {
            let (a, b) = (u[0].omega_values(), u[1].omega_values());
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            let defect = if scale > 0.0 {
                diff / scale
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            BlowupStep {
                from: r[0],
                to: r[1],
                defect,
            }
        })
        .collect())
}

/// Width `2d` of the thinnest slab `{|x·e − c| ≤ d}` containing the
/// discrete boundary points in `B_r`.
pub fn flatness(set: &IndicatorSet, r: f64, direction: [f64; 2]) -> Result<f64> {
    let d = set.domain();
    check_radius(d, r, 4.0)?;
    let len = norm(direction);
    if (len - 1.0).abs() > 1e-9 {
        return Err(invalid("direction", format!("must be a unit vector, has length {len}")));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in set.interface_points() {
        if norm(p) < r {
            let s = p[0] * direction[0] + p[1] * direction[1];
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    if lo > hi {
        return Err(FracError::EmptyBoundary);
    }
    Ok(hi - lo)
}

/// Minimal [`flatness`] over `count` directions spread over a half turn
/// (a single direction in 1D). Returns the best direction and its width.
pub fn flatness_fan(set: &IndicatorSet, r: f64, count: usize) -> Result<([f64; 2], f64)> {
    if set.domain().n() == 1 {
        let e = [1.0, 0.0];
        return Ok((e, flatness(set, r, e)?));
    }
    if count == 0 {
        return Err(invalid("count", "at least one direction"));
    }
    let mut best: Option<([f64; 2], f64)> = None;
    for k in 0..count {
        let t = std::f64::consts::PI * k as f64 / count as f64;
        let e = [t.cos(), t.sin()];
        let w = flatness(set, r, e)?;
        if best.is_none_or(|(_, b)| w < b) {
            best = Some((e, w));
        }
    }
    Ok(best.expect("count > 0"))
}
