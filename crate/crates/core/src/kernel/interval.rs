use crate::error::{FracError, Result};

/// `∫_a^b ∫_c^d |x − y|^{−1−σ} dy dx` for `a < b ≤ c < d`; `d` may be `+∞`.
pub fn interval_interaction(a: f64, b: f64, c: f64, d: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(crate::error::invalid("sigma", format!("σ must lie in (0,1), got {sigma}")));
    }
    if !(a < b && b <= c && c < d) {
        return Err(FracError::OverlappingIntervals { a, b, c, d });
    }
    Ok(interval_unchecked(a, b, c, d, sigma))
}

/// Interaction of two disjoint intervals given in any order; infinite ends allowed.
pub fn disjoint_intervals(i1: (f64, f64), i2: (f64, f64), sigma: f64) -> f64 {
    let (l, r) = if i1.0 <= i2.0 { (i1, i2) } else { (i2, i1) };
    if l.0 == f64::NEG_INFINITY {
        // Reflect so the unbounded interval sits on the right.
        return interval_unchecked(-r.1, -r.0, -l.1, f64::INFINITY, sigma);
    }
    interval_unchecked(l.0, l.1, r.0, r.1, sigma)
}

pub(crate) fn interval_unchecked(a: f64, b: f64, c: f64, d: f64, sigma: f64) -> f64 {
    let p = 1.0 - sigma;
    let s = sigma * p;
    let gap = c - b;
    let w = b - a;
    if d.is_infinite() {
        // ∫_a^b (c − x)^{−σ}/σ dx.
        return ((c - a).powf(p) - gap.powf(p)) / s;
    }
    let len = d - c;
    // Far field: second difference expansion avoids cancellation.
    if w == len && gap > 0.0 && gap > 40.0 * w {
        let delta = (c - a) / w;
        return w.powf(p) * unit_second_difference(delta, sigma);
    }
    ((c - a).powf(p) - gap.powf(p) - (d - a).powf(p) + (d - b).powf(p)) / s
}

/// Interaction of unit cells at center distance `delta` (≥ 1) in 1D,
/// i.e. `−[g(δ+1) − 2g(δ) + g(δ−1)]/(σ(1−σ))` with `g(x) = x^{1−σ}`.
pub fn unit_second_difference(delta: f64, sigma: f64) -> f64 {
    let p = 1.0 - sigma;
    if delta < 40.0 {
        let g = |x: f64| if x <= 0.0 { 0.0 } else { x.powf(p) };
        return -(g(delta + 1.0) - 2.0 * g(delta) + g(delta - 1.0)) / (sigma * p);
    }
    // 2 Σ_k g^{(2k)}(δ)/(2k)!, with g^{(m)} = p (p−1)…(p−m+1) δ^{p−m}.
    let mut coef = p; // falling factorial up to order m
    let mut total = 0.0;
    let mut fact = 1.0;
    let mut m = 1;
    loop {
        coef *= p - m as f64;
        m += 1;
        fact *= (m - 1) as f64 * m as f64;
        let term = 2.0 * coef * delta.powf(p - m as f64) / fact;
        total += term;
        if term.abs() < 1e-18 * total.abs() || m > 40 {
            break;
        }
        coef *= p - m as f64;
        m += 1;
    }
    -total / (sigma * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_value() {
        let v = interval_interaction(0.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        assert!((v - 4.0 * (2.0 - 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn far_field_matches_direct() {
        for &s in &[0.2, 0.5, 0.8] {
            for &d in &[41.0, 60.0, 200.0] {
                let a = unit_second_difference(d, s);
                let g = |x: f64| x.powf(1.0 - s);
                let direct = -(g(d + 1.0) - 2.0 * g(d) + g(d - 1.0)) / (s * (1.0 - s));
                assert!(((a - direct) / a).abs() < 1e-7, "{s} {d} {a} {direct}");
                let mid = d.powf(-1.0 - s);
                assert!(((a - mid) / mid).abs() < 0.01);
            }
        }
    }
}
