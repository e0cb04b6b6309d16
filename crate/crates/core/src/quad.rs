//! Quadrature helpers: Gauss-Legendre rules, adaptive Gauss-Kronrod,
//! compensated summation and polar integration over axis-aligned cells.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    /// Integrates `f` over [a, b].
    #[inline]
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + r * x);
        }
        s * r
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rule of order `n` (1 ≤ n ≤ 64).
pub fn gauss(n: usize) -> &'static GaussRule {
    static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (1..=64).map(GaussRule::new).collect());
    &rules[n - 1]
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let x = r * XGK[j];
        let s = f(c - x) + f(c + x);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * r, ((resk - resg) * r).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration with global bisection.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut pieces: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    pieces.push((a, b, v, e));
    for _ in 0..2000 {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (k, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, _, _) = pieces.swap_remove(k);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&mut f, pa, m);
        let (v2, e2) = gk15(&mut f, m, pb);
        pieces.push((pa, m, v1, e1));
        pieces.push((m, pb, v2, e2));
    }
    pieces.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut s = Neumaier::default();
    for p in &pieces {
        s.add(p.2);
    }
    s.value()
}

/// Adaptive integration over consecutive breakpoints.
pub fn adaptive_pieces<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> f64 {
    let mut s = Neumaier::default();
    let pieces = breaks.len().saturating_sub(1).max(1);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            s.add(adaptive(&mut f, w[0], w[1], abs_tol / pieces as f64, rel_tol));
        }
    }
    s.value()
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice in index order.
pub fn sum(xs: &[f64]) -> f64 {
    let mut s = Neumaier::default();
    for &x in xs {
        s.add(x);
    }
    s.value()
}

/// Axis-aligned rectangle `[lo[0], hi[0]] x [lo[1], hi[1]]`.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn corners(&self) -> [[f64; 2]; 4] {
        [
            [self.lo[0], self.lo[1]],
            [self.hi[0], self.lo[1]],
            [self.hi[0], self.hi[1]],
            [self.lo[0], self.hi[1]],
        ]
    }

    pub fn contains_strict(&self, p: [f64; 2]) -> bool {
        p[0] > self.lo[0] && p[0] < self.hi[0] && p[1] > self.lo[1] && p[1] < self.hi[1]
    }
}

/// Parameter interval `[t0, t1]` (with `t ≥ 0`) on which `p + t·e` lies in `rect`.
pub fn ray_rect(p: [f64; 2], e: [f64; 2], rect: &Rect) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = f64::INFINITY;
    for d in 0..2 {
        if e[d].abs() < 1e-300 {
            if p[d] < rect.lo[d] || p[d] > rect.hi[d] {
                return None;
            }
        } else {
            let a = (rect.lo[d] - p[d]) / e[d];
            let b = (rect.hi[d] - p[d]) / e[d];
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            t0 = t0.max(a);
            t1 = t1.min(b);
        }
    }
    if t1 > t0 {
        Some((t0, t1))
    } else {
        None
    }
}

fn wrap_pi(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    } else if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Integral of a radial function over a rectangle in polar coordinates
/// about `p`: `∫_rect f(|y-p|) dy = ∫_θ [F(r_out) − F(r_in)] dθ` where
/// `F' (r) = r f(r)`. The angular range is split at the corner directions
/// and each piece is integrated adaptively to relative accuracy `rel_tol`.
pub fn polar_rect<F: Fn(f64) -> f64>(p: [f64; 2], rect: &Rect, anti: F, rel_tol: f64) -> f64 {
    let corners = rect.corners();
    let inside = rect.contains_strict(p);
    let mut angles: Vec<f64> = Vec::with_capacity(6);
    if inside {
        for c in &corners {
            let mut a = (c[1] - p[1]).atan2(c[0] - p[0]);
            if a < 0.0 {
                a += 2.0 * PI;
            }
            angles.push(a);
        }
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let first = angles[0];
        angles.push(first + 2.0 * PI);
    } else {
        let mid = [
            0.5 * (rect.lo[0] + rect.hi[0]) - p[0],
            0.5 * (rect.lo[1] + rect.hi[1]) - p[1],
        ];
        let phi = mid[1].atan2(mid[0]);
        for c in &corners {
            let a = (c[1] - p[1]).atan2(c[0] - p[0]);
            angles.push(phi + wrap_pi(a - phi));
        }
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let mut total = 0.0;
    for w in angles.windows(2) {
        if w[1] - w[0] < 1e-15 {
            continue;
        }
        total += adaptive(
            |th| {
                let e = [th.cos(), th.sin()];
                match ray_rect(p, e, rect) {
                    Some((t0, t1)) => anti(t1) - anti(t0),
                    None => 0.0,
                }
            },
            w[0],
            w[1],
            0.0,
            rel_tol,
        );
    }
    total
}

/// Tensor Gauss rule over a rectangle.
pub fn gauss_rect<F: FnMut([f64; 2]) -> f64>(rect: &Rect, order: usize, mut f: F) -> f64 {
    let rule = gauss(order);
    let c = [0.5 * (rect.lo[0] + rect.hi[0]), 0.5 * (rect.lo[1] + rect.hi[1])];
    let r = [0.5 * (rect.hi[0] - rect.lo[0]), 0.5 * (rect.hi[1] - rect.lo[1])];
    let mut s = 0.0;
    for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
        for (yj, wj) in rule.nodes.iter().zip(&rule.weights) {
            s += wi * wj * f([c[0] + r[0] * xi, c[1] + r[1] * yj]);
        }
    }
    s * r[0] * r[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exact_for_polynomials() {
        let r = gauss(6);
        let v = r.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
    }

    #[test]
    fn adaptive_handles_sqrt() {
        let v = adaptive(|x| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13);
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn polar_rect_area() {
        let rect = Rect { lo: [0.0, 0.0], hi: [1.0, 2.0] };
        // f = 1 -> F(r) = r^2/2
        for p in [[0.3, 0.4], [-1.0, 0.5], [2.0, 3.0], [1.0, -0.5]] {
            let v = polar_rect(p, &rect, |r| 0.5 * r * r, 1e-13);
            assert!((v - 2.0).abs() < 1e-12, "{p:?} {v}");
        }
    }
}
