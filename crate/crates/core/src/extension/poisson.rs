//! The Poisson kernel `P(x, z) = c̃ z^σ / (|x|² + z²)^{(n+σ)/2}` and its
//! integrals over intervals and lattice cells.

use std::f64::consts::PI;

use statrs::function::beta::{beta, beta_reg};

use crate::error::{invalid, FracError, Result};
use crate::quad::{adaptive, gauss_rect, Rect};

/// Largest tolerated relative gap between the numeric and closed-form mass.
pub const NORMALIZATION_TOL: f64 = 1e-4;

/// `∫_{ℝⁿ} (1 + |t|²)^{−(n+σ)/2} dt` by quadrature.
///
/// The unbounded part is mapped to `[0, 1]` by `t = s^{−1/σ}`, which turns
/// the slowly decaying tail into a smooth integrand.
pub fn kernel_mass_numeric(n: usize, sigma: f64) -> f64 {
    let e = (n as f64 + sigma) / 2.0;
    let radial = |t: f64| t.powi(n as i32 - 1) * (1.0 + t * t).powf(-e);
    let near = adaptive(radial, 0.0, 1.0, 0.0, 1e-14);
    // t = v^{−1/σ}: dt = −(1/σ) v^{−1/σ−1} dv.
    let far = adaptive(
        |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            let t = v.powf(-1.0 / sigma);
            radial(t) * t / (sigma * v)
        },
        0.0,
        1.0,
        0.0,
        1e-14,
    );
    let sphere = if n == 1 { 2.0 } else { 2.0 * PI };
    sphere * (near + far)
}

/// Closed form of [`kernel_mass_numeric`]: `B(½, σ/2)` in 1D, `2π/σ` in 2D.
pub fn kernel_mass_exact(n: usize, sigma: f64) -> f64 {
    if n == 1 {
        beta(0.5, 0.5 * sigma)
    } else {
        2.0 * PI / sigma
    }
}

/// `c̃_{n,σ}` making `P(·, z)` a probability density for every `z`.
pub fn kernel_constant(n: usize, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(invalid("sigma", format!("σ must lie in (0,1), got {sigma}")));
    }
    if n != 1 && n != 2 {
        return Err(invalid("n", "dimension must be 1 or 2"));
    }
    let num = kernel_mass_numeric(n, sigma);
    let exact = kernel_mass_exact(n, sigma);
    let gap = (num - exact).abs() / exact;
    if gap > NORMALIZATION_TOL {
        return Err(FracError::Normalization(gap));
    }
    Ok(1.0 / num)
}

/// `I_w(a, b)` for `w ∈ [0, ½]`.
fn reg_beta(a: f64, b: f64, w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        beta_reg(a, b, w)
    }
}

/// Normalized Poisson kernel for one `(n, σ)`.
#[derive(Debug, Clone, Copy)]
pub struct PoissonKernel {
    n: usize,
    sigma: f64,
    c: f64,
    /// `c̃ · B(½, σ/2)` (1D) or `c̃ · B(½, (1+σ)/2)` (2D, inner integral).
    cb: f64,
}

impl PoissonKernel {
    pub fn new(n: usize, sigma: f64) -> Result<PoissonKernel> {
        let c = kernel_constant(n, sigma)?;
        let cb = if n == 1 {
            c * beta(0.5, 0.5 * sigma)
        } else {
            c * beta(0.5, 0.5 * (1.0 + sigma))
        };
        Ok(PoissonKernel { n, sigma, c, cb })
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn eval(&self, x: [f64; 2], z: f64) -> f64 {
        let r2 = x[0] * x[0] + if self.n == 2 { x[1] * x[1] } else { 0.0 };
        self.c * z.powf(self.sigma) * (r2 + z * z).powf(-(self.n as f64 + self.sigma) / 2.0)
    }

    /// 1D: `∫_0^s P(t, z) dt` (odd in `s`, tends to ½).
    pub fn cdf_1d(&self, s: f64, z: f64) -> f64 {
        if s.is_infinite() {
            return 0.5 * self.cb * s.signum();
        }
        let t = s / z;
        let t2 = t * t;
        // w = t²/(1+t²), written so that both w and 1 − w stay accurate.
        let w = t2 / (1.0 + t2);
        let i = if w <= 0.5 {
            reg_beta(0.5, 0.5 * self.sigma, w)
        } else {
            1.0 - beta_reg(0.5 * self.sigma, 0.5, 1.0 / (1.0 + t2))
        };
        0.5 * self.cb * i * s.signum()
    }

    /// 1D: `∫_a^b P(x − y, z) dy`.
    pub fn interval_mass(&self, a: f64, b: f64, x: f64, z: f64) -> f64 {
        let up = |y: f64| {
            if y.is_infinite() {
                0.5 * self.cb * y.signum()
            } else {
                self.cdf_1d(y - x, z)
            }
        };
        up(b) - up(a)
    }

    /// 2D: `∫_0^X (x² + c²)^{−(2+σ)/2} dx` times `c̃ z^σ`.
    fn inner_2d(&self, x_hi: f64, c2: f64, zs: f64) -> f64 {
        if x_hi == 0.0 {
            return 0.0;
        }
        let x2 = x_hi * x_hi;
        let c = c2.sqrt();
        let i = if x2 <= c2 {
            reg_beta(0.5, 0.5 * (1.0 + self.sigma), x2 / (x2 + c2))
        } else {
            1.0 - beta_reg(0.5 * (1.0 + self.sigma), 0.5, c2 / (x2 + c2))
        };
        0.5 * self.cb * zs * c.powf(-1.0 - self.sigma) * i * x_hi.signum()
    }

    /// 2D: `∫_rect P(y, z) dy` for a rectangle given relative to the
    /// evaluation point. `h` is the cell size, used to pick the rule.
    pub fn rect_mass(&self, rect: &Rect, z: f64, h: f64) -> f64 {
        let dx = rect.lo[0].max(-rect.hi[0]).max(0.0);
        let dy = rect.lo[1].max(-rect.hi[1]).max(0.0);
        let dist = dx.hypot(dy);
        if z >= 2.0 * h || dist >= 2.0 * h {
            return gauss_rect(rect, 4, |y| self.eval(y, z));
        }
        // Closed form across x, adaptive along y with a break at the peak.
        let zs = z.powf(self.sigma);
        let f = |y: f64| {
            let c2 = y * y + z * z;
            self.inner_2d(rect.hi[0], c2, zs) - self.inner_2d(rect.lo[0], c2, zs)
        };
        if rect.lo[1] < 0.0 && rect.hi[1] > 0.0 {
            adaptive(f, rect.lo[1], 0.0, 1e-15, 1e-12) + adaptive(f, 0.0, rect.hi[1], 1e-15, 1e-12)
        } else {
            adaptive(f, rect.lo[1], rect.hi[1], 1e-15, 1e-12)
        }
    }

    /// Radial antiderivative `F(ρ) = −c̃ z^σ (ρ² + z²)^{−σ/2} / σ` of
    /// `ρ P(ρ, z)` in 2D, vanishing at infinity.
    pub fn radial_antiderivative(&self, rho: f64, z: f64) -> f64 {
        -self.c * z.powf(self.sigma) * (rho * rho + z * z).powf(-0.5 * self.sigma) / self.sigma
    }
}
