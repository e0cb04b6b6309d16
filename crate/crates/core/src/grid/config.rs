use std::sync::Arc;

use super::domain::{norm, Domain};
use super::field::ScalarField;
use super::set::IndicatorSet;
use crate::error::{invalid, FracError, Result};

/// Energy terms of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    /// `L(E∩Ω, E^c)`.
    pub per_interior: f64,
    /// `L(E∖Ω, Ω∖E)`.
    pub per_exterior: f64,
    pub per_sigma: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(dirichlet: f64, per_interior: f64, per_exterior: f64) -> Self {
        let per_sigma = per_interior + per_exterior;
        EnergyBreakdown {
            dirichlet,
            per_interior,
            per_exterior,
            per_sigma,
            total: dirichlet + per_sigma,
        }
    }
}

/// A pair `(u, E)` with `u = u⁺ − u⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub sigma: f64,
    pub set: IndicatorSet,
    pub u_plus: ScalarField,
    pub u_minus: ScalarField,
    pub breakdown: Option<EnergyBreakdown>,
}

impl Configuration {
    pub fn domain(&self) -> &Arc<Domain> {
        self.set.domain()
    }

    pub fn u(&self) -> ScalarField {
        self.u_plus.zip_with(&self.u_minus, |a, b| a - b)
    }

    /// Whether `u ≥ 0` on `E∩Ω` and `u ≤ 0` on `E^c∩Ω`.
    pub fn sign_compatible(&self) -> bool {
        let d = self.domain();
        let u = self.u();
        d.omega().iter().enumerate().all(|(k, _)| {
            let s = self.set.omega_phase(k);
            let v = u.values()[k];
            if s > 0 {
                v >= 0.0
            } else {
                v <= 0.0
            }
        })
    }

    /// Order-independent fingerprint of the state (phases and field bits).
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut mix = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x100000001b3);
        };
        for &p in self.set.phases() {
            mix(p as u64);
        }
        for v in self.u_plus.values().iter().chain(self.u_minus.values()) {
            mix(v.to_bits());
        }
        h
    }
}

/// Rescaled pair `u_r(x) = r^{σ/2−1} u(r x)`, `E_r = E / r` on a unit-ball
/// domain with the source spacing. Values are sampled nearest-cell.
pub fn rescale(config: &Configuration, r: f64) -> Result<Configuration> {
    let src = config.domain();
    if !(r > 0.0 && r <= 1.0) {
        return Err(invalid("r", format!("scale must lie in (0, 1], got {r}")));
    }
    if r > src.radius() * (1.0 + 1e-12) {
        return Err(invalid("r", "r·B_1 is not inside the source domain"));
    }
    if 2.0 * r / src.h() < 8.0 - 1e-9 {
        return Err(FracError::UnderResolved(format!(
            "r·B_1 covers {:.2} source cells across (need 8)",
            2.0 * r / src.h()
        )));
    }
    let target = Arc::new(Domain::ball(src.n(), 1.0, src.h(), src.truncation().max(2.0))?);
    let ext = config.set.exterior().scaled(r);
    let phases: Vec<i8> = target
        .lattice_cells()
        .map(|c| {
            let x = target.center(c);
            let y = [r * x[0], r * x[1]];
            let sc = src.cell_at(y);
            if src.in_lattice(sc) {
                config.set.phase(sc)
            } else if ext.contains(x) {
                1
            } else {
                -1
            }
        })
        .collect();
    let set = IndicatorSet::from_phases(target.clone(), phases, ext)?;
    let factor = r.powf(0.5 * config.sigma - 1.0);
    let sample = |f: &ScalarField| -> Result<ScalarField> {
        let mut vals = Vec::with_capacity(target.field_len());
        for k in 0..target.field_len() {
            let x = target.center(target.field_cell(k));
            let y = [r * x[0], r * x[1]];
            let v = nearest_value(f, y).ok_or_else(|| invalid("r", "sample point outside the source field"))?;
            vals.push(factor * v);
        }
        Ok(ScalarField::from_values(target.clone(), vals))
    };
    Ok(Configuration {
        sigma: config.sigma,
        set,
        u_plus: sample(&config.u_plus)?,
        u_minus: sample(&config.u_minus)?,
        breakdown: None,
    })
}

/// Field value of the cell containing `y`, or of the nearest field cell
/// within two cells when `y` falls just outside the field.
fn nearest_value(f: &ScalarField, y: [f64; 2]) -> Option<f64> {
    let d = f.domain();
    let c = d.cell_at(y);
    if let Some(v) = f.get(c) {
        return Some(v);
    }
    let mut best: Option<(f64, f64)> = None;
    let span = if d.n() == 1 { 0 } else { 2 };
    for dy in -span..=span {
        for dx in -2..=2 {
            let q = [c[0] + dx, c[1] + dy];
            if let Some(v) = f.get(q) {
                let p = d.center(q);
                let dist = norm([p[0] - y[0], p[1] - y[1]]);
                if best.is_none_or(|b| dist < b.0) {
                    best = Some((dist, v));
                }
            }
        }
    }
    best.map(|b| b.1)
}
