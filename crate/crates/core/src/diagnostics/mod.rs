//! Read-only checks on computed configurations: Weiss and
//! Alt–Caffarelli–Friedman monotonicity, density and growth rates,
//! Euler–Lagrange residuals, blow-ups and flatness.

mod growth;
mod monotonicity;
mod residual;

use std::fmt::Write as _;
use std::sync::Arc;

pub use growth::{
    blowup_sequence, check_origin_on_boundary, density_report, dyadic_radii, flatness, flatness_fan, holder_fit,
    lambda_product, power_fit, BlowupStep, LambdaReport, PowerFit,
};
pub use monotonicity::{acf_psi, shell_integral, weiss_phi};
pub use residual::{el_residual, ResidualCell, ResidualReport};

use crate::error::{invalid, FracError, Result};
use crate::extension::{poisson_extension, ExtensionMesh};
use crate::grid::{Configuration, Exterior, IndicatorSet, ScalarField};
use crate::kernel::CurvatureEvaluator;

pub const REPORT_HEADER: &str = "r,phi,psi,density_min,lambda_prod,flat_width";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportParams {
    /// Sample radii; sorted ascending in the report.
    pub radii: Vec<f64>,
    /// Calibrated extension constant; without it `Φ` is not computed.
    pub c_hat: Option<f64>,
    /// Extension mesh refinement per lattice cell.
    pub sub: usize,
    /// Directions tried by the flatness search.
    pub fan: usize,
}

impl ReportParams {
    /// Dyadic radii in `[8h, 1/2]`, no `Φ`.
    pub fn dyadic(h: f64) -> ReportParams {
        ReportParams {
            radii: dyadic_radii(8.0 * h, 0.5),
            c_hat: None,
            sub: 2,
            fan: 36,
        }
    }
}

/// Every per-radius array is indexed like `radii`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub radii: Vec<f64>,
    /// Weiss energy; NaN when no constant was supplied.
    pub phi: Vec<f64>,
    /// `Φ` of the trivial cone (`u ≡ 0`, half-space), averaged over radii.
    pub phi_trivial: Option<f64>,
    pub psi: Vec<f64>,
    pub density: Vec<f64>,
    pub lambda: LambdaReport,
    /// Growth of `sup |u|`; `None` when `u` vanishes near the origin.
    pub holder: Option<PowerFit>,
    pub flat_width: Vec<f64>,
    pub flat_direction: Vec<[f64; 2]>,
    /// `blowup[k]` compares the rescalings at `radii[k]` and `radii[k+1]`.
    pub blowup: Vec<BlowupStep>,
    pub residuals: ResidualReport,
}

impl DiagnosticsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for (k, r) in self.radii.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r, self.phi[k], self.psi[k], self.density[k], self.lambda.product[k], self.flat_width[k]
            );
        }
        out
    }
}

fn trivial_cone(config: &Configuration) -> Configuration {
    let d = config.domain().clone();
    let normal = if d.n() == 1 { [1.0, 0.0] } else { [0.0, 1.0] };
    let set = IndicatorSet::from_exterior(d.clone(), Exterior::half_space(normal, 0.0));
    Configuration {
        sigma: config.sigma,
        set,
        u_plus: ScalarField::zeros(d.clone()),
        u_minus: ScalarField::zeros(d),
        breakdown: None,
    }
}

/// Runs every diagnostic at the given radii. Requires `0 ∈ ∂E`.
pub fn diagnostics_report(config: &Configuration, params: &ReportParams) -> Result<DiagnosticsReport> {
    check_origin_on_boundary(&config.set)?;
    let mut radii = params.radii.clone();
    if radii.is_empty() {
        return Err(invalid("radii", "at least one radius"));
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let d = config.domain();
    let sigma = config.sigma;

    let (phi, phi_trivial) = match params.c_hat {
        Some(c) => {
            let mesh = Arc::new(ExtensionMesh::new(d.clone(), sigma, params.sub)?);
            let weiss = |cfg: &Configuration| -> Result<Vec<f64>> {
                let ext = poisson_extension(&cfg.set, &mesh)?;
                radii.iter().map(|&r| weiss_phi(cfg, &ext, r, c)).collect()
            };
            let phi = weiss(config)?;
            let cone = weiss(&trivial_cone(config))?;
            (phi, Some(cone.iter().sum::<f64>() / cone.len() as f64))
        }
        None => (vec![f64::NAN; radii.len()], None),
    };
    let psi = radii
        .iter()
        .map(|&r| acf_psi(&config.u_plus, &config.u_minus, r))
        .collect::<Result<Vec<_>>>()?;
    let density = density_report(&config.set, &radii)?;
    let lambda = lambda_product(&config.u_plus, &config.u_minus, &radii, sigma)?;
    let holder = match holder_fit(&config.u(), &radii) {
        Ok(f) => Some(f),
        Err(FracError::DegenerateFit(_)) => None,
        Err(e) => return Err(e),
    };
    let mut flat_width = Vec::with_capacity(radii.len());
    let mut flat_direction = Vec::with_capacity(radii.len());
    for &r in &radii {
        let (e, w) = flatness_fan(&config.set, r, params.fan)?;
        flat_direction.push(e);
        flat_width.push(w);
    }
    let descending: Vec<f64> = radii.iter().rev().copied().filter(|&r| r <= 1.0).collect();
    let mut blowup = blowup_sequence(config, &descending)?;
    blowup.reverse();
    let evaluator = CurvatureEvaluator::new(d, sigma)?;
    let residuals = el_residual(config, &evaluator)?;
    Ok(DiagnosticsReport {
        radii,
        phi,
        phi_trivial,
        psi,
        density,
        lambda,
        holder,
        flat_width,
        flat_direction,
        blowup,
        residuals,
    })
}
