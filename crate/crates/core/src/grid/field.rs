use std::sync::Arc;

use super::domain::{Cell, Domain};

/// Grid function on the Ω cells followed by the boundary layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(domain: Arc<Domain>) -> Self {
        let n = domain.field_len();
        ScalarField {
            domain,
            values: vec![0.0; n],
        }
    }

    /// Samples `f` at every field-cell center.
    pub fn from_fn<F: Fn([f64; 2]) -> f64>(domain: Arc<Domain>, f: F) -> Self {
        let values = (0..domain.field_len())
            .map(|k| f(domain.center(domain.field_cell(k))))
            .collect();
        ScalarField { domain, values }
    }

    pub fn from_values(domain: Arc<Domain>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), domain.field_len());
        ScalarField { domain, values }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Value at a field cell; `None` outside Ω ∪ layer.
    pub fn get(&self, c: Cell) -> Option<f64> {
        self.domain.field_index(c).map(|k| self.values[k])
    }

    /// Ω part only.
    pub fn omega_values(&self) -> &[f64] {
        &self.values[..self.domain.omega().len()]
    }

    /// Layer part only.
    pub fn layer_values(&self) -> &[f64] {
        &self.values[self.domain.omega().len()..]
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> ScalarField {
        ScalarField {
            domain: self.domain.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &ScalarField, f: F) -> ScalarField {
        ScalarField {
            domain: self.domain.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn positive_part(&self) -> ScalarField {
        self.map(|v| v.max(0.0))
    }

    pub fn negative_part(&self) -> ScalarField {
        self.map(|v| (-v).max(0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Boundary data selectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryData {
    /// `φ(x) = x·d`.
    Linear([f64; 2]),
    /// `φ ≡ c`.
    Constant(f64),
    /// `φ(x) = t` for `t > 0`, `a·t` otherwise, with `t = x_n`.
    TwoPhaseLinear(f64),
    /// `φ(x) = |x|^p`.
    RadialPower(f64),
}

impl BoundaryData {
    pub fn eval(&self, n: usize, x: [f64; 2]) -> f64 {
        match *self {
            BoundaryData::Linear(d) => x[0] * d[0] + x[1] * d[1],
            BoundaryData::Constant(c) => c,
            BoundaryData::TwoPhaseLinear(a) => {
                let t = x[n - 1];
                if t > 0.0 {
                    t
                } else {
                    a * t
                }
            }
            BoundaryData::RadialPower(p) => (x[0] * x[0] + x[1] * x[1]).sqrt().powf(p),
        }
    }

    /// Field sampled at all field-cell centers (only layer values matter as data).
    pub fn sample(&self, domain: Arc<Domain>) -> ScalarField {
        let n = domain.n();
        ScalarField::from_fn(domain, |x| self.eval(n, x))
    }
}
