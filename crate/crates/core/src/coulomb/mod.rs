//! Coulomb gas solutions: contour plans, integrand bookkeeping, numerical and
//! closed-form evaluation, and residuals of the differential system.

mod closed;
mod evaluate;
mod integrand;
mod kappa6;
mod line;
mod pde;
mod plan;
mod pochhammer;

pub use closed::{closed_form_terms, evaluate_f_closed, ClosedFormTerm, MAX_CLOSED_ORDER};
pub use evaluate::{evaluate_f, evaluate_f_index, evaluate_f_with, EvalOptions, Normalization};
pub use integrand::{build_integrand, external_factor, IntegrandSpec, Power};
pub use kappa6::{kappa6_identity, kappa6_identity_with};
pub use line::LineIntegral;
pub use pde::{null_state_residuals, ward_residuals, PdeResidual, PDE_STEP};
pub use plan::{plan_contours, Contour, ContourKind, ContourPlan};
pub use pochhammer::{pochhammer_integral, DoubleLoop};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marked boundary points `x_1 < ... < x_{2N}` and the (one-based) index of the
/// point carrying the conjugate charge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<f64>,
    conjugate: usize,
}

impl Configuration {
    pub fn new(points: Vec<f64>, conjugate: usize) -> Result<Self> {
        if points.is_empty() || !points.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "need a positive even number of points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Unordered);
        }
        if conjugate == 0 || conjugate > points.len() {
            return Err(Error::IndexOutOfRange { index: conjugate, points: points.len() });
        }
        Ok(Configuration { points, conjugate })
    }

    /// Conjugate charge on the last point.
    pub fn standard(points: Vec<f64>) -> Result<Self> {
        let c = points.len();
        Self::new(points, c)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn conjugate(&self) -> usize {
        self.conjugate
    }

    pub fn n_pairs(&self) -> usize {
        self.points.len() / 2
    }

    /// Same conjugate index with new point positions.
    pub fn with_points(&self, points: Vec<f64>) -> Result<Self> {
        Self::new(points, self.conjugate)
    }
}

/// Outcome of evaluating a solution or one of its contour integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub imag_residual: f64,
    pub evaluations: usize,
}
