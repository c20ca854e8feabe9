use serde::{Deserialize, Serialize};

use super::closed::{evaluate_f_closed, MAX_CLOSED_ORDER};
use super::{build_integrand, external_factor, plan_contours, pochhammer_integral, Configuration, LineIntegral, QuadratureResult};
use crate::cftdata::{basis_prefactor, fugacity, line_prefactor, reduced_prefactor, Speed};
use crate::combinatorics::{enumerate_diagrams, ArcDiagram};
use crate::error::{Error, Result};
use crate::quadrature::QuadOptions;

/// Which overall constant multiplies the integral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// The basis element proper.
    #[default]
    Basis,
    /// The basis element divided by the fugacity, finite and nonzero where the
    /// fugacity vanishes.
    Reduced,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub rel_tol: f64,
    pub imag_tol: f64,
    pub nodes: usize,
    /// Double-loop radius as a fraction of the smallest gap.
    pub loop_radius: f64,
    pub normalization: Normalization,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { rel_tol: 1e-10, imag_tol: 1e-6, nodes: 20, loop_radius: 0.1, normalization: Normalization::Basis }
    }
}

impl EvalOptions {
    pub fn quad(&self) -> QuadOptions {
        QuadOptions { rel_tol: self.rel_tol, nodes: self.nodes, ..QuadOptions::default() }
    }

    pub fn reduced(self) -> Self {
        EvalOptions { normalization: Normalization::Reduced, ..self }
    }
}

pub fn evaluate_f(diagram: &ArcDiagram, kappa: Speed, config: &Configuration) -> Result<QuadratureResult> {
    evaluate_f_with(diagram, kappa, config, &EvalOptions::default())
}

/// `theta` is the one-based position in the canonical diagram order.
pub fn evaluate_f_index(theta: usize, kappa: Speed, config: &Configuration, opts: &EvalOptions) -> Result<QuadratureResult> {
    let diagrams = enumerate_diagrams(config.n_pairs());
    let d = theta
        .checked_sub(1)
        .and_then(|i| diagrams.get(i))
        .ok_or(Error::IndexOutOfRange { index: theta, points: diagrams.len() })?;
    evaluate_f_with(d, kappa, config, opts)
}

fn exact(value: f64) -> QuadratureResult {
    QuadratureResult { value, abs_error_estimate: 0.0, imag_residual: 0.0, evaluations: 0 }
}

pub fn evaluate_f_with(diagram: &ArcDiagram, kappa: Speed, config: &Configuration, opts: &EvalOptions) -> Result<QuadratureResult> {
    if diagram.n_points() != config.points().len() {
        return Err(Error::SizeMismatch { left: diagram.n_points(), right: config.points().len() });
    }
    let spec = build_integrand(config, kappa)?;
    let n = fugacity(kappa);
    let n_pairs = config.n_pairs();
    let outer = match opts.normalization {
        Normalization::Basis => 1.0,
        Normalization::Reduced => 1.0 / n,
    };
    if let Some(r) = kappa.four_over() {
        if r > MAX_CLOSED_ORDER {
            return Err(Error::Unsupported(format!("kappa = 4/{r} beyond the closed-form orders")));
        }
        return Ok(exact(outer * evaluate_f_closed(diagram, r, config)?));
    }
    if n_pairs == 1 {
        let x = config.points();
        let v = (x[1] - x[0]).powf(1.0 - 6.0 / kappa.value());
        return Ok(exact(match opts.normalization {
            Normalization::Basis => n * v,
            Normalization::Reduced => v,
        }));
    }
    let plan = plan_contours(diagram, config.conjugate(), kappa)?;
    let ext = external_factor(config, kappa);
    let betas = spec.beta_values();
    let points = config.points();
    let (pref, out) = if kappa.value() > 4.0 {
        let pref = match opts.normalization {
            Normalization::Basis => line_prefactor(kappa, n_pairs)?,
            Normalization::Reduced => reduced_prefactor(kappa, n_pairs, n_pairs - 1)?,
        };
        let ends: Vec<(usize, usize)> = plan.contours.iter().map(|c| c.endpoints).collect();
        let li = LineIntegral::new(points, &betas, spec.gamma_value(), &ends)?;
        (pref, li.evaluate(&opts.quad())?)
    } else {
        let (a, b) = plan.contours[0].endpoints;
        if n_pairs > 2 || b != a + 1 {
            return Err(Error::Unsupported(format!(
                "numeric double loops at kappa = {} need N = 2 and an adjacent contour",
                kappa.value()
            )));
        }
        let pref = match opts.normalization {
            Normalization::Basis => basis_prefactor(kappa, n_pairs, 0)?,
            Normalization::Reduced => reduced_prefactor(kappa, n_pairs, 0)?,
        };
        (pref, pochhammer_integral(points, &betas, a, b, opts.loop_radius, &opts.quad())?)
    };
    let scale = pref * ext;
    let value = scale * out.value.re;
    let imag = scale * out.value.im;
    if imag.abs() > opts.imag_tol * value.abs().max(1.0) {
        return Err(Error::ImagResidual { value, residual: imag });
    }
    Ok(QuadratureResult {
        value,
        abs_error_estimate: scale.abs() * out.error,
        imag_residual: imag,
        evaluations: out.evaluations,
    })
}
