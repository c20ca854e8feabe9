use serde::Serialize;

use crate::cftdata::Speed;
use crate::error::Result;

/// Finite-difference step.
pub const PDE_STEP: f64 = 1e-3;

/// A residual together with the sum of magnitudes of the terms that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PdeResidual {
    pub residual: f64,
    pub scale: f64,
}

impl PdeResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual.abs()
        } else {
            self.residual.abs() / self.scale
        }
    }
}

struct Stencil {
    first: Vec<f64>,
    second: Vec<f64>,
    center: f64,
}

fn stencils<F>(f: &F, x: &[f64], h: f64) -> Result<Stencil>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let center = f(x)?;
    let mut first = Vec::with_capacity(x.len());
    let mut second = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let at = |k: f64| {
            let mut y = x.to_vec();
            y[j] += k * h;
            f(&y)
        };
        let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
        first.push((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h));
        second.push((-m2 + 16.0 * m1 - 30.0 * center + 16.0 * p1 - p2) / (12.0 * h * h));
    }
    Ok(Stencil { first, second, center })
}

/// Second-order null-state operator at each point, applied to `f`.
pub fn null_state_residuals<F>(f: F, x: &[f64], kappa: Speed) -> Result<Vec<PdeResidual>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let k = kappa.value();
    let h12 = (6.0 - k) / (2.0 * k);
    let s = stencils(&f, x, PDE_STEP)?;
    Ok((0..x.len())
        .map(|j| {
            let mut terms = vec![k / 4.0 * s.second[j]];
            let mut floor = 0.0;
            for i in (0..x.len()).filter(|&i| i != j) {
                let d = x[i] - x[j];
                terms.push(s.first[i] / d);
                terms.push(-h12 * s.center / (d * d));
                floor += s.center.abs() / (d * d);
            }
            PdeResidual { residual: terms.iter().sum(), scale: terms.iter().map(|t| t.abs()).sum::<f64>() + floor }
        })
        .collect())
}

/// Translation, dilation and special conformal residuals.
pub fn ward_residuals<F>(f: F, x: &[f64], kappa: Speed) -> Result<[PdeResidual; 3]>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let k = kappa.value();
    let h12 = (6.0 - k) / (2.0 * k);
    let s = stencils(&f, x, PDE_STEP)?;
    // Derivatives of F are measured against F over the spread of the points,
    // which keeps the scale honest where F is constant.
    let spread = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(x[x.len() - 1] - x[0]);
    let collect = |terms: Vec<f64>, length: f64| PdeResidual {
        residual: terms.iter().sum(),
        scale: terms.iter().map(|t| t.abs()).sum::<f64>() + s.center.abs() * length,
    };
    let translation = collect(s.first.clone(), 1.0 / spread);
    let dilation = collect(x.iter().zip(&s.first).flat_map(|(&xi, &d)| [xi * d, h12 * s.center]).collect(), 1.0);
    let special = collect(
        x.iter()
            .zip(&s.first)
            .flat_map(|(&xi, &d)| [xi * xi * d, 2.0 * h12 * xi * s.center])
            .collect(),
        spread,
    );
    Ok([translation, dilation, special])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_pair_solution() {
        let k = Speed::new(5.0).unwrap();
        let f = |x: &[f64]| Ok((x[1] - x[0]).powf(1.0 - 6.0 / 5.0));
        let x = [0.3, 1.7];
        for r in null_state_residuals(f, &x, k).unwrap() {
            assert!(r.relative() < 1e-8, "{r:?}");
        }
        for r in ward_residuals(f, &x, k).unwrap() {
            assert!(r.relative() < 1e-8, "{r:?}");
        }
    }
}
