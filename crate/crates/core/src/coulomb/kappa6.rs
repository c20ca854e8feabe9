use statrs::function::gamma::gamma;

use super::LineIntegral;
use crate::error::{Error, Result};
use crate::quadrature::QuadOptions;

/// Both sides of the percolation integral identity on `2N - 1` points, with
/// contours on consecutive pairs `(1,2), (3,4), ...`.
pub fn kappa6_identity(n_pairs: usize, points: &[f64]) -> Result<(f64, f64)> {
    let contours: Vec<(usize, usize)> = (0..n_pairs.saturating_sub(1)).map(|m| (2 * m + 1, 2 * m + 2)).collect();
    kappa6_identity_with(n_pairs, points, &contours, &QuadOptions::default())
}

/// As [`kappa6_identity`] with explicit one-based contour endpoints.
pub fn kappa6_identity_with(n_pairs: usize, points: &[f64], contours: &[(usize, usize)], opts: &QuadOptions) -> Result<(f64, f64)> {
    if n_pairs < 2 {
        return Err(Error::InvalidArgument("identity needs N >= 2".into()));
    }
    if points.len() != 2 * n_pairs - 1 {
        return Err(Error::SizeMismatch { left: points.len(), right: 2 * n_pairs - 1 });
    }
    if contours.len() != n_pairs - 1 {
        return Err(Error::SizeMismatch { left: contours.len(), right: n_pairs - 1 });
    }
    let betas = vec![-2.0 / 3.0; points.len()];
    let out = LineIntegral::new(points, &betas, 4.0 / 3.0, contours)?.evaluate(opts)?;
    let m = (n_pairs - 1) as i32;
    let mut rhs = gamma(1.0 / 3.0).powi(2 * m) / gamma(2.0 / 3.0).powi(m);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            rhs *= (points[j] - points[i]).powf(-1.0 / 3.0);
        }
    }
    Ok((out.value.re, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_pairs() {
        let (l, r) = kappa6_identity(2, &[0.0, 1.0, 2.0]).unwrap();
        assert!((l / r - 1.0).abs() < 1e-9);
    }
}
