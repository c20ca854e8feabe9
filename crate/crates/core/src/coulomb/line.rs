use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_singular, Outcome, QuadOptions, SingularPoint};

/// Iterated real-line integral of
/// `prod_{m,l} |u_m - x_l|^{beta_l} prod_{p<q} |u_p - u_q|^gamma`
/// with each `u_m` running between two marked points.
///
/// With phases on, every variable picks up the branch phase of the points and
/// variables its contour encloses, balanced so that a symmetric configuration
/// gives a real result. Without phases the integrand is the bare modulus.
#[derive(Clone, Debug, PartialEq)]
pub struct LineIntegral {
    points: Vec<f64>,
    betas: Vec<f64>,
    gamma: f64,
    /// Zero-based endpoint indices.
    contours: Vec<(usize, usize)>,
    phased: bool,
}

impl LineIntegral {
    /// `contours` holds one-based endpoint pairs `(a, b)` with `a < b`.
    pub fn new(points: &[f64], betas: &[f64], gamma: f64, contours: &[(usize, usize)]) -> Result<Self> {
        if points.len() != betas.len() {
            return Err(Error::SizeMismatch { left: points.len(), right: betas.len() });
        }
        if points.windows(2).any(|w| w[1] <= w[0]) || points.iter().any(|x| !x.is_finite()) {
            return Err(Error::Unordered);
        }
        let mut zero_based = Vec::with_capacity(contours.len());
        for &(a, b) in contours {
            if a == 0 || b > points.len() || a >= b {
                return Err(Error::InvalidArgument(format!("bad contour ({a}, {b})")));
            }
            zero_based.push((a - 1, b - 1));
        }
        Ok(LineIntegral { points: points.to_vec(), betas: betas.to_vec(), gamma, contours: zero_based, phased: true })
    }

    pub fn phased(mut self, on: bool) -> Self {
        self.phased = on;
        self
    }

    fn enclosed_vars(&self, m: usize) -> impl Iterator<Item = usize> + '_ {
        let (a, b) = self.contours[m];
        (0..self.contours.len()).filter(move |&k| {
            let (c, d) = self.contours[k];
            k != m && a <= c && d <= b
        })
    }

    /// Half the total power enclosed by each contour.
    fn half_enclosed(&self) -> Vec<f64> {
        (0..self.contours.len())
            .map(|m| {
                let (a, b) = self.contours[m];
                let pts: f64 = self.betas[a + 1..b].iter().sum();
                0.5 * (pts + self.enclosed_vars(m).count() as f64 * self.gamma)
            })
            .collect()
    }

    fn phase(&self, u: &[f64], half: &[f64]) -> Complex64 {
        let mut total = 0.0;
        for (m, &um) in u.iter().enumerate() {
            let (a, b) = self.contours[m];
            let mut above = -half[m];
            for l in a + 1..b {
                if self.points[l] > um {
                    above += self.betas[l];
                }
            }
            for k in self.enclosed_vars(m) {
                if u[k] > um {
                    above += self.gamma;
                }
            }
            total += above;
        }
        Complex64::from_polar(1.0, PI * total)
    }

    pub fn evaluate(&self, opts: &QuadOptions) -> Result<Outcome<Complex64>> {
        if self.contours.is_empty() {
            return Ok(Outcome { value: Complex64::new(1.0, 0.0), error: 0.0, evaluations: 0 });
        }
        let half = self.half_enclosed();
        let failure = RefCell::new(None);
        let evals = Cell::new(0usize);
        let out = self.level(&[], &half, opts, &failure, &evals)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(Outcome { evaluations: evals.get() + out.evaluations, ..out })
    }

    fn level(
        &self,
        fixed: &[f64],
        half: &[f64],
        opts: &QuadOptions,
        failure: &RefCell<Option<Error>>,
        evals: &Cell<usize>,
    ) -> Result<Outcome<Complex64>> {
        let d = fixed.len();
        let (a, b) = self.contours[d];
        let mut sing: Vec<SingularPoint> =
            self.points.iter().zip(&self.betas).map(|(&x, &p)| SingularPoint::new(x, p)).collect();
        sing.extend(fixed.iter().map(|&u| SingularPoint::new(u, self.gamma)));
        let last = d + 1 == self.contours.len();
        let f = |t: f64| -> Complex64 {
            let mut u = fixed.to_vec();
            u.push(t);
            if last {
                return if self.phased { self.phase(&u, half) } else { Complex64::new(1.0, 0.0) };
            }
            if failure.borrow().is_some() {
                return Complex64::new(0.0, 0.0);
            }
            match self.level(&u, half, opts, failure, evals) {
                Ok(o) => {
                    evals.set(evals.get() + o.evaluations);
                    o.value
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        integrate_singular(f, self.points[a], self.points[b], &sing, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn beta_identity() {
        let b = -2.0 / 3.0;
        let li = LineIntegral::new(&[0.0, 1.0], &[b, b], 0.0, &[(1, 2)]).unwrap();
        let v = li.evaluate(&QuadOptions::default()).unwrap().value;
        let expect = gamma(1.0 / 3.0).powi(2) / gamma(2.0 / 3.0);
        assert!((v.re - expect).abs() < 1e-10 * expect);
        assert_eq!(v.im, 0.0);
    }
}
