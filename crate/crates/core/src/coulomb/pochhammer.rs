use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_singular, integrate_smooth, Outcome, QuadOptions, SingularPoint};

/// A Pochhammer double loop around two adjacent marked points.
///
/// Differences are ordered so the integrand is positive on the segment between
/// the endpoints: `u - x_l` for points at or left of `a`, `x_l - u` at or right
/// of `b`. The two endpoint factors carry their winding numbers along the path;
/// all other factors stay on the principal branch, which the loop radius keeps
/// well away from their cuts.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleLoop {
    points: Vec<f64>,
    betas: Vec<f64>,
    a: usize,
    b: usize,
    radius: f64,
}

#[derive(Clone, Copy)]
enum Center {
    Left,
    Right,
}

impl DoubleLoop {
    /// Endpoints are one-based and must be adjacent. `radius_fraction` scales
    /// the loop radius against the smallest gap between marked points.
    pub fn new(points: &[f64], betas: &[f64], a: usize, b: usize, radius_fraction: f64) -> Result<Self> {
        if points.len() != betas.len() {
            return Err(Error::SizeMismatch { left: points.len(), right: betas.len() });
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Unordered);
        }
        if a == 0 || b > points.len() || a >= b {
            return Err(Error::InvalidArgument(format!("bad contour ({a}, {b})")));
        }
        if b != a + 1 {
            return Err(Error::Unsupported("double loop enclosing other marked points".into()));
        }
        if !(radius_fraction > 0.0 && radius_fraction < 0.5) {
            return Err(Error::InvalidArgument(format!("loop radius fraction {radius_fraction}")));
        }
        let gap = points.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        Ok(DoubleLoop { points: points.to_vec(), betas: betas.to_vec(), a: a - 1, b: b - 1, radius: radius_fraction * gap })
    }

    /// Product of the spectator factors at a complex point, principal branch.
    fn spectators(&self, u: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        for (l, (&x, &p)) in self.points.iter().zip(&self.betas).enumerate() {
            if l == self.a || l == self.b || p == 0.0 {
                continue;
            }
            let d = if l < self.a { u - x } else { Complex64::new(x, 0.0) - u };
            if d.arg().abs() >= PI / 2.0 {
                return Err(Error::BranchStep("double loop spectator factor"));
            }
            acc *= d.powf(p);
        }
        Ok(acc)
    }

    /// One full circle around an endpoint. `turn` is `+1` counterclockwise and
    /// `-1` clockwise; `start` is the winding of the circled factor at entry and
    /// `other` the fixed winding of the opposite endpoint factor.
    fn circle(&self, center: Center, turn: f64, start: i32, other: i32, opts: &QuadOptions) -> Result<Outcome<Complex64>> {
        let (xa, xb) = (self.points[self.a], self.points[self.b]);
        let (ba, bb) = (self.betas[self.a], self.betas[self.b]);
        let r = self.radius;
        let failure = std::cell::RefCell::new(None);
        let f = |t: f64| -> Complex64 {
            let theta = turn * t;
            let e = Complex64::from_polar(1.0, theta);
            let (u, du, own, far) = match center {
                Center::Left => {
                    let u = xa + r * e;
                    let own = (ba * (r.ln())).exp() * Complex64::from_polar(1.0, ba * (theta + 2.0 * PI * start as f64));
                    let d = Complex64::new(xb, 0.0) - u;
                    let far = d.powf(bb) * Complex64::from_polar(1.0, 2.0 * PI * bb * other as f64);
                    (u, Complex64::i() * r * e, own, far)
                }
                Center::Right => {
                    let u = xb - r * e;
                    let own = (bb * (r.ln())).exp() * Complex64::from_polar(1.0, bb * (theta + 2.0 * PI * start as f64));
                    let d = u - xa;
                    let far = d.powf(ba) * Complex64::from_polar(1.0, 2.0 * PI * ba * other as f64);
                    (u, -Complex64::i() * r * e, own, far)
                }
            };
            match self.spectators(u) {
                Ok(s) => own * far * s * du * turn,
                Err(err) => {
                    failure.borrow_mut().get_or_insert(err);
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        let out = integrate_smooth(f, 0.0, 2.0 * PI, opts)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(out)
    }

    /// The loop integral of the ordered integrand.
    pub fn integrate(&self, opts: &QuadOptions) -> Result<Outcome<Complex64>> {
        let (xa, xb) = (self.points[self.a], self.points[self.b]);
        let (ba, bb) = (self.betas[self.a], self.betas[self.b]);
        let sing: Vec<SingularPoint> =
            self.points.iter().zip(&self.betas).map(|(&x, &p)| SingularPoint::new(x, p)).collect();
        let seg = integrate_singular(|_| Complex64::new(1.0, 0.0), xa + self.radius, xb - self.radius, &sing, opts)?;
        let wind = |p: f64, w: f64| Complex64::from_polar(1.0, 2.0 * PI * p * w);
        // The four traversals of the segment collapse to one factor.
        let seg_factor = (Complex64::new(1.0, 0.0) - wind(ba, 1.0)) * (Complex64::new(1.0, 0.0) - wind(bb, -1.0));
        let circles = [
            self.circle(Center::Right, -1.0, 0, 0, opts)?,
            self.circle(Center::Left, 1.0, 0, -1, opts)?,
            self.circle(Center::Right, 1.0, -1, 1, opts)?,
            self.circle(Center::Left, -1.0, 1, 0, opts)?,
        ];
        let mut value = seg.value * seg_factor;
        let mut error = seg.error * seg_factor.norm();
        let mut evaluations = seg.evaluations;
        for c in circles {
            value += c.value;
            error += c.error;
            evaluations += c.evaluations;
        }
        Ok(Outcome { value, error, evaluations })
    }
}

/// Double-loop integral with phase removed so that it equals
/// `4 sin(pi beta_a) sin(pi beta_b)` times the continued line integral.
pub fn pochhammer_integral(points: &[f64], betas: &[f64], a: usize, b: usize, radius_fraction: f64, opts: &QuadOptions) -> Result<Outcome<Complex64>> {
    let dl = DoubleLoop::new(points, betas, a, b, radius_fraction)?;
    let out = dl.integrate(opts)?;
    let turn = Complex64::from_polar(1.0, -PI * (betas[a - 1] - betas[b - 1]));
    Ok(Outcome { value: out.value * turn, ..out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coulomb::LineIntegral;

    #[test]
    fn trivial_integrand_vanishes() {
        let out = pochhammer_integral(&[0.0, 1.0, 3.0], &[0.0; 3], 1, 2, 0.1, &QuadOptions::default()).unwrap();
        assert!(out.value.norm() < 1e-13);
    }

    #[test]
    fn matches_line_form_and_is_radius_free() {
        let x = [0.0, 0.4, 1.0, 2.5];
        let b = -2.0 / 3.0;
        let betas = [b, b, b, 0.0];
        let opts = QuadOptions::default();
        let line = LineIntegral::new(&x, &betas, 4.0 / 3.0, &[(2, 3)]).unwrap().evaluate(&opts).unwrap().value.re;
        let s = (PI * b).sin();
        for frac in [0.05, 0.1, 0.2] {
            let p = pochhammer_integral(&x, &betas, 2, 3, frac, &opts).unwrap().value;
            assert!((p.re - 4.0 * s * s * line).abs() < 1e-10 * line.abs(), "{p} vs {}", 4.0 * s * s * line);
            assert!(p.im.abs() < 1e-10);
        }
    }
}
