use serde::Serialize;

use super::{external_factor, plan_contours, Configuration};
use crate::cftdata::Speed;
use crate::combinatorics::ArcDiagram;
use crate::error::{Error, Result};

/// Largest `r` accepted by [`evaluate_f_closed`].
pub const MAX_CLOSED_ORDER: u32 = 3;

/// One endpoint assignment in the residue sum at `kappa = 4/r`.
///
/// The rational integrand with the pole of each variable at its assigned
/// endpoint stripped off is expanded around the endpoints; the term is the
/// coefficient of `prod_m du_m^{r-1}` times a sign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormTerm {
    points: Vec<f64>,
    powers: Vec<i32>,
    gamma: i32,
    contours: Vec<(usize, usize)>,
    assignment: Vec<usize>,
    sign: f64,
    coefficient: f64,
}

struct Factor {
    base: f64,
    slope: Vec<(usize, f64)>,
    power: i32,
}

impl ClosedFormTerm {
    /// One-based endpoint chosen for each variable.
    pub fn assignment(&self) -> Vec<usize> {
        self.assignment.iter().map(|&e| e + 1).collect()
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn taylor_coefficient(&self) -> f64 {
        self.coefficient
    }

    /// The stripped integrand at arbitrary variable positions.
    pub fn value_at(&self, u: &[f64]) -> f64 {
        let origin: Vec<f64> = self.assignment.iter().map(|&e| self.points[e]).collect();
        self.factors()
            .iter()
            .map(|f| {
                let v = f.base + f.slope.iter().map(|&(m, s)| s * (u[m] - origin[m])).sum::<f64>();
                v.powi(f.power)
            })
            .product()
    }

    /// Oriented so the factor is positive on the real segment of a contour;
    /// enclosed points are measured from the left.
    fn factors(&self) -> Vec<Factor> {
        let mut out = Vec::new();
        for (m, (&(_, b), &e)) in self.contours.iter().zip(&self.assignment).enumerate() {
            for (l, (&x, &p)) in self.points.iter().zip(&self.powers).enumerate() {
                if l == e || p == 0 {
                    continue;
                }
                let s = if l >= b { -1.0 } else { 1.0 };
                out.push(Factor { base: s * (self.points[e] - x), slope: vec![(m, s)], power: p });
            }
        }
        for p in 0..self.contours.len() {
            for q in p + 1..self.contours.len() {
                let base = self.points[self.assignment[p]] - self.points[self.assignment[q]];
                out.push(Factor { base, slope: vec![(p, 1.0), (q, -1.0)], power: self.gamma });
            }
        }
        out
    }

    fn expand(&mut self, order: usize) {
        let vars = self.contours.len();
        let mut acc = Series::one(vars, order);
        for f in self.factors() {
            acc = acc.mul(&Series::linear_power(vars, order, f.base, &f.slope, f.power));
        }
        self.coefficient = acc.top();
    }
}

/// Truncated power series in several variables, degree at most `order` in each.
#[derive(Clone, Debug)]
struct Series {
    vars: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl Series {
    fn zero(vars: usize, order: usize) -> Self {
        Series { vars, order, coeffs: vec![0.0; (order + 1).pow(vars as u32)] }
    }

    fn one(vars: usize, order: usize) -> Self {
        let mut s = Self::zero(vars, order);
        s.coeffs[0] = 1.0;
        s
    }

    fn degrees(&self, mut idx: usize) -> Vec<usize> {
        (0..self.vars)
            .map(|_| {
                let d = idx % (self.order + 1);
                idx /= self.order + 1;
                d
            })
            .collect()
    }

    fn index(&self, deg: &[usize]) -> usize {
        deg.iter().rev().fold(0, |acc, &d| acc * (self.order + 1) + d)
    }

    fn mul(&self, other: &Series) -> Series {
        let mut out = Series::zero(self.vars, self.order);
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let da = self.degrees(i);
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let sum: Vec<usize> = da.iter().zip(other.degrees(j)).map(|(x, y)| x + y).collect();
                if sum.iter().all(|&d| d <= self.order) {
                    let k = out.index(&sum);
                    out.coeffs[k] += a * b;
                }
            }
        }
        out
    }

    /// `(base + sum_m slope_m du_m)^power` via the binomial series.
    fn linear_power(vars: usize, order: usize, base: f64, slope: &[(usize, f64)], power: i32) -> Series {
        let mut step = Series::zero(vars, order);
        for &(m, s) in slope {
            if order > 0 {
                let mut deg = vec![0; vars];
                deg[m] = 1;
                let k = step.index(&deg);
                step.coeffs[k] += s / base;
            }
        }
        let mut out = Series::one(vars, order);
        let mut term = Series::one(vars, order);
        let mut binom = 1.0;
        for k in 1..=vars * order {
            binom *= (power as f64 - (k - 1) as f64) / k as f64;
            term = term.mul(&step);
            for (o, t) in out.coeffs.iter_mut().zip(&term.coeffs) {
                *o += binom * t;
            }
        }
        let scale = base.powi(power);
        out.coeffs.iter_mut().for_each(|c| *c *= scale);
        out
    }

    fn top(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn check_order(r: u32) -> Result<()> {
    if r == 0 || r > MAX_CLOSED_ORDER {
        return Err(Error::Unsupported(format!("closed form for r = {r} (supported 1..={MAX_CLOSED_ORDER})")));
    }
    Ok(())
}

/// All terms of the residue sum for `F_theta` at `kappa = 4/r`.
pub fn closed_form_terms(diagram: &ArcDiagram, r: u32, config: &Configuration) -> Result<Vec<ClosedFormTerm>> {
    check_order(r)?;
    if diagram.n_points() != config.points().len() {
        return Err(Error::SizeMismatch { left: diagram.n_points(), right: config.points().len() });
    }
    let kappa = Speed::new(4.0 / r as f64)?;
    let plan = plan_contours(diagram, config.conjugate(), kappa)?;
    let ri = r as i32;
    let c = config.conjugate() - 1;
    let powers: Vec<i32> = (0..config.points().len()).map(|l| if l == c { 3 * ri - 2 } else { -ri }).collect();
    let contours: Vec<(usize, usize)> = plan.contours.iter().map(|k| (k.endpoints.0 - 1, k.endpoints.1 - 1)).collect();
    let vars = contours.len();
    let mut terms = Vec::with_capacity(1 << vars);
    for mask in 0..1usize << vars {
        let mut sign = 1.0;
        let assignment = contours
            .iter()
            .enumerate()
            .map(|(m, &(a, b))| {
                if mask >> m & 1 == 1 {
                    // Pole written from the right flips once for the orientation
                    // of the residue and r times for the factor itself.
                    sign *= if r.is_multiple_of(2) { -1.0 } else { 1.0 };
                    b
                } else {
                    a
                }
            })
            .collect();
        let mut t = ClosedFormTerm {
            points: config.points().to_vec(),
            powers: powers.clone(),
            gamma: 2 * ri,
            contours: contours.clone(),
            assignment,
            sign,
            coefficient: 0.0,
        };
        t.expand(r as usize - 1);
        terms.push(t);
    }
    Ok(terms)
}

/// `F_theta(4/r | x)` from the residue sum, no quadrature.
pub fn evaluate_f_closed(diagram: &ArcDiagram, r: u32, config: &Configuration) -> Result<f64> {
    let terms = closed_form_terms(diagram, r, config)?;
    let kappa = Speed::new(4.0 / r as f64)?;
    let n_pairs = config.n_pairs() as i32;
    let vars = n_pairs - 1;
    let ri = r as i32;
    // Branch phase from the powers each contour encloses.
    let mut enclosed = 0i32;
    if let Some(t) = terms.first() {
        for (m, &(a, b)) in t.contours.iter().enumerate() {
            enclosed += t.powers[a + 1..b].iter().sum::<i32>();
            let inner = t.contours.iter().enumerate().filter(|&(k, &(c, d))| k != m && a < c && d < b).count();
            enclosed += inner as i32 * t.gamma;
        }
    }
    if enclosed % 2 != 0 {
        return Err(Error::BranchStep("closed-form enclosed phase"));
    }
    let phase = if enclosed.rem_euclid(4) == 0 { 1.0 } else { -1.0 };
    let sign = if ((ri + 1) * n_pairs) % 2 == 0 { 1.0 } else { -1.0 };
    let fr = factorial(r - 1);
    let norm = 2.0 * sign * (fr * fr / factorial(2 * r - 2)).powi(vars);
    let sum: f64 = terms.iter().map(|t| t.sign * t.coefficient).sum();
    Ok(norm * external_factor(config, kappa) * phase * sum)
}
