//! Quadrature building blocks.
//!
//! * Gauss–Jacobi rules on `[0, 1]` with weight `t^a (1-t)^b`, built by the
//!   Golub–Welsch eigenvalue method and cached.
//! * A composite adaptive integrator for `f(u) * prod |u - y_k|^{p_k}` on a real
//!   interval, which folds endpoint singularities into the Jacobi weight.
//! * Composite Gauss–Legendre on a parameter interval for smooth complex integrands.
//! * Generalized Richardson extrapolation with a known list of exponents.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Nodes and weights on `[0, 1]`.
#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

type RuleKey = (u64, u64, usize);

fn rule_cache() -> &'static RwLock<HashMap<RuleKey, Arc<Rule>>> {
    static CACHE: OnceLock<RwLock<HashMap<RuleKey, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Gauss–Jacobi rule with `n` nodes for the weight `t^a (1-t)^b` on `[0, 1]`.
pub fn gauss_jacobi(a: f64, b: f64, n: usize) -> Result<Arc<Rule>> {
    if !(a > -1.0 && b > -1.0) || n == 0 {
        return Err(Error::Quadrature(format!("invalid Jacobi parameters a={a}, b={b}, n={n}")));
    }
    let key = (a.to_bits(), b.to_bits(), n);
    if let Some(r) = rule_cache().read().expect("rule cache poisoned").get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(golub_welsch(a, b, n)?);
    rule_cache().write().expect("rule cache poisoned").insert(key, rule.clone());
    Ok(rule)
}

/// Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    gauss_jacobi(0.0, 0.0, n).expect("Legendre parameters are valid")
}

fn golub_welsch(a: f64, b: f64, n: usize) -> Result<Rule> {
    // Jacobi polynomials for (1-x)^al (1+x)^be on [-1, 1]; t = (1+x)/2 puts t^a on (1+x).
    let (al, be) = (b, a);
    let s = al + be;
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (be - al) / (s + 2.0)
        } else {
            (be * be - al * al) / ((2.0 * kf + s) * (2.0 * kf + s + 2.0))
        };
        j[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let off2 = if k == 0 {
                4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + s).powi(2) * (3.0 + s))
            } else {
                4.0 * m * (m + al) * (m + be) * (m + s)
                    / ((2.0 * m + s).powi(2) * (2.0 * m + s + 1.0) * (2.0 * m + s - 1.0))
            };
            let off = off2.sqrt();
            j[(k, k + 1)] = off;
            j[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(j);
    // total mass of the weight on [0, 1]: B(a+1, b+1)
    let log_mu = ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0);
    let mu = log_mu.exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let x = eig.eigenvalues[k];
            let v0 = eig.eigenvectors[(0, k)];
            (0.5 * (x + 1.0), mu * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    if pairs.iter().any(|(t, w)| !t.is_finite() || !w.is_finite()) {
        return Err(Error::Quadrature("Golub-Welsch produced non-finite nodes".into()));
    }
    Ok(Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() })
}

/// A branch point `|u - pos|^power` of a real-line integrand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub pos: f64,
    pub power: f64,
}

impl SingularPoint {
    pub fn new(pos: f64, power: f64) -> Self {
        SingularPoint { pos, power }
    }
}

/// Controls for the adaptive integrators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub nodes: usize,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-12, nodes: 20, max_depth: 60 }
    }
}

/// Value, error estimate and evaluation count of an adaptive run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

/// Integrate `f(u) * prod_k |u - y_k|^{p_k}` over `[a, b]`.
///
/// Every singular point inside `(a, b)` splits the interval; powers located at a
/// panel endpoint enter the Jacobi weight, all others are multiplied in. Panels
/// are bisected while another singular point is closer than the panel length,
/// then refined until a panel and its two halves agree.
pub fn integrate_singular<F>(f: F, a: f64, b: f64, sing: &[SingularPoint], opts: &QuadOptions) -> Result<Outcome<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Quadrature(format!("bad interval [{a}, {b}]")));
    }
    if b == a {
        return Ok(Outcome { value: Complex64::new(0.0, 0.0), error: 0.0, evaluations: 0 });
    }
    let mut cuts: Vec<f64> = sing.iter().map(|s| s.pos).filter(|&y| y > a && y < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut pts = Vec::with_capacity(cuts.len() + 2);
    pts.push(a);
    pts.extend(cuts);
    pts.push(b);

    let mut ctx = Ctx { f: &f, sing, opts, evals: 0, scale: 0.0, total: b - a };
    // Coarse pass fixes the absolute scale used to stop refinement on tiny panels.
    let mut coarse = Complex64::new(0.0, 0.0);
    for w in pts.windows(2) {
        coarse += ctx.panel(w[0], w[1])?;
    }
    ctx.scale = coarse.norm();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for w in pts.windows(2) {
        let (v, e) = ctx.refine(w[0], w[1], 0)?;
        value += v;
        error += e;
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Quadrature("non-finite integral".into()));
    }
    Ok(Outcome { value, error, evaluations: ctx.evals })
}

struct Ctx<'a, F> {
    f: &'a F,
    sing: &'a [SingularPoint],
    opts: &'a QuadOptions,
    evals: usize,
    scale: f64,
    total: f64,
}

impl<F: Fn(f64) -> Complex64> Ctx<'_, F> {
    fn panel(&mut self, l: f64, r: f64) -> Result<Complex64> {
        let h = r - l;
        if h <= 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut pl = 0.0;
        let mut pr = 0.0;
        for s in self.sing {
            if s.pos == l {
                pl += s.power;
            } else if s.pos == r {
                pr += s.power;
            }
        }
        let rule = gauss_jacobi(pl, pr, self.opts.nodes)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let u = l + h * t;
            let mut g = 1.0;
            for s in self.sing {
                if s.pos != l && s.pos != r && s.power != 0.0 {
                    g *= (u - s.pos).abs().powf(s.power);
                }
            }
            acc += (self.f)(u) * (w * g);
        }
        self.evals += rule.nodes.len();
        Ok(acc * h.powf(pl + pr + 1.0))
    }

    fn nearest_outside(&self, l: f64, r: f64) -> f64 {
        self.sing
            .iter()
            .filter(|s| s.pos != l && s.pos != r && s.power != 0.0)
            .map(|s| if s.pos < l { l - s.pos } else if s.pos > r { s.pos - r } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    }

    fn refine(&mut self, l: f64, r: f64, depth: u32) -> Result<(Complex64, f64)> {
        let m = 0.5 * (l + r);
        let deep_enough = depth >= self.opts.max_depth || !(m > l && m < r);
        if !deep_enough && self.nearest_outside(l, r) < r - l {
            let (a, ea) = self.refine(l, m, depth + 1)?;
            let (b, eb) = self.refine(m, r, depth + 1)?;
            return Ok((a + b, ea + eb));
        }
        let whole = self.panel(l, r)?;
        if deep_enough {
            return Ok((whole, 0.0));
        }
        let halves = self.panel(l, m)? + self.panel(m, r)?;
        let diff = (halves - whole).norm();
        let floor = self.scale * (r - l) / self.total;
        if diff <= self.opts.rel_tol * halves.norm().max(floor) {
            return Ok((halves, diff));
        }
        if depth + 1 >= self.opts.max_depth {
            return Err(Error::Quadrature(format!("no convergence on [{l}, {r}] (diff {diff:e})")));
        }
        let (a, ea) = self.refine(l, m, depth + 1)?;
        let (b, eb) = self.refine(m, r, depth + 1)?;
        Ok((a + b, ea + eb))
    }
}

/// Integrate a smooth complex function of a real parameter over `[a, b]` by
/// composite Gauss–Legendre with adaptive halving.
pub fn integrate_smooth<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Outcome<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    let rule = gauss_legendre(opts.nodes);
    let mut evals = 0usize;
    let panel = |l: f64, r: f64, evals: &mut usize| -> Complex64 {
        let h = r - l;
        *evals += rule.nodes.len();
        rule.nodes.iter().zip(&rule.weights).map(|(&t, &w)| f(l + h * t) * w).sum::<Complex64>() * h
    };
    let scale = panel(a, b, &mut evals).norm();
    let mut stack = vec![(a, b, 0u32)];
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    while let Some((l, r, d)) = stack.pop() {
        let m = 0.5 * (l + r);
        let whole = panel(l, r, &mut evals);
        let halves = panel(l, m, &mut evals) + panel(m, r, &mut evals);
        let diff = (halves - whole).norm();
        let floor = scale * (r - l) / (b - a);
        if diff <= opts.rel_tol * halves.norm().max(floor) || d >= opts.max_depth {
            value += halves;
            error += diff;
        } else {
            stack.push((l, m, d + 1));
            stack.push((m, r, d + 1));
        }
    }
    Ok(Outcome { value, error, evaluations: evals })
}

/// Extrapolate `T(eps_k)`, `eps_k = eps_0 * ratio^k`, to `eps -> 0` assuming
/// `T(eps) = T0 + sum_j c_j eps^{e_j}` with the given exponents.
///
/// Returns the extrapolant and an error estimate (difference between the two
/// best estimates of the final and previous elimination levels).
pub fn richardson(values: &[f64], ratio: f64, exponents: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Extrapolation("no samples".into()));
    }
    let levels = exponents.len().min(values.len() - 1);
    let mut row = values.to_vec();
    let mut prev_best = *row.last().unwrap();
    let mut best = prev_best;
    for &e in exponents.iter().take(levels) {
        let q = ratio.powf(e);
        if (1.0 - q).abs() < 1e-12 {
            return Err(Error::Extrapolation(format!("degenerate exponent {e}")));
        }
        let next: Vec<f64> = row.windows(2).map(|w| (w[1] - q * w[0]) / (1.0 - q)).collect();
        prev_best = best;
        best = *next.last().unwrap();
        row = next;
    }
    if !best.is_finite() {
        return Err(Error::Extrapolation("non-finite extrapolant".into()));
    }
    Ok((best, (best - prev_best).abs()))
}

/// Value at zero of the interpolating polynomial through `(h_k, v_k)` (Neville).
pub fn polynomial_at_zero(h: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    if h.len() != v.len() || h.is_empty() {
        return Err(Error::Extrapolation("mismatched samples".into()));
    }
    let n = h.len();
    let mut p = v.to_vec();
    let mut prev = p[n - 1];
    for level in 1..n {
        for i in 0..n - level {
            let (hi, hj) = (h[i], h[i + level]);
            p[i] = (hj * p[i] - hi * p[i + 1]) / (hj - hi);
        }
        if level == n - 2 {
            prev = p[0];
        }
    }
    Ok((p[0], (p[0] - prev).abs()))
}

/// Exponents `{1, 2, ...}` merged with `{g, g + 1, ...}`, sorted, duplicates removed.
pub fn merged_exponents(gap: f64, count: usize) -> Vec<f64> {
    let mut e: Vec<f64> = Vec::new();
    for k in 0..count + 1 {
        e.push((k + 1) as f64);
        e.push(gap + k as f64);
    }
    e.retain(|&x| x > 1e-12);
    e.sort_by(f64::total_cmp);
    e.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    e.truncate(count);
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::beta::beta;

    #[test]
    fn jacobi_rule_integrates_polynomials() {
        let r = gauss_jacobi(-0.5, 0.3, 8).unwrap();
        // int t^{-1/2} (1-t)^{0.3} t^3 dt = B(3.5, 1.3)
        let q: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * t.powi(3)).sum();
        assert_relative_eq!(q, beta(3.5, 1.3), max_relative = 1e-13);
    }

    #[test]
    fn legendre_exact_on_polynomials() {
        let r = gauss_legendre(5);
        let q: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * t.powi(9)).sum();
        assert_relative_eq!(q, 0.1, max_relative = 1e-14);
    }

    #[test]
    fn singular_integral_with_interior_point() {
        // int_0^2 |u|^{-1/2} |u-1|^{-1/2} |u-2|^{-1/2} du, symmetric halves
        let s = [SingularPoint::new(0.0, -0.5), SingularPoint::new(1.0, -0.5), SingularPoint::new(2.0, -0.5)];
        let out = integrate_singular(|_| Complex64::new(1.0, 0.0), 0.0, 2.0, &s, &QuadOptions::default()).unwrap();
        let half = integrate_singular(|_| Complex64::new(1.0, 0.0), 0.0, 1.0, &s, &QuadOptions::default()).unwrap();
        assert_relative_eq!(out.value.re, 2.0 * half.value.re, max_relative = 1e-12);
        // int_0^1 u^{-1/2}(1-u)^{-1/2}(2-u)^{-1/2} du = sqrt(2) K(m = 1/2)
        let k_half = 1.854_074_677_301_372;
        assert_relative_eq!(half.value.re, 2f64.sqrt() * k_half, max_relative = 1e-11);
    }

    #[test]
    fn near_singularity_outside_panel() {
        let eps = 1e-7;
        let s = [SingularPoint::new(-eps, -0.5)];
        let out = integrate_singular(|_| Complex64::new(1.0, 0.0), 0.0, 1.0, &s, &QuadOptions::default()).unwrap();
        let exact = 2.0 * ((1.0 + eps).sqrt() - eps.sqrt());
        assert_relative_eq!(out.value.re, exact, max_relative = 1e-12);
    }

    #[test]
    fn richardson_removes_known_powers() {
        let f = |e: f64| 3.0 + 2.0 * e.powf(0.6) - e + 0.5 * e.powf(1.6);
        let v: Vec<f64> = (0..5).map(|k| f(0.1 * 0.5f64.powi(k))).collect();
        let (x, _) = richardson(&v, 0.5, &[0.6, 1.0, 1.6]).unwrap();
        assert_relative_eq!(x, 3.0, max_relative = 1e-13);
        assert_eq!(merged_exponents(0.6, 5), vec![0.6, 1.0, 1.6, 2.0, 2.6]);
    }

    #[test]
    fn neville_recovers_quadratic() {
        let h = [0.1, -0.1, 0.2, -0.2];
        let v: Vec<f64> = h.iter().map(|x| 1.5 + x - 2.0 * x * x).collect();
        let (x, _) = polynomial_at_zero(&h, &v).unwrap();
        assert_relative_eq!(x, 1.5, max_relative = 1e-13);
    }
}
