//! Collapse limits, the limit functionals and the map `v`, Frobenius fits of
//! the two-channel expansion, and leading-order predictions for contour
//! integrals whose endpoints merge.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::cftdata::Speed;
use crate::combinatorics::{enumerate_diagrams, ArcDiagram};
use crate::coulomb::LineIntegral;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_singular, merged_exponents, richardson, QuadOptions, SingularPoint};

/// A real function of the marked points, safe to call from several threads.
pub type Evaluator<'a> = dyn Fn(&[f64]) -> Result<f64> + Sync + 'a;

/// Samples on the geometric grid of a collapse limit.
pub const GRID_POINTS: usize = 6;
/// First grid step as a fraction of the local gap.
pub const START_FRACTION: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// `x_{i+1} -> x_i`, one-based `i`.
    Collapse(usize),
    /// `x_1 -> -t`, `x_{2N} -> +t`.
    SendToInfinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSpec {
    pub kind: LimitKind,
    pub power: f64,
}

impl LimitSpec {
    pub fn new(kind: LimitKind, kappa: Speed) -> Self {
        LimitSpec { kind, power: 6.0 / kappa.value() - 1.0 }
    }

    pub fn evaluate(&self, f: &Evaluator, kappa: Speed, base: &[f64]) -> Result<LimitEstimate> {
        match self.kind {
            LimitKind::Collapse(i) => limit_collapse(f, i, kappa, base),
            LimitKind::SendToInfinity => limit_at_infinity(f, kappa, base),
        }
    }
}

/// Where to put a new adjacent pair at position `pos` of `y`, and the local gap.
fn place(y: &[f64], pos: usize, hint: Option<f64>) -> (f64, f64) {
    let lo = pos.checked_sub(1).map(|k| y[k]);
    let hi = y.get(pos).copied();
    match (lo, hi) {
        (Some(lo), Some(hi)) => {
            let gap = hi - lo;
            match hint {
                Some(h) if h > lo + 0.1 * gap && h < hi - 0.1 * gap => (h, (h - lo).min(hi - h)),
                _ => (0.5 * (lo + hi), 0.5 * gap),
            }
        }
        (Some(lo), None) => match hint {
            Some(h) if h > lo => (h, h - lo),
            _ => (lo + 1.0, 1.0),
        },
        (None, Some(hi)) => match hint {
            Some(h) if h < hi => (h, hi - h),
            _ => (hi - 1.0, 1.0),
        },
        (None, None) => (hint.unwrap_or(0.0), 1.0),
    }
}

fn collapse_at(f: &Evaluator, y: &[f64], pos: usize, hint: Option<f64>, kappa: Speed) -> Result<LimitEstimate> {
    let (x, gap) = place(y, pos, hint);
    let k = kappa.value();
    let power = 6.0 / k - 1.0;
    let eps0 = START_FRACTION * gap;
    let mut values = Vec::with_capacity(GRID_POINTS);
    for step in 0..GRID_POINTS {
        let eps = eps0 * 0.5f64.powi(step as i32);
        let mut pts = Vec::with_capacity(y.len() + 2);
        pts.extend_from_slice(&y[..pos]);
        pts.push(x);
        pts.push(x + eps);
        pts.extend_from_slice(&y[pos..]);
        let v = eps.powf(power) * f(&pts)?;
        if !v.is_finite() {
            return Err(Error::Extrapolation(format!("non-finite sample at eps = {eps:e}")));
        }
        values.push(v);
    }
    let (value, error) = richardson(&values, 0.5, &merged_exponents(8.0 / k - 1.0, GRID_POINTS - 1))?;
    Ok(LimitEstimate { value, error })
}

/// `lim eps^{6/kappa-1} f(x)` with `x_{i+1} = x_i + eps`, the other points at
/// their `base` positions (the base position of `x_{i+1}` is ignored).
pub fn limit_collapse(f: &Evaluator, i: usize, kappa: Speed, base: &[f64]) -> Result<LimitEstimate> {
    if i == 0 || i >= base.len() {
        return Err(Error::IndexOutOfRange { index: i, points: base.len() });
    }
    let mut y = base.to_vec();
    let hint = y[i - 1];
    y.drain(i - 1..=i);
    collapse_at(f, &y, i - 1, Some(hint), kappa)
}

/// `lim (2t)^{6/kappa-1} f(-t, x_2, ..., x_{2N-1}, t)`.
pub fn limit_at_infinity(f: &Evaluator, kappa: Speed, base: &[f64]) -> Result<LimitEstimate> {
    if base.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let k = kappa.value();
    let inner = &base[1..base.len() - 1];
    let reach = inner.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let t0 = 100.0 * reach;
    let mut values = Vec::with_capacity(GRID_POINTS);
    for step in 0..GRID_POINTS {
        let t = t0 * 2f64.powi(step as i32);
        let mut pts = Vec::with_capacity(base.len());
        pts.push(-t);
        pts.extend_from_slice(inner);
        pts.push(t);
        values.push((2.0 * t).powf(6.0 / k - 1.0) * f(&pts)?);
    }
    let (value, error) = richardson(&values, 0.5, &merged_exponents(8.0 / k - 1.0, GRID_POINTS - 1))?;
    Ok(LimitEstimate { value, error })
}

/// An allowable order of collapses for the class of `diagram`: one-based
/// indices in the successively collapsed diagrams, first collapse first.
pub fn limit_order(diagram: &ArcDiagram) -> Vec<usize> {
    let mut d = diagram.clone();
    let mut order = Vec::with_capacity(d.n_pairs());
    while d.n_pairs() > 1 {
        let i = (1..d.n_points()).find(|&i| d.has_adjacent_arc(i)).expect("a noncrossing diagram has an adjacent arc");
        order.push(i);
        d = d.collapse_arc(i).expect("adjacent arc");
    }
    order.push(1);
    order
}

/// Whether `order` is a valid collapse sequence for `diagram`.
pub fn is_allowable(diagram: &ArcDiagram, order: &[usize]) -> bool {
    let mut d = diagram.clone();
    for (step, &i) in order.iter().enumerate() {
        if !d.has_adjacent_arc(i) {
            return false;
        }
        if step + 1 == order.len() {
            return d.n_pairs() == 1;
        }
        match d.collapse_arc(i) {
            Ok(next) => d = next,
            Err(_) => return false,
        }
    }
    false
}

fn nested(f: &Evaluator, steps: &[(usize, f64)], y: &[f64], kappa: Speed) -> Result<LimitEstimate> {
    let Some((&(pos, hint), rest)) = steps.split_last() else {
        return Ok(LimitEstimate { value: f(y)?, error: 0.0 });
    };
    let inner = |z: &[f64]| nested(f, rest, z, kappa).map(|e| e.value);
    collapse_at(&inner, y, pos, Some(hint), kappa)
}

/// Apply the collapses in `order` (see [`limit_order`]) to `f`.
pub fn apply_sequence(f: &Evaluator, order: &[usize], kappa: Speed, base: &[f64]) -> Result<LimitEstimate> {
    if order.len() * 2 != base.len() {
        return Err(Error::SizeMismatch { left: order.len() * 2, right: base.len() });
    }
    let mut alive: Vec<usize> = (0..base.len()).collect();
    let mut steps = Vec::with_capacity(order.len());
    for &i in order {
        if i == 0 || i >= alive.len() {
            return Err(Error::IndexOutOfRange { index: i, points: alive.len() });
        }
        steps.push((i - 1, base[alive[i - 1]]));
        alive.drain(i - 1..=i);
    }
    nested(f, &steps, &[], kappa)
}

/// The limit functional of the class of `class` applied to `f`.
pub fn apply_functional(class: &ArcDiagram, f: &Evaluator, kappa: Speed, base: &[f64]) -> Result<LimitEstimate> {
    if class.n_points() != base.len() {
        return Err(Error::SizeMismatch { left: class.n_points(), right: base.len() });
    }
    apply_sequence(f, &limit_order(class), kappa, base)
}

/// All `C_N` functionals applied to `f`, in canonical order.
pub fn v_map(f: &Evaluator, kappa: Speed, base: &[f64], n_pairs: usize) -> Vec<Result<LimitEstimate>> {
    enumerate_diagrams(n_pairs).par_iter().map(|d| apply_functional(d, f, kappa, base)).collect()
}

/// Controls for [`frobenius_fit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Largest sample `eps` as a fraction of the local gap.
    pub eps_max_fraction: f64,
    pub decades: f64,
    pub samples: usize,
    /// Include the logarithmic column even off the odd regime.
    pub force_log: bool,
    pub max_condition: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { eps_max_fraction: 1e-3, decades: 1.0, samples: 16, force_log: false, max_condition: 1e8 }
    }
}

/// Leading coefficients of `A eps^{1-6/kappa}(1 + ...) + B eps^{2/kappa}(1 + ...)`
/// with an optional `eps^{2/kappa} log eps` term. In the odd regime the
/// `eps^{2/kappa}` column also absorbs the coincident identity-channel term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusFit {
    pub a0: f64,
    pub a0_err: f64,
    pub a1: f64,
    pub a1_err: f64,
    pub b0: f64,
    pub b0_err: f64,
    pub log_b0: Option<f64>,
    pub log_b0_err: Option<f64>,
    pub fitted_exponents: [f64; 2],
    pub residual: f64,
    pub condition: f64,
}

impl FrobeniusFit {
    /// `|log_b0|` in units of its standard error.
    pub fn log_significance(&self) -> Option<f64> {
        match (self.log_b0, self.log_b0_err) {
            (Some(v), Some(e)) if e > 0.0 => Some(v.abs() / e),
            (Some(v), Some(_)) => Some(if v == 0.0 { 0.0 } else { f64::INFINITY }),
            _ => None,
        }
    }
}

struct Lsq {
    coeffs: Vec<f64>,
    errors: Vec<f64>,
    residual: f64,
    condition: f64,
}

/// Row-weighted least squares with column scaling.
fn least_squares(columns: &[Vec<f64>], y: &[f64], weights: &[f64]) -> Result<Lsq> {
    let (m, p) = (y.len(), columns.len());
    if m <= p {
        return Err(Error::IllConditioned(format!("{m} samples for {p} unknowns")));
    }
    let mut x = DMatrix::from_fn(m, p, |r, c| columns[c][r] * weights[r]);
    let norms: Vec<f64> = (0..p).map(|c| x.column(c).norm()).collect();
    for (c, &n) in norms.iter().enumerate() {
        if n == 0.0 {
            return Err(Error::IllConditioned("zero column".into()));
        }
        x.column_mut(c).scale_mut(1.0 / n);
    }
    let b = DVector::from_iterator(m, y.iter().zip(weights).map(|(v, w)| v * w));
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let sol = svd.solve(&b, 1e-14 * smax).map_err(|e| Error::IllConditioned(e.to_string()))?;
    let resid = &b - &x * &sol;
    let rss = resid.norm_squared();
    let sigma2 = rss / (m - p) as f64;
    let gram = (x.transpose() * &x).try_inverse().ok_or(Error::Singular)?;
    let coeffs = (0..p).map(|c| sol[c] / norms[c]).collect();
    let errors = (0..p).map(|c| (sigma2 * gram[(c, c)]).sqrt() / norms[c]).collect();
    Ok(Lsq { coeffs, errors, residual: (rss / b.norm_squared()).sqrt(), condition })
}

/// Minimal Nelder–Mead simplex search.
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, start: &[f64], step: f64, tol: f64, max_iter: usize) -> Vec<f64> {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = (0..=n)
        .map(|k| {
            let mut p = start.to_vec();
            if k > 0 {
                p[k - 1] += step;
            }
            let v = f(&p);
            (p, v)
        })
        .collect();
    let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() <= tol * simplex[0].1.abs().max(1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|d| simplex[..n].iter().map(|s| s.0[d]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let reflected = blend(&centroid, &worst.0, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = blend(&centroid, &worst.0, -2.0);
            let fe = f(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = blend(&centroid, &worst.0, 0.5);
            let fc = f(&contracted);
            if fc < worst.1 {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = blend(&best, &s.0, 0.5);
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0).0
}

fn fit_window(f: &Evaluator, i: usize, base: &[f64], opts: &FitOptions, decades: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = base[i - 1];
    let left = if i >= 2 { x - base[i - 2] } else { f64::INFINITY };
    let right = if i + 1 < base.len() { base[i + 1] - x } else { f64::INFINITY };
    let gap = left.min(right);
    let gap = if gap.is_finite() { gap } else { 1.0 };
    let eps_max = opts.eps_max_fraction * gap;
    let eps: Vec<f64> = (0..opts.samples)
        .map(|k| eps_max * 10f64.powf(-decades * k as f64 / (opts.samples - 1) as f64))
        .collect();
    let values: Result<Vec<f64>> = eps
        .par_iter()
        .map(|&e| {
            let mut pts = base.to_vec();
            pts[i] = x + e;
            f(&pts)
        })
        .collect();
    Ok((eps, values?))
}

/// Fit the expansion of `f` as `x_{i+1} -> x_i` over a window of `eps`.
pub fn frobenius_fit(f: &Evaluator, i: usize, kappa: Speed, base: &[f64], opts: &FitOptions) -> Result<FrobeniusFit> {
    if i == 0 || i + 1 > base.len() || opts.samples < 8 {
        return Err(Error::InvalidArgument(format!("fit at index {i} with {} samples", opts.samples)));
    }
    match fit_once(f, i, kappa, base, opts, opts.decades) {
        Err(Error::IllConditioned(_)) => fit_once(f, i, kappa, base, opts, 2.0 * opts.decades),
        other => other,
    }
}

fn fit_once(f: &Evaluator, i: usize, kappa: Speed, base: &[f64], opts: &FitOptions, decades: f64) -> Result<FrobeniusFit> {
    let (eps, y) = fit_window(f, i, base, opts, decades)?;
    let weights: Vec<f64> = y.iter().map(|v| 1.0 / v.abs().max(f64::MIN_POSITIVE)).collect();
    let k = kappa.value();
    let (e1, e2) = (1.0 - 6.0 / k, 2.0 / k);
    let pow = |p: f64| eps.iter().map(|e| e.powf(p)).collect::<Vec<f64>>();

    let objective = |p: &[f64]| {
        let cols = vec![pow(p[0]), pow(p[0] + 1.0), pow(p[1]), pow(p[1] + 1.0)];
        least_squares(&cols, &y, &weights).map(|l| l.residual).unwrap_or(f64::INFINITY)
    };
    let fitted = nelder_mead(objective, &[e1 + 0.03, e2 - 0.03], 0.05, 1e-12, 400);

    let mut exps = vec![e1, e1 + 1.0, e1 + 2.0, e1 + 3.0, e2, e2 + 1.0, e2 + 2.0];
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut kept: Vec<f64> = Vec::new();
    for &p in &exps {
        if kept.iter().all(|q| (q - p).abs() > 1e-9) {
            kept.push(p);
            cols.push(pow(p));
        }
    }
    let with_log = kappa.is_odd_regime() || opts.force_log;
    if with_log {
        cols.push(eps.iter().map(|e| e.powf(e2) * e.ln()).collect());
    }
    exps = kept;
    let lsq = least_squares(&cols, &y, &weights)?;
    if lsq.condition > opts.max_condition {
        return Err(Error::IllConditioned(format!("condition number {:.3e}", lsq.condition)));
    }
    let b = exps.iter().position(|q| (q - e2).abs() < 1e-9).expect("channel column present");
    Ok(FrobeniusFit {
        a0: lsq.coeffs[0],
        a0_err: lsq.errors[0],
        a1: lsq.coeffs[1],
        a1_err: lsq.errors[1],
        b0: lsq.coeffs[b],
        b0_err: lsq.errors[b],
        log_b0: with_log.then(|| lsq.coeffs[exps.len()]),
        log_b0_err: with_log.then(|| lsq.errors[exps.len()]),
        fitted_exponents: [fitted[0], fitted[1]],
        residual: lsq.residual,
        condition: lsq.condition,
    })
}

fn beta_fn(a: f64, b: f64) -> f64 {
    gamma(a) * gamma(b) / gamma(a + b)
}

fn check_len(betas: &[f64], points: &[f64]) -> Result<()> {
    if betas.len() != points.len() {
        return Err(Error::SizeMismatch { left: betas.len(), right: points.len() });
    }
    Ok(())
}

fn violation(what: &str) -> Error {
    Error::InvalidArgument(format!("power constraint violated: {what}"))
}

/// `prod_{j != i, i+1} |x_i - x_j|^{beta_j}` with zero-based `i`.
fn spectator_product(betas: &[f64], points: &[f64], i: usize) -> f64 {
    (0..points.len())
        .filter(|&j| j != i && j != i + 1)
        .map(|j| (points[i] - points[j]).abs().powf(betas[j]))
        .product()
}

/// Leading coefficient of `(x_{i+1} - x_i)^{beta_i + beta_{i+1} + 1}` for a
/// single contour on `(x_i, x_{i+1})`. The entry `points[i]` (one-based `i+1`)
/// is ignored.
pub fn predict_case2(betas: &[f64], i: usize, points: &[f64]) -> Result<f64> {
    check_len(betas, points)?;
    if i == 0 || i + 1 > points.len() {
        return Err(Error::IndexOutOfRange { index: i, points: points.len() });
    }
    let (bi, bj) = (betas[i - 1], betas[i]);
    if (betas.iter().sum::<f64>() + 2.0).abs() > 1e-9 {
        return Err(violation("sum of powers must be -2"));
    }
    if bi <= -1.0 || bj <= -1.0 {
        return Err(violation("endpoint powers must exceed -1"));
    }
    Ok(beta_fn(bi + 1.0, bj + 1.0) * spectator_product(betas, points, i - 1))
}

/// As [`predict_case2`] for a contour on `(x_{i+1}, x_{i+2})`, which picks up a
/// ratio of sines.
pub fn predict_case3(betas: &[f64], i: usize, points: &[f64]) -> Result<f64> {
    check_len(betas, points)?;
    if i == 0 || i + 2 > points.len() {
        return Err(Error::IndexOutOfRange { index: i, points: points.len() });
    }
    let (bi, bj) = (betas[i - 1], betas[i]);
    if bi + bj >= -1.0 {
        return Err(violation("merging powers must sum below -1"));
    }
    if betas[i + 1] <= -1.0 {
        return Err(violation("far endpoint power must exceed -1"));
    }
    if (betas.iter().sum::<f64>() + 2.0).abs() > 1e-9 {
        return Err(violation("sum of powers must be -2"));
    }
    let ratio = -(PI * bj).sin() / (PI * (bi + bj)).sin();
    let base = beta_fn(bi + 1.0, bj + 1.0) * spectator_product(betas, points, i - 1);
    Ok(ratio * base)
}

/// Two contours ending at `x_i` and starting at `x_{i+1}`: leading coefficient
/// of `(x_{i+1} - x_i)^{2 beta_i + 1}`, a joined single integral from
/// `x_{i-1}` to `x_{i+2}` in which `x_i` no longer appears.
pub fn predict_case4(betas: &[f64], gamma_power: f64, i: usize, points: &[f64], opts: &QuadOptions) -> Result<f64> {
    check_len(betas, points)?;
    if i < 2 || i + 2 > points.len() {
        return Err(Error::IndexOutOfRange { index: i, points: points.len() });
    }
    let b = betas[i - 1];
    if (betas[i] - b).abs() > 1e-12 {
        return Err(violation("merging powers must agree"));
    }
    if (betas.iter().sum::<f64>() + gamma_power + 2.0).abs() > 1e-9 {
        return Err(violation("neutrality"));
    }
    if (b + gamma_power / 2.0).abs() > 1e-9 {
        return Err(violation("merged point must be invisible"));
    }
    let joined = (gamma(b + 1.0).powi(2)) / (-2.0 * (PI * b).cos() * gamma(2.0 * b + 2.0));
    let z = i - 1;
    let sing: Vec<SingularPoint> = (0..points.len())
        .filter(|&j| j != z && j != z + 1)
        .map(|j| SingularPoint::new(points[j], betas[j]))
        .collect();
    let j = integrate_singular(|_| 1.0.into(), points[z - 1], points[z + 2], &sing, opts)?.value.re;
    Ok(joined * spectator_product(betas, points, z) * j)
}

/// The three merging geometries checked against quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeCase {
    /// Both merging points are the ends of one contour.
    Endpoints,
    /// Only the right merging point is a contour end.
    OneEnd,
    /// Each merging point ends a different contour.
    Joined,
}

impl MergeCase {
    /// Case numbers used by the command line: 2, 3, 4.
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            2 => Ok(MergeCase::Endpoints),
            3 => Ok(MergeCase::OneEnd),
            4 => Ok(MergeCase::Joined),
            _ => Err(Error::InvalidArgument(format!("case {n} (expected 2, 3 or 4)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionCheck {
    pub predicted: f64,
    pub numeric: f64,
    pub numeric_error: f64,
    pub ratio: f64,
}

/// Exponents `a g + b` with `a, b >= 0`, not both zero, sorted and deduplicated.
fn lattice_exponents(g: f64, count: usize) -> Vec<f64> {
    let mut e = Vec::new();
    for a in 0..=count {
        for b in 0..=count {
            if a + b > 0 {
                e.push(a as f64 * g + b as f64);
            }
        }
    }
    e.sort_by(f64::total_cmp);
    e.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    e.truncate(count);
    e
}

/// Powers, variable power, contours, collapsing index and base points.
type ToySetup = (Vec<f64>, f64, Vec<(usize, usize)>, usize, Vec<f64>);

/// Extrapolate the rescaled toy integral as the gap closes and compare with the
/// predicted coefficient.
pub fn check_prediction(case: MergeCase, kappa: Speed) -> Result<PredictionCheck> {
    let k = kappa.value();
    if k <= 4.0 {
        return Err(Error::Unsupported("toy integrals use simple contours (kappa > 4)".into()));
    }
    let b = -4.0 / k;
    let g = 8.0 / k;
    let opts = QuadOptions::default();
    let leading = 2.0 * b + 1.0;
    let (betas, gamma_power, contours, i, shape): ToySetup = match case {
        MergeCase::Endpoints => (vec![b, b, b, -2.0 - 3.0 * b], 0.0, vec![(1, 2)], 1, vec![0.0, 0.0, 2.0, 3.5]),
        MergeCase::OneEnd => (vec![b, b, b, -2.0 - 3.0 * b], 0.0, vec![(2, 3)], 1, vec![0.0, 0.0, 2.0, 3.5]),
        MergeCase::Joined => (
            vec![b, b, b, b, -2.0 - 4.0 * b - g],
            g,
            vec![(1, 2), (3, 4)],
            2,
            vec![0.0, 1.0, 1.0, 2.0, 3.5],
        ),
    };
    let predicted = match case {
        MergeCase::Endpoints => predict_case2(&betas, i, &shape)?,
        MergeCase::OneEnd => predict_case3(&betas, i, &shape)?,
        MergeCase::Joined => predict_case4(&betas, gamma_power, i, &shape, &opts)?,
    };
    let x = shape[i - 1];
    let gap = (0..shape.len())
        .filter(|&j| j != i - 1 && j != i)
        .map(|j| (shape[j] - x).abs())
        .fold(f64::INFINITY, f64::min);
    let eps0 = START_FRACTION * gap;
    let mut values = Vec::with_capacity(GRID_POINTS);
    for step in 0..GRID_POINTS {
        let eps = eps0 * 0.5f64.powi(step as i32);
        let mut pts = shape.clone();
        pts[i] = x + eps;
        let li = LineIntegral::new(&pts, &betas, gamma_power, &contours)?.phased(false);
        values.push(li.evaluate(&opts)?.value.re * eps.powf(-leading));
    }
    let exps = match case {
        MergeCase::Endpoints => (1..GRID_POINTS).map(|e| e as f64).collect(),
        _ => lattice_exponents(-leading, GRID_POINTS - 1),
    };
    let (numeric, numeric_error) = richardson(&values, 0.5, &exps)?;
    Ok(PredictionCheck { predicted, numeric, numeric_error, ratio: numeric / predicted })
}
