//! Connectivity weights from the meander system, crossing probabilities, and
//! the inserted-arc combinations `Theta`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::v_map;
use crate::cftdata::{fugacity, is_exceptional, Speed};
use crate::combinatorics::{catalan, enumerate_diagrams, ArcDiagram};
use crate::coulomb::{evaluate_f_with, Configuration, EvalOptions};
use crate::error::{Error, Result};
use crate::meander::{loop_matrix, numeric_rank};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Generic,
    Exceptional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub kappa: f64,
    pub points: Vec<f64>,
    /// One weight per diagram, canonical order.
    pub values: Vec<f64>,
    pub condition_number: f64,
    pub regime: Regime,
    /// Per-component extrapolation error, exceptional regime only.
    pub errors: Option<Vec<f64>>,
}

impl WeightVector {
    /// Reported, never enforced.
    pub fn all_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }
}

/// All basis elements at one configuration, canonical order.
pub fn basis_values(kappa: Speed, config: &Configuration, opts: &EvalOptions) -> Result<Vec<f64>> {
    enumerate_diagrams(config.n_pairs())
        .par_iter()
        .map(|d| evaluate_f_with(d, kappa, config, opts).map(|r| r.value))
        .collect()
}

/// Solve the meander system for the weights. Fails at exceptional speeds.
pub fn connectivity_weights(kappa: Speed, config: &Configuration, opts: &EvalOptions) -> Result<WeightVector> {
    let n_pairs = config.n_pairs();
    if is_exceptional(kappa, n_pairs).is_some() {
        return Err(Error::Exceptional { kappa: kappa.value(), n_pairs });
    }
    solve_weights(kappa, config, opts)
}

fn solve_weights(kappa: Speed, config: &Configuration, opts: &EvalOptions) -> Result<WeightVector> {
    let n_pairs = config.n_pairs();
    let points = config.points().to_vec();
    if n_pairs == 1 {
        let v = evaluate_f_with(&enumerate_diagrams(1)[0], kappa, config, &opts.reduced())?.value;
        return Ok(WeightVector { kappa: kappa.value(), points, values: vec![v], condition_number: 1.0, regime: Regime::Generic, errors: None });
    }
    let m = loop_matrix(n_pairs)?.evaluate(fugacity(kappa));
    let rhs = nalgebra::DVector::from_vec(basis_values(kappa, config, opts)?);
    let svd = m.clone().svd(false, false);
    let condition_number = svd.singular_values.max() / svd.singular_values.min();
    if numeric_rank(&m) < m.nrows() {
        return Err(Error::Singular);
    }
    let lu = m.clone().lu();
    let mut x = lu.solve(&rhs).ok_or(Error::Singular)?;
    // One step of iterative refinement.
    let r = &rhs - &m * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    Ok(WeightVector {
        kappa: kappa.value(),
        points,
        values: x.iter().copied().collect(),
        condition_number,
        regime: Regime::Generic,
        errors: None,
    })
}

/// Weights at an exceptional speed as the limit of nearby generic speeds,
/// `(4 (W(+h) + W(-h)) - (W(+2h) + W(-2h))) / 6`.
pub fn connectivity_weights_exceptional(kappa: Speed, config: &Configuration, h: f64, opts: &EvalOptions) -> Result<WeightVector> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidArgument(format!("perturbation {h}")));
    }
    let k = kappa.value();
    let at = |dk: f64| -> Result<Vec<f64>> { Ok(solve_weights(Speed::new(k + dk)?, config, opts)?.values) };
    let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
    let mut values = Vec::with_capacity(p1.len());
    let mut errors = Vec::with_capacity(p1.len());
    for c in 0..p1.len() {
        let near = p1[c] + m1[c];
        let far = p2[c] + m2[c];
        let v = (4.0 * near - far) / 6.0;
        if !v.is_finite() {
            return Err(Error::Extrapolation(format!("component {} diverges", c + 1)));
        }
        values.push(v);
        errors.push((v - 0.5 * near).abs());
    }
    Ok(WeightVector {
        kappa: k,
        points: config.points().to_vec(),
        values,
        condition_number: f64::NAN,
        regime: Regime::Exceptional,
        errors: Some(errors),
    })
}

/// `P_s = a_s W_s / sum_t a_t W_t`; nonzero coefficients must share a sign.
pub fn crossing_probabilities(coeffs: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if coeffs.len() != weights.len() {
        return Err(Error::SizeMismatch { left: coeffs.len(), right: weights.len() });
    }
    let pos = coeffs.iter().any(|&a| a > 0.0);
    let neg = coeffs.iter().any(|&a| a < 0.0);
    if pos && neg {
        return Err(Error::InvalidArgument("coefficients of mixed sign".into()));
    }
    let terms: Vec<f64> = coeffs.iter().zip(weights).map(|(a, w)| a * w).collect();
    let total: f64 = terms.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::InvalidArgument("zero denominator".into()));
    }
    Ok(terms.iter().map(|t| t / total).collect())
}

/// Diagrams without the arc `(i, i+1)` that the chi map sends to `sigma`
/// with that arc inserted.
pub fn chi_fiber(sigma: &ArcDiagram, i: usize) -> Result<Vec<ArcDiagram>> {
    let target = sigma.insert_arc(i)?;
    Ok(enumerate_diagrams(sigma.n_pairs() + 1)
        .into_iter()
        .filter(|r| !r.has_adjacent_arc(i) && r.chi_map(i).map(|c| c == target).unwrap_or(false))
        .collect())
}

/// Row `sigma` (one-based) of the inverse meander matrix one size down.
fn theta_coefficients(sigma: usize, n_small: usize, kappa: Speed) -> Result<Vec<f64>> {
    if is_exceptional(kappa, n_small).is_some() {
        return Err(Error::Exceptional { kappa: kappa.value(), n_pairs: n_small });
    }
    let m = loop_matrix(n_small)?.evaluate(fugacity(kappa));
    let inv = m.try_inverse().ok_or(Error::Singular)?;
    let size = inv.nrows();
    if sigma == 0 || sigma > size {
        return Err(Error::IndexOutOfRange { index: sigma, points: size });
    }
    Ok(inv.row(sigma - 1).iter().copied().collect())
}

/// `Theta_sigma` at the full configuration: the combination of basis
/// elements whose diagrams contain the inserted arc `(i, i+1)`.
pub fn theta(sigma: usize, i: usize, kappa: Speed, config: &Configuration, opts: &EvalOptions) -> Result<f64> {
    let n_small = config.n_pairs().checked_sub(1).filter(|&n| n > 0).ok_or_else(|| Error::InvalidArgument("needs N >= 2".into()))?;
    let b = theta_coefficients(sigma, n_small, kappa)?;
    let small = enumerate_diagrams(n_small);
    let mut acc = 0.0;
    for (coef, d) in b.iter().zip(&small) {
        acc += coef * evaluate_f_with(&d.insert_arc(i)?, kappa, config, opts)?.value;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub sigma: usize,
    pub insertion: usize,
    /// Functional images of `Theta`.
    pub images: Vec<f64>,
    /// `n e_{inserted} + sum over the chi fiber of e_rho`.
    pub expected: Vec<f64>,
    pub fiber: Vec<usize>,
    pub discrepancy: f64,
    /// Direct comparison with the weights at the base configuration.
    pub weight_discrepancy: Option<f64>,
    pub failures: Vec<String>,
}

/// Compare `Theta_sigma` with the weight combination it should decompose into.
pub fn verify_theta_decomposition(sigma: usize, i: usize, kappa: Speed, base: &Configuration, opts: &EvalOptions) -> ThetaReport {
    let n_pairs = base.n_pairs();
    let mut report = ThetaReport {
        sigma,
        insertion: i,
        images: Vec::new(),
        expected: Vec::new(),
        fiber: Vec::new(),
        discrepancy: f64::NAN,
        weight_discrepancy: None,
        failures: Vec::new(),
    };
    let small = enumerate_diagrams(n_pairs.saturating_sub(1));
    let Some(s) = sigma.checked_sub(1).and_then(|k| small.get(k)) else {
        report.failures.push(format!("sigma {sigma} out of range"));
        return report;
    };
    let (inserted, fiber) = match (s.insert_arc(i), chi_fiber(s, i)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            report.failures.push(e.to_string());
            return report;
        }
    };
    let n = fugacity(kappa);
    let size = catalan(n_pairs as u32).unwrap_or(0) as usize;
    let mut expected = vec![0.0; size];
    expected[inserted.canonical_index()] += n;
    for r in &fiber {
        expected[r.canonical_index()] += 1.0;
    }
    report.fiber = fiber.iter().map(|r| r.canonical_index() + 1).collect();
    let conj = base.conjugate();
    let f = |x: &[f64]| theta(sigma, i, kappa, &Configuration::new(x.to_vec(), conj)?, opts);
    let mut images = Vec::with_capacity(size);
    for (k, est) in v_map(&f, kappa, base.points(), n_pairs).into_iter().enumerate() {
        match est {
            Ok(e) => images.push(e.value),
            Err(e) => {
                report.failures.push(format!("component {}: {e}", k + 1));
                images.push(f64::NAN);
            }
        }
    }
    report.discrepancy = images.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if let (Ok(w), Ok(t)) = (connectivity_weights(kappa, base, opts), f(base.points())) {
        let combo: f64 = expected.iter().zip(&w.values).map(|(c, v)| c * v).sum();
        report.weight_discrepancy = Some((t - combo).abs() / t.abs().max(f64::MIN_POSITIVE));
    }
    report.images = images;
    report.expected = expected;
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities() {
        let p = crossing_probabilities(&[0.0, 1.0], &[0.3, 0.7]).unwrap();
        assert_eq!(p, vec![0.0, 1.0]);
        assert!(crossing_probabilities(&[1.0, -1.0], &[0.3, 0.7]).is_err());
        assert!(crossing_probabilities(&[0.0, 0.0], &[0.3, 0.7]).is_err());
    }

    #[test]
    fn fiber_sizes() {
        for n in 1..5usize {
            let total: usize = enumerate_diagrams(n)
                .iter()
                .map(|s| (1..=2 * n + 1).map(|i| chi_fiber(s, i).unwrap().len()).sum::<usize>())
                .sum();
            let per_i = (catalan(n as u32 + 1).unwrap() - catalan(n as u32).unwrap()) as usize;
            assert_eq!(total, per_i * (2 * n + 1));
        }
    }

    #[test]
    fn one_pair_weight() {
        let cfg = Configuration::standard(vec![0.2, 1.7]).unwrap();
        let k = Speed::new(5.0).unwrap();
        let w = connectivity_weights(k, &cfg, &EvalOptions::default()).unwrap();
        assert!((w.values[0] - 1.5f64.powf(1.0 - 6.0 / 5.0)).abs() < 1e-14);
    }

    #[test]
    fn exceptional_is_refused() {
        let cfg = Configuration::standard(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let err = connectivity_weights(Speed::new(6.0).unwrap(), &cfg, &EvalOptions::default());
        assert!(matches!(err, Err(Error::Exceptional { .. })));
    }
}
