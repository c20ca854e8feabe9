//! The meander (Gram) matrix of loop counts, its determinant factorization,
//! zero multiplicities, ranks at exceptional speeds and kernels.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cftdata::{is_exceptional, Speed};
use crate::combinatorics::{catalan, enumerate_diagrams, loop_count};
use crate::error::{Error, Result};

/// Largest `N` accepted by [`loop_matrix`] unless a cap is passed explicitly.
pub const DEFAULT_MAX_N: usize = 8;

/// Relative singular-value threshold for ranks and kernels.
pub const SVD_THRESHOLD: f64 = 1e-10;

/// Loop-count exponents `l(s, t)` in canonical diagram order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanderMatrix {
    pub n_pairs: usize,
    pub exponents: Vec<Vec<u32>>,
}

impl MeanderMatrix {
    pub fn size(&self) -> usize {
        self.exponents.len()
    }

    /// Entrywise `n^l`.
    pub fn evaluate(&self, n: f64) -> DMatrix<f64> {
        let c = self.size();
        DMatrix::from_fn(c, c, |i, j| n.powi(self.exponents[i][j] as i32))
    }

    /// Entrywise `n^l` in exact rational arithmetic.
    pub fn evaluate_exact(&self, n: &BigRational) -> Vec<Vec<BigRational>> {
        let pows: Vec<BigRational> = (0..=self.n_pairs as i32).map(|l| pow_rational(n, l as u32)).collect();
        self.exponents.iter().map(|row| row.iter().map(|&l| pows[l as usize].clone()).collect()).collect()
    }
}

fn pow_rational(n: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= n;
    }
    acc
}

/// The meander matrix for `n_pairs` arcs, capped at [`DEFAULT_MAX_N`].
pub fn loop_matrix(n_pairs: usize) -> Result<MeanderMatrix> {
    loop_matrix_capped(n_pairs, DEFAULT_MAX_N)
}

pub fn loop_matrix_capped(n_pairs: usize, cap: usize) -> Result<MeanderMatrix> {
    if n_pairs > cap {
        return Err(Error::SizeCap { requested: n_pairs, cap });
    }
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let ds = enumerate_diagrams(n_pairs);
    let exponents = ds
        .par_iter()
        .map(|a| ds.iter().map(|b| loop_count(a, b).map(|l| l as u32)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanderMatrix { n_pairs, exponents })
}

fn binomial(n: i64, k: i64) -> i128 {
    if k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as i128 / (j + 1) as i128;
    }
    acc
}

/// Power of `U_q` in the determinant factorization.
pub fn a_coeff(n_pairs: usize, q: usize) -> i128 {
    let (n, q) = (n_pairs as i64, q as i64);
    binomial(2 * n, n - q) - 2 * binomial(2 * n, n - q - 1) + binomial(2 * n, n - q - 2)
}

/// Chebyshev polynomial of the second kind in the normalization `U_1(n) = n`.
pub fn chebyshev_u(q: usize, n: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, n);
    if q == 0 {
        return 1.0;
    }
    for _ in 1..q {
        let next = n * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn chebyshev_u_exact(q: usize, n: &BigRational) -> BigRational {
    let (mut prev, mut cur) = (BigRational::one(), n.clone());
    if q == 0 {
        return prev;
    }
    for _ in 1..q {
        let next = n * &cur - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Signed logarithm of a real number: `(sign, ln|x|)`, with `sign = 0` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub sign: i8,
    pub ln_abs: f64,
}

impl LogValue {
    pub fn zero() -> Self {
        LogValue { sign: 0, ln_abs: f64::NEG_INFINITY }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.ln_abs.exp()
        }
    }

    /// `|self/other - 1|`, infinite when exactly one of them is zero.
    pub fn relative_difference(self, other: LogValue) -> f64 {
        match (self.sign, other.sign) {
            (0, 0) => 0.0,
            (0, _) | (_, 0) => f64::INFINITY,
            (a, b) if a != b => 2.0 + (self.ln_abs - other.ln_abs).exp(),
            _ => (self.ln_abs - other.ln_abs).exp_m1().abs(),
        }
    }
}

/// The determinant factorization `prod_q U_q(n)^{a(N,q)}` in log form.
pub fn meander_det_log(n_pairs: usize, n: f64) -> LogValue {
    let mut sign = 1i8;
    let mut ln_abs = 0.0;
    for q in 1..=n_pairs {
        let a = a_coeff(n_pairs, q);
        if a == 0 {
            continue;
        }
        let u = chebyshev_u(q, n);
        if u == 0.0 {
            return LogValue::zero();
        }
        if u < 0.0 && a % 2 != 0 {
            sign = -sign;
        }
        ln_abs += a as f64 * u.abs().ln();
    }
    LogValue { sign, ln_abs }
}

pub fn meander_det(n_pairs: usize, n: f64) -> f64 {
    meander_det_log(n_pairs, n).to_f64()
}

pub fn meander_det_exact(n_pairs: usize, n: &BigRational) -> BigRational {
    let mut acc = BigRational::one();
    for q in 1..=n_pairs {
        let a = a_coeff(n_pairs, q);
        let u = chebyshev_u_exact(q, n);
        for _ in 0..a {
            acc *= &u;
        }
    }
    acc
}

/// Determinant of a float matrix by partial-pivoted LU, in log form.
pub fn det_log(m: &DMatrix<f64>) -> LogValue {
    let lu = m.clone().lu();
    let u = lu.u();
    let mut sign: i8 = lu.p().determinant::<f64>().signum() as i8;
    let mut ln_abs = 0.0;
    for k in 0..u.nrows() {
        let d = u[(k, k)];
        if d == 0.0 {
            return LogValue::zero();
        }
        if d < 0.0 {
            sign = -sign;
        }
        ln_abs += d.abs().ln();
    }
    LogValue { sign, ln_abs }
}

/// Exact determinant: clear denominators, then fraction-free (Bareiss) elimination.
pub fn det_exact(m: &[Vec<BigRational>]) -> BigRational {
    let c = m.len();
    if c == 0 {
        return BigRational::one();
    }
    let mut lcm = BigInt::one();
    for row in m {
        for x in row {
            lcm = num_integer::Integer::lcm(&lcm, x.denom());
        }
    }
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| row.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect())
        .collect();
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..c {
        if a[k][k].is_zero() {
            match (k + 1..c).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigRational::zero(),
            }
        }
        for i in k + 1..c {
            for j in k + 1..c {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = if sign < 0 { -a[c - 1][c - 1].clone() } else { a[c - 1][c - 1].clone() };
    BigRational::new(det, num_traits::pow(lcm, c))
}

/// `d_N(q) = sum_{p >= 1} a(N, pq - 1)`, the order of vanishing at `n_{q,q'}`.
pub fn multiplicity_d(n_pairs: usize, q: usize) -> u64 {
    if q < 2 {
        return 0;
    }
    (1..=(n_pairs + 1) / q).map(|p| a_coeff(n_pairs, p * q - 1) as u64).sum()
}

/// Rank of the basis at `kappa`, from the exceptional-speed classification.
pub fn rank_at(n_pairs: usize, kappa: Speed) -> Result<usize> {
    let c = catalan(n_pairs as u32)? as usize;
    Ok(match is_exceptional(kappa, n_pairs) {
        Some((q, _)) => c - multiplicity_d(n_pairs, q as usize) as usize,
        None => c,
    })
}

/// Number of singular values above `SVD_THRESHOLD * sigma_max`.
pub fn numeric_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > SVD_THRESHOLD * top).count()
}

/// Orthonormal basis of the kernel of the evaluated meander matrix.
pub fn kernel_basis(n_pairs: usize, n: f64) -> Result<Vec<DVector<f64>>> {
    let m = loop_matrix(n_pairs)?.evaluate(n);
    let svd = m.svd(false, true);
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut out: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= SVD_THRESHOLD * top)
        .map(|(k, _)| vt.row(k).transpose().into_owned())
        .collect();
    if out.is_empty() {
        return Err(Error::NotAZero(n));
    }
    // Fix the sign so the first nonzero coordinate is positive.
    for v in &mut out {
        if let Some(x) = v.iter().find(|x| x.abs() > 1e-12) {
            if *x < 0.0 {
                *v = -v.clone();
            }
        }
    }
    Ok(out)
}

/// Whether a Cholesky factorization succeeds.
pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}

/// Exact rational from a decimal or `p/q` string.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let neg = s.starts_with('-');
    let body = s.trim_start_matches(['-', '+']);
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int}{frac}");
    let mag: BigInt = if digits.is_empty() { return Err(bad()) } else { digits.parse().map_err(|_| bad())? };
    let r = BigRational::new(mag, num_traits::pow(BigInt::from(10), frac.len()));
    Ok(if neg { -r } else { r.abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rat(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn small_matrices() {
        assert_eq!(loop_matrix(1).unwrap().exponents, vec![vec![1]]);
        assert_eq!(loop_matrix(2).unwrap().exponents, vec![vec![2, 1], vec![1, 2]]);
        let m3 = loop_matrix(3).unwrap();
        for i in 0..5 {
            assert_eq!(m3.exponents[i][i], 3);
        }
        assert!(matches!(loop_matrix(9), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn evaluation_examples() {
        let m = loop_matrix(2).unwrap();
        assert_eq!(m.evaluate(1.0), DMatrix::from_element(2, 2, 1.0));
        assert_eq!(m.evaluate(2.0), DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 4.0]));
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(a_coeff(1, 1), 1);
        assert_eq!(a_coeff(2, 1), 2);
        assert_eq!(a_coeff(2, 2), 1);
    }

    #[test]
    fn determinant_examples() {
        assert_relative_eq!(meander_det(1, 0.7), 0.7);
        let n: f64 = 1.3;
        assert_relative_eq!(meander_det(2, n), n * n * (n * n - 1.0), max_relative = 1e-14);
        assert_eq!(meander_det(2, 1.0), 0.0);
        let m = loop_matrix(2).unwrap().evaluate_exact(&rat("3/2"));
        assert_eq!(det_exact(&m), meander_det_exact(2, &rat("3/2")));
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity_d(2, 3), 1);
        for n in 1..=6 {
            assert_eq!(multiplicity_d(n, 2), catalan(n as u32).unwrap());
            assert_eq!(multiplicity_d(n, n + 1), 1);
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_at(2, Speed::new(5.0).unwrap()).unwrap(), 2);
        assert_eq!(rank_at(2, Speed::new(6.0).unwrap()).unwrap(), 1);
        assert_eq!(rank_at(3, Speed::new(6.0).unwrap()).unwrap(), 1);
        assert_eq!(numeric_rank(&loop_matrix(3).unwrap().evaluate(1.0)), 1);
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(2, 1.0).unwrap();
        assert_eq!(k.len(), 1);
        assert_relative_eq!(k[0][0], 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(k[0][1], -1.0 / 2f64.sqrt(), epsilon = 1e-12);
        let k = kernel_basis(2, -1.0).unwrap();
        assert_relative_eq!(k[0][1], 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert!(matches!(kernel_basis(2, 0.5), Err(Error::NotAZero(_))));
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(rat("-1/2"), BigRational::new((-1).into(), 2.into()));
        assert_eq!(rat("0.25"), BigRational::new(1.into(), 4.into()));
        assert_eq!(rat("-2"), BigRational::from_integer((-2).into()));
        assert!(parse_rational("x").is_err());
    }
}
