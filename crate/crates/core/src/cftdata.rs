//! Scalar functions of the speed `kappa`: fugacity, central charge, Kac weights,
//! Coulomb gas charges, exceptional speeds and the normalization of the basis.

use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Distance from an integer at which `8/kappa` is treated as that integer.
pub const INTEGER_SNAP: f64 = 1e-9;

/// An SLE speed in the open interval `(0, 8)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Speed(f64);

impl Speed {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa.is_finite() && kappa > 0.0 && kappa < 8.0 {
            Ok(Speed(kappa))
        } else {
            Err(Error::InvalidSpeed(kappa))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn phase(self) -> Phase {
        if self.0 > 4.0 {
            Phase::Dense
        } else {
            Phase::Dilute
        }
    }

    /// `8/kappa` when it lies within [`INTEGER_SNAP`] of an integer.
    pub fn integer_eight_over(self) -> Option<u32> {
        let m = 8.0 / self.0;
        let r = m.round();
        ((m - r).abs() < INTEGER_SNAP).then_some(r as u32)
    }

    /// Whether `8/kappa` is an odd integer, the regime with logarithmic Frobenius terms.
    pub fn is_odd_regime(self) -> bool {
        matches!(self.integer_eight_over(), Some(m) if m % 2 == 1)
    }

    /// `r` with `kappa = 4/r`, when it exists.
    pub fn four_over(self) -> Option<u32> {
        match self.integer_eight_over() {
            Some(m) if m % 2 == 0 => Some(m / 2),
            _ => None,
        }
    }
}

impl TryFrom<f64> for Speed {
    type Error = Error;
    fn try_from(k: f64) -> Result<Self> {
        Speed::new(k)
    }
}

impl From<Speed> for f64 {
    fn from(s: Speed) -> f64 {
        s.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// `kappa > 4`
    Dense,
    /// `kappa <= 4`
    Dilute,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeSet {
    pub alpha0: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub phase: Phase,
}

/// Indicial powers of the two Frobenius channels at a collapsing interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub identity_power: f64,
    pub two_leg_power: f64,
}

impl ExponentPair {
    pub fn new(kappa: Speed) -> Self {
        let k = kappa.value();
        ExponentPair { identity_power: 1.0 - 6.0 / k, two_leg_power: 2.0 / k }
    }

    /// `two_leg_power - identity_power = 8/kappa - 1`.
    pub fn gap(&self) -> f64 {
        self.two_leg_power - self.identity_power
    }
}

/// `-2 cos(4 pi / kappa)`; exactly zero when `8/kappa` is an odd integer.
pub fn fugacity(kappa: Speed) -> f64 {
    if kappa.is_odd_regime() {
        return 0.0;
    }
    -2.0 * (4.0 * PI / kappa.value()).cos()
}

pub fn central_charge(kappa: Speed) -> f64 {
    let k = kappa.value();
    (6.0 - k) * (3.0 * k - 8.0) / (2.0 * k)
}

pub fn kac_weight(r: u32, s: u32, kappa: Speed) -> f64 {
    let k = kappa.value();
    let (r, s) = (r as f64, s as f64);
    let lead = match kappa.phase() {
        Phase::Dense => k * r - 4.0 * s,
        Phase::Dilute => k * s - 4.0 * r,
    };
    (lead * lead - (k - 4.0) * (k - 4.0)) / (16.0 * k)
}

pub fn charges(kappa: Speed) -> ChargeSet {
    let k = kappa.value();
    let root = k.sqrt() / 2.0;
    let phase = kappa.phase();
    let (alpha_plus, alpha_minus, sign) = match phase {
        Phase::Dense => (root, -1.0 / root, 1.0),
        Phase::Dilute => (1.0 / root, -root, -1.0),
    };
    ChargeSet { alpha0: sign * 0.5 * (root - 1.0 / root), alpha_plus, alpha_minus, phase }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChargeSign {
    Plus,
    Minus,
}

/// Kac charge `alpha_{r,s}^{sign}`.
pub fn kac_charge(r: u32, s: u32, sign: ChargeSign, kappa: Speed) -> f64 {
    let k = kappa.value();
    let (r, s) = (r as f64, s as f64);
    let (base, spread) = match kappa.phase() {
        Phase::Dense => (k - 4.0, (r * k - 4.0 * s).abs()),
        Phase::Dilute => (4.0 - k, (s * k - 4.0 * r).abs()),
    };
    let pm = match sign {
        ChargeSign::Plus => 1.0,
        ChargeSign::Minus => -1.0,
    };
    (base + pm * spread) / (4.0 * k.sqrt())
}

/// The two half-integer combinations of screening charges that realize the Kac
/// charges `alpha_{r,s}^{+}` and `alpha_{r,s}^{-}` (in some order).
pub fn kac_charge_decomposition(r: u32, s: u32, kappa: Speed) -> (f64, f64) {
    let ch = charges(kappa);
    let (r, s) = (r as f64, s as f64);
    (
        0.5 * (1.0 + r) * ch.alpha_plus + 0.5 * (1.0 + s) * ch.alpha_minus,
        0.5 * (1.0 - r) * ch.alpha_plus + 0.5 * (1.0 - s) * ch.alpha_minus,
    )
}

/// `kappa_{q,q'} = 4q/q'` for coprime `q > 1`.
pub fn exceptional_speed(q: u32, q_prime: u32) -> Result<Speed> {
    if q < 2 || q_prime == 0 || q.gcd(&q_prime) != 1 {
        return Err(Error::NotCoprime(q, q_prime));
    }
    Speed::new(4.0 * q as f64 / q_prime as f64)
}

/// `n_{q,q'} = -2 cos(pi q'/q)`, the fugacity at `kappa_{q,q'}`; exactly zero for `q = 2`.
pub fn exceptional_fugacity(q: u32, q_prime: u32) -> f64 {
    if q == 2 && q_prime % 2 == 1 {
        return 0.0;
    }
    -2.0 * (PI * q_prime as f64 / q as f64).cos()
}

/// Tolerance on fugacity agreement used by [`is_exceptional`].
pub const EXCEPTIONAL_TOL: f64 = 1e-12;

/// The coprime pair `(q, q')` with `q <= N + 1` whose fugacity matches `kappa`, if any.
///
/// When `kappa = 4q/q'` itself, that pair is returned; otherwise the pair with
/// smallest `q` and then smallest `q'` among the matching ones.
pub fn is_exceptional(kappa: Speed, n_pairs: usize) -> Option<(u32, u32)> {
    let n = fugacity(kappa);
    let k = kappa.value();
    let qmax = n_pairs as u32 + 1;
    for q in 2..=qmax {
        let matches: Vec<u32> = (1..2 * q)
            .filter(|&qp| q.gcd(&qp) == 1 && (exceptional_fugacity(q, qp) - n).abs() < EXCEPTIONAL_TOL)
            .collect();
        if matches.is_empty() {
            continue;
        }
        // kappa = 4q/q'' with q'' in one of the forms 2mq +- q'
        let direct = (4.0 * q as f64 / k).round() as u32;
        if direct > 0
            && q.gcd(&direct) == 1
            && (4.0 * q as f64 / direct as f64 - k).abs() < 1e-12 * k.max(1.0)
        {
            return Some((q, direct));
        }
        return Some((q, matches[0]));
    }
    None
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `n Gamma(2 - 8/kappa)` with the removable singularity at odd `8/kappa` filled in.
fn fugacity_times_gamma(kappa: Speed) -> f64 {
    match kappa.integer_eight_over() {
        Some(m) if m % 2 == 1 && m >= 3 => PI * (PI * m as f64 / 2.0).sin() / factorial(m - 2),
        _ => fugacity(kappa) * gamma(2.0 - 8.0 / kappa.value()),
    }
}

/// Normalization of a basis element with `simple_replacements` of its `N - 1`
/// double-loop contours replaced by simple curves.
///
/// At odd integer `8/kappa` the analytic limit is returned (which vanishes). At
/// `kappa = 4/r` the limit is finite only when exactly half the contours are
/// simple; a pole is reported as [`Error::NonFinite`] and a zero limit as `0`.
pub fn basis_prefactor(kappa: Speed, n_pairs: usize, simple_replacements: usize) -> Result<f64> {
    Ok(fugacity(kappa) * reduced_prefactor(kappa, n_pairs, simple_replacements)?)
}

/// [`basis_prefactor`] with the outer fugacity factor removed.
pub fn reduced_prefactor(kappa: Speed, n_pairs: usize, simple_replacements: usize) -> Result<f64> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let contours = n_pairs - 1;
    if simple_replacements > contours {
        return Err(Error::InvalidArgument(format!(
            "{simple_replacements} replacements exceed {contours} contours"
        )));
    }
    let loops = (contours - simple_replacements) as i32;
    let simple = simple_replacements as i32;
    let k = kappa.value();
    if let Some(r) = kappa.four_over() {
        // Line bracket vanishes linearly, double-loop bracket has a simple pole.
        return match loops.cmp(&simple) {
            std::cmp::Ordering::Greater => Err(Error::NonFinite(k)),
            std::cmp::Ordering::Less => Ok(0.0),
            std::cmp::Ordering::Equal => {
                let n = fugacity(kappa);
                let fr = factorial(r - 1);
                let pair = n * n * fr.powi(4) / (16.0 * PI * PI * factorial(2 * r - 2).powi(2));
                Ok(pair.powi(loops))
            }
        };
    }
    let s2 = 4.0 * (4.0 * PI / k).sin().powi(2);
    let line = fugacity_times_gamma(kappa) / gamma(1.0 - 4.0 / k).powi(2);
    let value = line.powi(simple) * (line / s2).powi(loops);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(k))
    }
}

/// Prefactor of the all-simple-contour (line) form, `N - 1` replacements.
pub fn line_prefactor(kappa: Speed, n_pairs: usize) -> Result<f64> {
    basis_prefactor(kappa, n_pairs, n_pairs.saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sp(k: f64) -> Speed {
        Speed::new(k).unwrap()
    }

    #[test]
    fn speed_bounds() {
        assert!(Speed::new(0.0).is_err());
        assert!(Speed::new(8.0).is_err());
        assert!(Speed::new(f64::NAN).is_err());
        assert_eq!(sp(4.0).phase(), Phase::Dilute);
        assert_eq!(sp(4.5).phase(), Phase::Dense);
    }

    #[test]
    fn fugacity_examples() {
        assert_relative_eq!(fugacity(sp(6.0)), 1.0, epsilon = 1e-14);
        assert!(fugacity(sp(8.0 / 3.0)).abs() < 1e-14);
        assert_relative_eq!(fugacity(sp(4.0)), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn central_charge_examples() {
        assert_eq!(central_charge(sp(6.0)), 0.0);
        assert!(central_charge(sp(8.0 / 3.0)).abs() < 1e-14);
        assert_relative_eq!(central_charge(sp(4.0)), 1.0);
    }

    #[test]
    fn kac_examples() {
        assert!(kac_weight(1, 2, sp(6.0)).abs() < 1e-15);
        assert_relative_eq!(kac_weight(1, 2, sp(5.0)), 0.1, epsilon = 1e-15);
        for k in [1.0, 3.0, 4.0, 6.5] {
            assert!(kac_weight(1, 1, sp(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn charge_examples() {
        let c = charges(sp(6.0));
        assert_relative_eq!(c.alpha_plus, 6f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(c.alpha_minus, -2.0 / 6f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(kac_charge(1, 2, ChargeSign::Plus, sp(6.0)), 1.0 / 6f64.sqrt(), epsilon = 1e-15);
        let c5 = charges(sp(5.0));
        assert!((c5.alpha_plus + c5.alpha_minus - 2.0 * c5.alpha0).abs() < 1e-15);
    }

    #[test]
    fn exceptional_examples() {
        assert_eq!(exceptional_speed(3, 2).unwrap().value(), 6.0);
        assert_eq!(exceptional_speed(3, 4).unwrap().value(), 3.0);
        assert!(exceptional_speed(4, 2).is_err());
        assert!(exceptional_speed(2, 1).is_err()); // kappa = 8 is outside the range
        assert_eq!(is_exceptional(sp(5.0), 3), None);
        assert_eq!(is_exceptional(sp(6.0), 2), Some((3, 2)));
        assert_eq!(is_exceptional(sp(3.0), 2), Some((3, 4)));
        assert_eq!(is_exceptional(sp(8.0 / 3.0), 1), Some((2, 3)));
    }

    #[test]
    fn prefactor_examples() {
        for k in [1.3, 3.0, 5.0, 7.0] {
            assert_relative_eq!(basis_prefactor(sp(k), 1, 0).unwrap(), fugacity(sp(k)), epsilon = 1e-15);
        }
        let want = gamma(2.0 / 3.0) / gamma(1.0 / 3.0).powi(2);
        assert_relative_eq!(basis_prefactor(sp(6.0), 2, 1).unwrap(), want, max_relative = 1e-13);
        assert_eq!(basis_prefactor(sp(8.0 / 3.0), 2, 1).unwrap(), 0.0);
        assert_relative_eq!(reduced_prefactor(sp(8.0 / 3.0), 2, 1).unwrap(), -0.25, max_relative = 1e-12);
        assert!(matches!(basis_prefactor(sp(4.0), 2, 0), Err(Error::NonFinite(_))));
        assert_eq!(basis_prefactor(sp(4.0), 2, 1).unwrap(), 0.0);
    }

    #[test]
    fn odd_limit_is_continuous() {
        let k0 = 8.0 / 3.0;
        let at = reduced_prefactor(sp(k0), 3, 2).unwrap();
        let near = reduced_prefactor(sp(k0 + 1e-6), 3, 2).unwrap();
        assert_relative_eq!(at, near, max_relative = 1e-4);
    }

    #[test]
    fn four_over_r_pair_limit() {
        // one simple and one double-loop contour at N = 3
        for r in [1u32, 2, 3] {
            let k0 = 4.0 / r as f64;
            let at = reduced_prefactor(sp(k0), 3, 1).unwrap();
            let h = 1e-5;
            let near = 0.5 * (reduced_prefactor(sp(k0 + h), 3, 1).unwrap() + reduced_prefactor(sp(k0 - h), 3, 1).unwrap());
            assert_relative_eq!(at, near, max_relative = 1e-4);
        }
    }
}
