use serde::{Deserialize, Serialize};

use super::Configuration;
use crate::cftdata::Speed;
use crate::error::{Error, Result};

/// An exponent of the form `per_kappa / kappa + constant`, kept exact so that
/// neutrality can be checked without rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Power {
    pub per_kappa: i64,
    pub constant: i64,
}

impl Power {
    pub const fn new(per_kappa: i64, constant: i64) -> Self {
        Power { per_kappa, constant }
    }

    pub fn value(self, kappa: Speed) -> f64 {
        self.per_kappa as f64 / kappa.value() + self.constant as f64
    }

    fn scaled(self, k: i64) -> Power {
        Power::new(self.per_kappa * k, self.constant * k)
    }
}

impl std::ops::Add for Power {
    type Output = Power;
    fn add(self, o: Power) -> Power {
        Power::new(self.per_kappa + o.per_kappa, self.constant + o.constant)
    }
}

/// Power at an ordinary point.
pub const POINT_POWER: Power = Power::new(-4, 0);
/// Power at the conjugate point.
pub const CONJUGATE_POWER: Power = Power::new(12, -2);
/// Power between two integration variables.
pub const VARIABLE_POWER: Power = Power::new(8, 0);
/// External power between two ordinary points.
pub const PAIR_POWER: Power = Power::new(2, 0);
/// External power between the conjugate point and any other point.
pub const CONJUGATE_PAIR_POWER: Power = Power::new(-6, 1);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrandSpec {
    pub kappa: Speed,
    /// Power of `|u - x_l|` for every marked point.
    pub betas: Vec<Power>,
    /// Power of `|u_p - u_q|`.
    pub gamma: Power,
    pub pair_power: Power,
    pub conjugate_pair_power: Power,
    /// One-based.
    pub conjugate: usize,
    pub variables: usize,
}

impl IntegrandSpec {
    pub fn beta_values(&self) -> Vec<f64> {
        self.betas.iter().map(|p| p.value(self.kappa)).collect()
    }

    pub fn gamma_value(&self) -> f64 {
        self.gamma.value(self.kappa)
    }

    /// Total power seen by one integration variable; `-2` for a neutral gas.
    pub fn variable_total(&self) -> Power {
        let others = self.variables as i64 - 1;
        self.betas.iter().fold(self.gamma.scaled(others), |acc, &p| acc + p)
    }
}

pub fn build_integrand(config: &Configuration, kappa: Speed) -> Result<IntegrandSpec> {
    let c = config.conjugate();
    let betas = (1..=config.points().len())
        .map(|l| if l == c { CONJUGATE_POWER } else { POINT_POWER })
        .collect();
    let spec = IntegrandSpec {
        kappa,
        betas,
        gamma: VARIABLE_POWER,
        pair_power: PAIR_POWER,
        conjugate_pair_power: CONJUGATE_PAIR_POWER,
        conjugate: c,
        variables: config.n_pairs() - 1,
    };
    if spec.variables > 0 {
        let total = spec.variable_total();
        if total != Power::new(0, -2) {
            return Err(Error::Neutrality { variable: 1, total: total.value(kappa) });
        }
    }
    Ok(spec)
}

/// The non-integrated product of pairwise distances.
pub fn external_factor(config: &Configuration, kappa: Speed) -> f64 {
    let x = config.points();
    let c = config.conjugate() - 1;
    let pair = PAIR_POWER.value(kappa);
    let conj = CONJUGATE_PAIR_POWER.value(kappa);
    let mut log = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let p = if i == c || j == c { conj } else { pair };
            log += p * (x[j] - x[i]).ln();
        }
    }
    log.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn powers_at_sample_speeds() {
        let cfg = Configuration::standard(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let spec = build_integrand(&cfg, Speed::new(6.0).unwrap()).unwrap();
        let b = spec.beta_values();
        assert_relative_eq!(b[0], -2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(b[5], 0.0);
        assert_relative_eq!(spec.gamma_value(), 4.0 / 3.0, epsilon = 1e-15);

        let spec = build_integrand(&cfg, Speed::new(4.0).unwrap()).unwrap();
        let b = spec.beta_values();
        assert_eq!((b[0], b[5], spec.gamma_value()), (-1.0, 1.0, 2.0));
        assert_eq!(spec.pair_power.value(Speed::new(3.0).unwrap()), 2.0 / 3.0);
    }

    #[test]
    fn neutral_for_every_size() {
        for n in 2..7 {
            let cfg = Configuration::new((0..2 * n).map(f64::from).collect(), 1).unwrap();
            let spec = build_integrand(&cfg, Speed::new(5.5).unwrap()).unwrap();
            assert_eq!(spec.variable_total(), Power::new(0, -2));
        }
    }
}
