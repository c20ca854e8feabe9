use sleconn::asymptotics::{limit_collapse, v_map};
use sleconn::cftdata::{fugacity, Speed};
use sleconn::combinatorics::enumerate_diagrams;
use sleconn::coulomb::{Configuration, EvalOptions};
use sleconn::meander::loop_matrix;
use sleconn::weights::*;

fn sp(k: f64) -> Speed {
    Speed::new(k).unwrap()
}

fn component(t: usize, k: f64) -> impl Fn(&[f64]) -> sleconn::Result<f64> + Sync {
    move |x: &[f64]| Ok(connectivity_weights(sp(k), &Configuration::standard(x.to_vec())?, &EvalOptions::default())?.values[t])
}

const BASE: [f64; 4] = [0.0, 0.7, 1.6, 2.5];

#[test]
fn weights_are_dual_to_the_functionals() {
    for k in [4.5, 5.0, 7.0] {
        for t in 0..2 {
            let f = component(t, k);
            for (s, est) in v_map(&f, sp(k), &BASE, 2).into_iter().enumerate() {
                let want = if s == t { 1.0 } else { 0.0 };
                assert!((est.unwrap().value - want).abs() < 1e-3, "k={k} s={s} t={t}");
            }
        }
    }
}

#[test]
fn meander_matrix_maps_weights_back_to_basis() {
    let k = sp(5.0);
    let cfg = Configuration::standard(vec![0.0, 0.4, 1.1, 1.5, 2.6, 3.0]).unwrap();
    let opts = EvalOptions::default();
    let w = connectivity_weights(k, &cfg, &opts).unwrap();
    let f = basis_values(k, &cfg, &opts).unwrap();
    let m = loop_matrix(3).unwrap().evaluate(fugacity(k));
    for s in 0..f.len() {
        let back: f64 = (0..f.len()).map(|t| m[(s, t)] * w.values[t]).sum();
        assert!((back - f[s]).abs() < 1e-9 * f[s].abs());
    }
    assert!(w.condition_number.is_finite() && w.condition_number >= 1.0);
}

#[test]
fn exceptional_speed_by_perturbation() {
    let cfg = Configuration::standard(vec![0.0, 0.7, 1.6, 2.5]).unwrap();
    let w = connectivity_weights_exceptional(sp(6.0), &cfg, 1e-2, &EvalOptions::default()).unwrap();
    assert_eq!(w.regime, Regime::Exceptional);
    assert!(w.values.iter().all(|v| v.is_finite()));
    // Percolation: the weights sum to the constant basis value.
    let s: f64 = w.values.iter().sum();
    assert!((s - 1.0).abs() < 1e-4, "{w:?}");
    let p = crossing_probabilities(&[1.0, 1.0], &w.values).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));

    let one = Configuration::standard(vec![0.3, 1.9]).unwrap();
    let w = connectivity_weights_exceptional(sp(8.0 / 3.0), &one, 1e-2, &EvalOptions::default()).unwrap();
    let want = 1.6f64.powf(1.0 - 6.0 / (8.0 / 3.0));
    assert!((w.values[0] - want).abs() < 1e-6 * want);
}

#[test]
fn weights_collapse_to_smaller_weights() {
    let k = 5.0;
    let n = 2;
    for (t, d) in enumerate_diagrams(n).into_iter().enumerate() {
        for i in 1..=2 * n - 1 {
            let l = limit_collapse(&component(t, k), i, sp(k), &BASE).unwrap();
            if d.partner(i).unwrap() == i + 1 {
                let rest = d.collapse_arc(i).unwrap();
                assert_eq!(rest.n_pairs(), 1);
                let mut x = BASE.to_vec();
                x.drain(i - 1..i + 1);
                let want = (x[1] - x[0]).powf(1.0 - 6.0 / k);
                assert!((l.value - want).abs() < 1e-4 * want, "t={t} i={i} {l:?} {want}");
            } else {
                assert!(l.value.abs() < 1e-4, "t={t} i={i} {l:?}");
            }
        }
    }
}

#[test]
fn theta_decomposes_into_weights() {
    for k in [5.0, 7.0] {
        let base = Configuration::standard(BASE.to_vec()).unwrap();
        for i in 1..=3 {
            let r = verify_theta_decomposition(1, i, sp(k), &base, &EvalOptions::default());
            assert!(r.failures.is_empty(), "{r:?}");
            assert!(r.discrepancy < 1e-3, "{r:?}");
            assert!(r.weight_discrepancy.unwrap() < 1e-8, "{r:?}");
        }
    }
}
