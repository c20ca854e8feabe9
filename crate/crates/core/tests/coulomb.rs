use sleconn::cftdata::Speed;
use sleconn::combinatorics::{enumerate_diagrams, ArcDiagram};
use sleconn::coulomb::*;
use sleconn::quadrature::richardson;

fn sp(k: f64) -> Speed {
    Speed::new(k).unwrap()
}

fn six_points() -> Configuration {
    Configuration::standard(vec![0.0, 0.4, 1.1, 1.5, 2.3, 3.0]).unwrap()
}

#[test]
fn percolation_three_pairs_is_one() {
    let cfg = six_points();
    for d in enumerate_diagrams(3) {
        let out = evaluate_f(&d, sp(6.0), &cfg).unwrap();
        assert!((out.value - 1.0).abs() < 1e-8, "{d}: {out:?}");
    }
}

#[test]
fn real_at_sample_speeds() {
    let cfg = six_points();
    for k in [4.5, 5.0, 6.0, 7.0] {
        for d in enumerate_diagrams(3) {
            let out = evaluate_f(&d, sp(k), &cfg).unwrap();
            assert!(out.imag_residual.abs() <= 1e-6 * out.value.abs().max(1.0), "{k} {d}: {out:?}");
        }
    }
}

#[test]
fn conjugate_point_does_not_matter() {
    let x = vec![0.0, 0.3, 0.7, 1.0];
    let last = Configuration::new(x.clone(), 4).unwrap();
    let second = Configuration::new(x, 2).unwrap();
    for d in enumerate_diagrams(2) {
        let a = evaluate_f(&d, sp(5.0), &last).unwrap().value;
        let b = evaluate_f(&d, sp(5.0), &second).unwrap().value;
        assert!((a - b).abs() <= 1e-5 * a.abs(), "{d}: {a} vs {b}");
    }
}

#[test]
fn scaling_covariance() {
    let x = [0.0, 0.3, 0.7, 1.0];
    let k = 5.0;
    let base = Configuration::standard(x.to_vec()).unwrap();
    let d: ArcDiagram = "2 1 4 3".parse().unwrap();
    let f0 = evaluate_f(&d, sp(k), &base).unwrap().value;
    for lambda in [0.5f64, 2.0] {
        let cfg = Configuration::standard(x.iter().map(|v| lambda * v + 0.37).collect()).unwrap();
        let f = evaluate_f(&d, sp(k), &cfg).unwrap().value;
        let expect = -4.0 * (6.0 - k) / (2.0 * k) * lambda.ln();
        assert!((f.ln() - f0.ln() - expect).abs() < 1e-6);
    }
}

fn limit_from_above(d: &ArcDiagram, cfg: &Configuration, k0: f64) -> f64 {
    let hs = [0.04, 0.02, 0.01, 0.005];
    let v: Vec<f64> = hs.iter().map(|h| evaluate_f(d, sp(k0 + h), cfg).unwrap().value).collect();
    richardson(&v, 0.5, &[1.0, 2.0, 3.0]).unwrap().0
}

#[test]
fn closed_form_is_the_limit_at_four() {
    let cfg = Configuration::standard(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    for d in enumerate_diagrams(2) {
        let closed = evaluate_f_closed(&d, 1, &cfg).unwrap();
        let lim = limit_from_above(&d, &cfg, 4.0);
        assert!((closed - lim).abs() < 1e-4 * closed.abs().max(1.0), "{d}: {closed} vs {lim}");
    }
}

#[test]
fn closed_form_three_pairs_at_four() {
    let cfg = six_points();
    for d in enumerate_diagrams(3) {
        let closed = evaluate_f_closed(&d, 1, &cfg).unwrap();
        let lim = limit_from_above(&d, &cfg, 4.0);
        assert!((closed - lim).abs() < 1e-4 * closed.abs().max(1.0), "{d}: {closed} vs {lim}");
    }
}

#[test]
fn closed_form_is_the_limit_at_two() {
    let cfg = Configuration::standard(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    for d in enumerate_diagrams(2) {
        let closed = evaluate_f_closed(&d, 2, &cfg).unwrap();
        let hs = [0.02, 0.01, 0.005, 0.0025];
        let v: Vec<f64> = hs.iter().map(|h| evaluate_f(&d, sp(2.0 + h), &cfg).unwrap().value).collect();
        let lim = richardson(&v, 0.5, &[1.0, 2.0, 3.0]).unwrap().0;
        assert!((closed - lim).abs() < 1e-4 * closed.abs().max(1.0), "{d}: {closed} vs {lim}");
    }
}

#[test]
fn percolation_identity() {
    let (l, r) = kappa6_identity(3, &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!((l / r - 1.0).abs() < 1e-6, "{l} {r}");
    let (l1, r1) = kappa6_identity(2, &[0.0, 1.0, 2.0]).unwrap();
    let (l2, r2) = kappa6_identity(2, &[0.0, 2.0, 4.0]).unwrap();
    assert!((l2 / l1 - r2 / r1).abs() < 1e-9);
}

#[test]
fn null_state_equations_hold() {
    let d: ArcDiagram = "4 3 2 1".parse().unwrap();
    for k in [5.0, 6.0] {
        for x in [[0.0, 0.5, 1.3, 2.0], [-1.0, 0.1, 0.4, 1.9]] {
            let f = |y: &[f64]| Ok(evaluate_f(&d, sp(k), &Configuration::standard(y.to_vec())?)?.value);
            for r in null_state_residuals(f, &x, sp(k)).unwrap() {
                assert!(r.relative() < 1e-3, "{k} {x:?} {r:?}");
            }
            for r in ward_residuals(f, &x, sp(k)).unwrap() {
                assert!(r.relative() < 1e-3, "{k} {x:?} {r:?}");
            }
        }
    }
}
