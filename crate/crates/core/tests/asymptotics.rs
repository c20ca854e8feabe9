use sleconn::asymptotics::*;
use sleconn::cftdata::{fugacity, Speed};
use sleconn::combinatorics::{enumerate_diagrams, ArcDiagram};
use sleconn::coulomb::{build_integrand, evaluate_f_with, external_factor, Configuration, EvalOptions, LineIntegral};
use sleconn::meander::loop_matrix;

fn sp(k: f64) -> Speed {
    Speed::new(k).unwrap()
}

fn solution(d: ArcDiagram, k: f64, opts: EvalOptions) -> impl Fn(&[f64]) -> sleconn::Result<f64> + Sync {
    move |x: &[f64]| Ok(evaluate_f_with(&d, sp(k), &Configuration::standard(x.to_vec())?, &opts)?.value)
}

const BASE: [f64; 4] = [0.0, 0.7, 1.6, 2.5];

#[test]
fn v_map_reproduces_meander_columns() {
    for k in [4.5, 5.0, 6.0, 7.0] {
        let m = loop_matrix(2).unwrap().evaluate(fugacity(sp(k)));
        for (t, d) in enumerate_diagrams(2).into_iter().enumerate() {
            let f = solution(d, k, EvalOptions::default());
            let v = v_map(&f, sp(k), &BASE, 2);
            for (s, est) in v.into_iter().enumerate() {
                let est = est.unwrap();
                let want = m[(s, t)];
                assert!((est.value - want).abs() <= 1e-3 * want.abs(), "k={k} s={s} t={t}: {est:?} vs {want}");
            }
        }
    }
}

#[test]
fn zero_function_maps_to_zero() {
    let zero = |_: &[f64]| Ok(0.0);
    for est in v_map(&zero, sp(5.0), &BASE, 2) {
        assert_eq!(est.unwrap().value, 0.0);
    }
}

#[test]
fn collapse_examples() {
    let k = 5.0;
    let n = fugacity(sp(k));
    // Contour on the collapsing interval: n times the one-pair element.
    let d: ArcDiagram = "2 1 4 3".parse().unwrap();
    let l = limit_collapse(&solution(d, k, EvalOptions::default()), 1, sp(k), &BASE).unwrap();
    let one = n * (BASE[3] - BASE[2]).powf(1.0 - 6.0 / k);
    assert!((l.value - n * one).abs() < 1e-6 * one.abs(), "{l:?}");

    // Neither collapsing point touches the contour: the raw integral with the
    // contour on (x_3, x_4) vanishes in the limit.
    let raw = move |x: &[f64]| {
        let cfg = Configuration::standard(x.to_vec())?;
        let spec = build_integrand(&cfg, sp(k))?;
        let li = LineIntegral::new(x, &spec.beta_values(), spec.gamma_value(), &[(3, 4)])?;
        Ok(external_factor(&cfg, sp(k)) * li.evaluate(&Default::default())?.value.re)
    };
    let l = limit_collapse(&raw, 1, sp(k), &BASE).unwrap();
    assert!(l.value.abs() < 1e-6, "{l:?}");
}

#[test]
fn collapse_is_independent_of_the_surviving_point() {
    let k = 5.0;
    let d: ArcDiagram = "4 3 2 1".parse().unwrap();
    let f = solution(d, k, EvalOptions::default());
    let a = limit_collapse(&f, 1, sp(k), &[0.0, 0.7, 1.6, 2.5]).unwrap();
    let b = limit_collapse(&f, 1, sp(k), &[0.9, 1.0, 1.6, 2.5]).unwrap();
    assert!((a.value - b.value).abs() <= 2.0 * (a.error + b.error).max(1e-9 * a.value.abs()), "{a:?} {b:?}");
}

#[test]
fn limit_orders_agree_for_three_pairs() {
    let k = 5.0;
    let base = [0.0, 0.5, 1.2, 1.9, 2.4, 3.0];
    let d: ArcDiagram = "2 1 4 3 6 5".parse().unwrap();
    let f = solution(d.clone(), k, EvalOptions::default());
    let a = apply_sequence(&f, &[1, 1, 1], sp(k), &base).unwrap();
    let b = apply_sequence(&f, &[5, 3, 1], sp(k), &base).unwrap();
    let n = fugacity(sp(k));
    assert!((a.value - n.powi(3)).abs() < 1e-3 * n.powi(3));
    assert!((a.value - b.value).abs() < 1e-3 * a.value.abs(), "{a:?} {b:?}");
}

#[test]
fn predictors_match_quadrature() {
    for case in [MergeCase::Endpoints, MergeCase::OneEnd, MergeCase::Joined] {
        let c = check_prediction(case, sp(6.0)).unwrap();
        assert!((c.ratio - 1.0).abs() < 1e-3, "{case:?}: {c:?}");
    }
}

#[test]
fn sine_ratio_is_inverse_fugacity() {
    let k = 5.0;
    let b = -4.0 / k;
    let betas = [b, b, b, -2.0 - 3.0 * b];
    let x = [0.0, 0.0, 2.0, 3.5];
    let r = predict_case3(&betas, 1, &x).unwrap() / predict_case2(&betas, 1, &x).unwrap();
    assert!((r - 1.0 / fugacity(sp(k))).abs() < 1e-12);
}

fn mixed_geometry(k: f64, opts: EvalOptions) -> impl Fn(&[f64]) -> sleconn::Result<f64> + Sync {
    solution("4 3 2 1".parse().unwrap(), k, opts)
}

#[test]
fn frobenius_mixed_interval() {
    for k in [4.5, 5.0] {
        let fit = frobenius_fit(&mixed_geometry(k, EvalOptions::default()), 1, sp(k), &BASE, &FitOptions::default()).unwrap();
        assert!((fit.fitted_exponents[0] - (1.0 - 6.0 / k)).abs() < 1e-2);
        assert!((fit.fitted_exponents[1] - 2.0 / k).abs() < 1e-2);
        assert!(fit.a0.abs() > 0.0 && fit.b0.abs() > 10.0 * fit.b0_err);
        assert!(fit.a1.abs() < 1e-2 * fit.a0.abs());
    }
}

#[test]
fn frobenius_identity_interval() {
    let k = 5.0;
    let f = solution("2 1 4 3".parse().unwrap(), k, EvalOptions::default());
    let fit = frobenius_fit(&f, 1, sp(k), &BASE, &FitOptions::default()).unwrap();
    assert!(fit.b0.abs() < 1e-3 * fit.a0.abs());
    assert!(fit.a1.abs() < 1e-2 * fit.a0.abs());
}

#[test]
fn frobenius_logarithm() {
    let opts = FitOptions { force_log: true, ..FitOptions::default() };
    let fit = frobenius_fit(&mixed_geometry(5.0, EvalOptions::default()), 1, sp(5.0), &BASE, &opts).unwrap();
    assert!(fit.log_significance().unwrap() < 10.0, "{fit:?}");
    assert!(fit.log_b0.unwrap().abs() <= 1e-3 * fit.b0.abs());

    let k = 8.0 / 3.0;
    let reduced = mixed_geometry(k, EvalOptions::default().reduced());
    let fit = frobenius_fit(&reduced, 1, sp(k), &BASE, &FitOptions::default()).unwrap();
    assert!(fit.log_significance().unwrap() > 10.0, "{fit:?}");
}
