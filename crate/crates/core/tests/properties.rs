use proptest::prelude::*;

use sleconn::cftdata::{basis_prefactor, fugacity, Speed};
use sleconn::combinatorics::{catalan, enumerate_diagrams, loop_count, ArcDiagram};
use sleconn::meander::{det_log, is_positive_definite, loop_matrix, meander_det_log};
use sleconn::quadrature::richardson;
use sleconn::weights::crossing_probabilities;

fn diagram(max_n: usize) -> impl Strategy<Value = ArcDiagram> {
    (1..=max_n).prop_flat_map(|n| {
        let c = catalan(n as u32).unwrap() as usize;
        (0..c).prop_map(move |k| enumerate_diagrams(n)[k].clone())
    })
}

fn diagram_pair(max_n: usize) -> impl Strategy<Value = (ArcDiagram, ArcDiagram)> {
    (1..=max_n).prop_flat_map(|n| {
        let c = catalan(n as u32).unwrap() as usize;
        (0..c, 0..c).prop_map(move |(a, b)| {
            let all = enumerate_diagrams(n);
            (all[a].clone(), all[b].clone())
        })
    })
}

proptest! {
    #[test]
    fn codec_round_trips(d in diagram(6)) {
        prop_assert_eq!(d.to_string().parse::<ArcDiagram>().unwrap(), d);
    }

    #[test]
    fn canonical_index_inverts_enumeration(d in diagram(6)) {
        prop_assert_eq!(&enumerate_diagrams(d.n_pairs())[d.canonical_index()], &d);
    }

    #[test]
    fn partners_are_a_noncrossing_involution(d in diagram(6)) {
        let p = d.partners();
        for (k, &q) in p.iter().enumerate() {
            prop_assert_ne!(q, k + 1);
            prop_assert_eq!(p[q - 1], k + 1);
        }
        let arcs: Vec<_> = d.arcs().collect();
        for &(a, b) in &arcs {
            for &(c, e) in &arcs {
                prop_assert!(!(a < c && c < b && b < e));
            }
        }
    }

    #[test]
    fn insert_then_collapse_is_identity(d in diagram(5), i in 1usize..12) {
        prop_assume!(i <= d.n_points() + 1);
        let bigger = d.insert_arc(i).unwrap();
        prop_assert!(bigger.has_adjacent_arc(i));
        prop_assert_eq!(bigger.collapse_arc(i).unwrap(), d);
    }

    #[test]
    fn chi_map_creates_the_arc(d in diagram(6), i in 1usize..12) {
        prop_assume!(i < d.n_points() && !d.has_adjacent_arc(i));
        prop_assert!(d.chi_map(i).unwrap().has_adjacent_arc(i));
    }

    #[test]
    fn loop_counts_are_symmetric_and_bounded((a, b) in diagram_pair(6)) {
        let l = loop_count(&a, &b).unwrap();
        prop_assert_eq!(l, loop_count(&b, &a).unwrap());
        prop_assert!(l >= 1 && l <= a.n_pairs());
        prop_assert_eq!(l == a.n_pairs(), a == b);
    }

    #[test]
    fn determinant_product_formula(n_pairs in 1usize..=4, n in -3.0f64..3.0) {
        let direct = det_log(&loop_matrix(n_pairs).unwrap().evaluate(n));
        let product = meander_det_log(n_pairs, n);
        // Near a zero both sides are tiny; compare on an absolute scale there.
        let scale = direct.to_f64().abs().max(1e-6);
        prop_assert!((direct.to_f64() - product.to_f64()).abs() <= 1e-8 * scale.max(1.0));
    }

    #[test]
    fn gram_matrix_is_positive_definite_above_two(n_pairs in 1usize..=4, n in 2.01f64..5.0) {
        prop_assert!(is_positive_definite(&loop_matrix(n_pairs).unwrap().evaluate(n)));
    }

    #[test]
    fn fugacity_is_lipschitz(k in 0.5f64..7.9, dk in -1e-6f64..1e-6) {
        let a = fugacity(Speed::new(k).unwrap());
        let b = fugacity(Speed::new(k + dk).unwrap());
        // |dn/dk| = 8 pi |sin(4 pi/k)| / k^2
        prop_assert!((a - b).abs() <= 8.0 * std::f64::consts::PI / (k * k) * dk.abs() + 1e-15);
    }

    #[test]
    fn prefactor_is_continuous_at_odd_points(m in prop::sample::select(vec![3u32, 5]), side in prop::sample::select(vec![-1.0f64, 1.0])) {
        let k0 = 8.0 / m as f64;
        let at = basis_prefactor(Speed::new(k0).unwrap(), 2, 1).unwrap();
        let near = basis_prefactor(Speed::new(k0 + side * 1e-7).unwrap(), 2, 1).unwrap();
        prop_assert!((at - near).abs() <= 1e-4 * at.abs().max(1e-3), "{at} vs {near}");
    }

    #[test]
    fn probabilities_are_normalized(w in prop::collection::vec(0.01f64..10.0, 1..14), a in prop::collection::vec(0.0f64..3.0, 14)) {
        let coeffs = &a[..w.len()];
        prop_assume!(coeffs.iter().any(|&c| c > 0.0));
        let p = crossing_probabilities(coeffs, &w).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn richardson_is_exact_on_polynomials(limit in -5.0f64..5.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
        let v: Vec<f64> = (0..4).map(|k| {
            let h = 0.1 * 0.5f64.powi(k);
            limit + c1 * h + c2 * h * h
        }).collect();
        let (est, _) = richardson(&v, 0.5, &[1.0, 2.0]).unwrap();
        prop_assert!((est - limit).abs() < 1e-10);
    }
}
