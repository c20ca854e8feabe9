//! One PASS/FAIL line per acceptance criterion.

use std::time::Instant;

use sleconn::cli::suites::{self, Check};
use sleconn::coulomb::EvalOptions;

type Criterion = (&'static str, Box<dyn Fn() -> Vec<Check>>);

fn main() {
    let opts = EvalOptions::default();
    let criteria: Vec<Criterion> = vec![
        ("meander determinant", Box::new(|| suites::meander_determinant(5, 6, 25))),
        ("rank and multiplicity", Box::new(|| suites::rank_multiplicity(5))),
        ("loop functional images", Box::new(move || suites::loop_functional(&[4.5, 5.0, 6.0, 7.0], &opts))),
        ("kappa = 6 degeneracies", Box::new(move || suites::kappa6(&opts))),
        ("beta identity", Box::new(move || suites::beta_identity(&[4.5, 5.0, 6.0, 7.0], &opts))),
        ("duality", Box::new(move || suites::duality(5.0, &opts))),
        ("frobenius structure", Box::new(move || suites::frobenius(&opts))),
        ("asymptotic predictors", Box::new(suites::predictors)),
        ("closed forms", Box::new(move || suites::closed_form(&opts))),
        ("weight limits and probabilities", Box::new(move || suites::weight_limits(5.0, &opts))),
        ("theta decomposition", Box::new(move || suites::theta(&[5.0, 7.0], &opts))),
        ("pde residuals", Box::new(move || suites::pde(&[5.0, 6.0], 5, &opts))),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let checks = run();
        let ok = !checks.is_empty() && checks.iter().all(|c| c.pass);
        if !ok {
            failed += 1;
        }
        println!("{} {:>2} {name} ({:.1}s)", if ok { "PASS" } else { "FAIL" }, k + 1, start.elapsed().as_secs_f64());
        for c in &checks {
            println!("       {} {}: {:e} <= {:e} {}", if c.pass { "ok " } else { "BAD" }, c.name, c.measured, c.tolerance, c.detail);
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
