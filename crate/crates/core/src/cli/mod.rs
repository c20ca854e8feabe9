//! Command-line front end. Every subcommand produces a [`RunReport`], printed
//! as JSON (default) or CSV.

pub mod suites;

use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::asymptotics::{check_prediction, frobenius_fit, v_map, FitOptions, MergeCase};
use crate::cftdata::{fugacity, is_exceptional, Speed};
use crate::combinatorics::{catalan, enumerate_diagrams, ArcDiagram};
use crate::coulomb::{closed_form_terms, evaluate_f_closed, evaluate_f_with, Configuration, EvalOptions};
use crate::error::Error;
use crate::meander::{
    det_exact, det_log, kernel_basis, loop_matrix_capped, meander_det_exact, meander_det_log, numeric_rank, parse_rational,
    DEFAULT_MAX_N,
};
use crate::weights::{
    connectivity_weights, connectivity_weights_exceptional, crossing_probabilities, theta, verify_theta_decomposition,
};
pub use suites::{Check, Suite};

#[derive(Debug, Parser)]
#[command(name = "sleconn", version, about = "Coulomb gas solutions, meander matrices and connectivity weights")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Emit CSV instead of JSON.
    #[arg(long, global = true, conflicts_with = "json")]
    pub csv: bool,
    /// Emit JSON (the default).
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub imag_tol: f64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Largest accepted number of pairs.
    #[arg(long, global = true, env = "SLECONN_MAX_N", default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Include wall time (breaks bit-identical output).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FugacityArgs {
    /// Loop weight, exact when given as a rational such as `-1/2`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "kappa", required_unless_present = "kappa")]
    pub fugacity: Option<String>,
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PointArgs {
    /// Comma-separated increasing marked points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x: Vec<f64>,
    /// One-based index of the conjugate point; defaults to the last point.
    #[arg(long)]
    pub conjugate: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ElementArgs {
    /// Expected number of pairs; checked against `--x`.
    #[arg(long = "n-pairs", visible_alias = "n")]
    pub n_pairs: Option<usize>,
    /// One-based canonical index of the diagram.
    #[arg(long, conflicts_with = "diagram")]
    pub theta: Option<usize>,
    /// Diagram as a partner list, e.g. "4 3 2 1".
    #[arg(long)]
    pub diagram: Option<String>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// List arc diagrams in canonical order.
    Diagrams {
        #[arg(long = "n-pairs", visible_alias = "n")]
        n_pairs: usize,
    },
    /// Catalan number.
    Catalan {
        #[arg(long = "n-pairs", visible_alias = "n")]
        n_pairs: u32,
    },
    /// Loop-count matrix, its evaluation, determinant and rank.
    Meander {
        #[arg(long = "n-pairs", visible_alias = "n")]
        n_pairs: usize,
        #[command(flatten)]
        loop_weight: FugacityArgs,
    },
    /// Determinant, directly and from the product formula.
    Det {
        #[arg(long = "n-pairs", visible_alias = "n")]
        n_pairs: usize,
        #[command(flatten)]
        loop_weight: FugacityArgs,
    },
    /// Numerical rank against the exceptional-speed prediction.
    Rank {
        #[arg(long = "n-pairs", visible_alias = "n")]
        n_pairs: usize,
        #[command(flatten)]
        loop_weight: FugacityArgs,
    },
    /// Kernel vectors at a zero of the determinant.
    Kernel {
        #[arg(long = "n-pairs", visible_alias = "n")]
        n_pairs: usize,
        #[command(flatten)]
        loop_weight: FugacityArgs,
    },
    /// Evaluate one basis element.
    EvaluateF {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long)]
        kappa: f64,
        #[command(flatten)]
        points: PointArgs,
        /// Divide by the fugacity.
        #[arg(long)]
        reduced: bool,
    },
    /// Closed form at kappa = 4/r.
    ClosedForm {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long)]
        r: u32,
        #[command(flatten)]
        points: PointArgs,
        /// Also list the individual series terms.
        #[arg(long)]
        terms: bool,
    },
    /// Images of a basis element under all limit functionals.
    VMap {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long)]
        kappa: f64,
        #[command(flatten)]
        points: PointArgs,
        #[arg(long)]
        reduced: bool,
    },
    /// Frobenius fit of a basis element as `(x_i, x_i+1)` collapses.
    Frobenius {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        kappa: f64,
        #[command(flatten)]
        points: PointArgs,
        #[arg(long)]
        reduced: bool,
        #[arg(long)]
        force_log: bool,
    },
    /// Asymptotic prefactor prediction against quadrature (cases 2, 3, 4).
    Predict {
        #[arg(long)]
        case: u32,
        #[arg(long, default_value_t = 6.0)]
        kappa: f64,
    },
    /// Connectivity weights at one configuration.
    Weights {
        #[arg(long)]
        kappa: f64,
        #[command(flatten)]
        points: PointArgs,
        /// Speed offset for the exceptional-speed extrapolation.
        #[arg(long, default_value_t = 1e-2)]
        h: f64,
    },
    /// Crossing probabilities from coefficients and the weights.
    Probs {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        coeffs: Vec<f64>,
        #[arg(long)]
        kappa: f64,
        #[command(flatten)]
        points: PointArgs,
    },
    /// Combination with an inserted arc, and its decomposition.
    Theta {
        /// One-based index of the smaller diagram.
        #[arg(long)]
        sigma: usize,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        kappa: f64,
        #[command(flatten)]
        points: PointArgs,
        /// Also compare functional images with the expected decomposition.
        #[arg(long)]
        verify: bool,
    },
    /// Run named verification suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Keep only the checks for this number of pairs.
        #[arg(long = "n-pairs", visible_alias = "n")]
        n_pairs: Option<usize>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub kappa: Option<f64>,
    pub fugacity: Option<f64>,
    pub n_pairs: Option<usize>,
    pub rel_tol: f64,
    pub imag_tol: f64,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub provenance: Provenance,
    pub outputs: Value,
    pub error_estimates: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// Why a run did not produce a report.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] Error),
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Produced {
    outputs: Value,
    errors: Value,
    checks: Vec<Check>,
    kappa: Option<f64>,
    loop_weight: Option<f64>,
    n_pairs: Option<usize>,
    table: Option<Table>,
}

impl Produced {
    fn new(outputs: Value) -> Self {
        Produced { outputs, errors: Value::Null, checks: Vec::new(), kappa: None, loop_weight: None, n_pairs: None, table: None }
    }
    fn errors(mut self, e: Value) -> Self {
        self.errors = e;
        self
    }
    fn kappa(mut self, k: f64) -> Self {
        self.kappa = Some(k);
        self
    }
    fn at(mut self, n: f64, k: Option<f64>) -> Self {
        self.loop_weight = Some(n);
        self.kappa = k;
        self
    }
    fn pairs(mut self, n: usize) -> Self {
        self.n_pairs = Some(n);
        self
    }
    fn table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }
}

/// Plot-ready rows for `--csv`.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn speed(k: f64) -> Outcome<Speed> {
    Ok(Speed::new(k)?)
}

fn cap(n: usize, max_n: usize) -> Outcome<()> {
    if n > max_n {
        return Err(Error::SizeCap { requested: n, cap: max_n }.into());
    }
    Ok(())
}

fn configuration(p: &PointArgs, max_n: usize) -> Outcome<Configuration> {
    if !p.x.len().is_multiple_of(2) || p.x.is_empty() {
        return Err(Failure::Usage(format!("--x needs an even number of points, got {}", p.x.len())));
    }
    cap(p.x.len() / 2, max_n)?;
    Ok(Configuration::new(p.x.clone(), p.conjugate.unwrap_or(p.x.len()))?)
}

fn element(e: &ElementArgs, n_pairs: usize) -> Outcome<ArcDiagram> {
    if let Some(n) = e.n_pairs {
        if n != n_pairs {
            return Err(Failure::Usage(format!("--n-pairs {n} but --x has {} pairs", n_pairs)));
        }
    }
    let d = match (&e.theta, &e.diagram) {
        (Some(t), None) => {
            let all = enumerate_diagrams(n_pairs);
            let idx = t.checked_sub(1).filter(|&k| k < all.len());
            idx.map(|k| all[k].clone()).ok_or(Error::IndexOutOfRange { index: *t, points: all.len() })?
        }
        (None, Some(s)) => s.parse::<ArcDiagram>()?,
        _ => return Err(Failure::Usage("give exactly one of --theta or --diagram".into())),
    };
    if d.n_pairs() != n_pairs {
        return Err(Failure::Usage(format!("diagram {d} does not match {n_pairs} pairs")));
    }
    Ok(d)
}

/// Fugacity as an exact rational when possible, with its float value.
fn loop_weight(f: &FugacityArgs) -> Outcome<(Option<num_rational::BigRational>, f64, Option<f64>)> {
    match (&f.fugacity, f.kappa) {
        (Some(s), _) => {
            let exact = parse_rational(s).ok();
            let value = match &exact {
                Some(q) => num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN),
                None => s.parse::<f64>().map_err(|_| Failure::Usage(format!("bad fugacity {s}")))?,
            };
            Ok((exact, value, None))
        }
        (None, Some(k)) => Ok((None, fugacity(speed(k)?), Some(k))),
        (None, None) => Err(Failure::Usage("give --fugacity or --kappa".into())),
    }
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn diagram_table(values: &[(String, f64)], header: &str) -> Table {
    Table {
        header: vec!["index".into(), "diagram".into(), header.into()],
        rows: values.iter().enumerate().map(|(k, (d, v))| vec![(k + 1).to_string(), d.clone(), format!("{v:e}")]).collect(),
    }
}

fn execute(cmd: &Command, g: &GlobalArgs) -> Outcome<Produced> {
    let opts = EvalOptions { rel_tol: g.rel_tol, imag_tol: g.imag_tol, ..EvalOptions::default() };
    Ok(match cmd {
        Command::Diagrams { n_pairs } => {
            cap(*n_pairs, g.max_n)?;
            let list: Vec<String> = enumerate_diagrams(*n_pairs).iter().map(|d| d.to_string()).collect();
            let table = Table {
                header: vec!["index".into(), "diagram".into()],
                rows: list.iter().enumerate().map(|(k, d)| vec![(k + 1).to_string(), d.clone()]).collect(),
            };
            Produced::new(json!({ "count": list.len(), "diagrams": list })).pairs(*n_pairs).table(table)
        }
        Command::Catalan { n_pairs } => Produced::new(json!({ "catalan": catalan(*n_pairs)? })).pairs(*n_pairs as usize),
        Command::Meander { n_pairs, loop_weight: lw } => {
            let (exact, n, k) = loop_weight(lw)?;
            let m = loop_matrix_capped(*n_pairs, g.max_n)?;
            let values = m.evaluate(n);
            let mut out = json!({
                "exponents": m.exponents,
                "matrix": matrix_rows(&values),
                "det": det_log(&values).to_f64(),
                "rank": numeric_rank(&values),
                "size": m.size(),
            });
            if let Some(q) = &exact {
                out["det_exact"] = json!(det_exact(&m.evaluate_exact(q)).to_string());
            }
            let table = Table {
                header: (1..=m.size()).map(|c| format!("c{c}")).collect(),
                rows: matrix_rows(&values).iter().map(|r| r.iter().map(|v| format!("{v:e}")).collect()).collect(),
            };
            Produced::new(out).pairs(*n_pairs).table(table).at(n, k)
        }
        Command::Det { n_pairs, loop_weight: lw } => {
            let (exact, n, k) = loop_weight(lw)?;
            let m = loop_matrix_capped(*n_pairs, g.max_n)?;
            let direct = det_log(&m.evaluate(n));
            let product = meander_det_log(*n_pairs, n);
            let mut out = json!({
                "direct": direct.to_f64(),
                "product": product.to_f64(),
                "relative_difference": direct.relative_difference(product),
            });
            if let Some(q) = &exact {
                let a = det_exact(&m.evaluate_exact(q));
                let b = meander_det_exact(*n_pairs, q);
                out["direct_exact"] = json!(a.to_string());
                out["product_exact"] = json!(b.to_string());
                out["exact_equal"] = json!(a == b);
            }
            Produced::new(out).pairs(*n_pairs).at(n, k)
        }
        Command::Rank { n_pairs, loop_weight: lw } => {
            let (_, n, k) = loop_weight(lw)?;
            let m = loop_matrix_capped(*n_pairs, g.max_n)?;
            let rank = numeric_rank(&m.evaluate(n));
            let mut out = json!({ "rank": rank, "size": m.size() });
            if let Some(k) = k {
                out["predicted"] = json!(crate::meander::rank_at(*n_pairs, speed(k)?)?);
                out["exceptional"] = json!(is_exceptional(speed(k)?, *n_pairs));
            }
            Produced::new(out).pairs(*n_pairs).at(n, k)
        }
        Command::Kernel { n_pairs, loop_weight: lw } => {
            let (_, n, k) = loop_weight(lw)?;
            cap(*n_pairs, g.max_n)?;
            let basis: Vec<Vec<f64>> = kernel_basis(*n_pairs, n)?.iter().map(|v| v.iter().copied().collect()).collect();
            Produced::new(json!({ "dimension": basis.len(), "vectors": basis })).pairs(*n_pairs).at(n, k)
        }
        Command::EvaluateF { element: e, kappa, points, reduced } => {
            let cfg = configuration(points, g.max_n)?;
            let d = element(e, cfg.n_pairs())?;
            let o = if *reduced { opts.reduced() } else { opts };
            let r = evaluate_f_with(&d, speed(*kappa)?, &cfg, &o)?;
            Produced::new(json!({ "diagram": d.to_string(), "value": r.value, "imag_residual": r.imag_residual, "evaluations": r.evaluations }))
                .errors(json!({ "value": r.abs_error_estimate }))
                .kappa(*kappa)
                .pairs(cfg.n_pairs())
        }
        Command::ClosedForm { element: e, r, points, terms } => {
            let cfg = configuration(points, g.max_n)?;
            let d = element(e, cfg.n_pairs())?;
            let value = evaluate_f_closed(&d, *r, &cfg)?;
            let mut out = json!({ "diagram": d.to_string(), "value": value, "r": r });
            if *terms {
                let list: Vec<Value> = closed_form_terms(&d, *r, &cfg)?
                    .iter()
                    .map(|t| json!({ "assignment": t.assignment(), "sign": t.sign(), "coefficient": t.taylor_coefficient() }))
                    .collect();
                out["terms"] = Value::Array(list);
            }
            Produced::new(out).kappa(4.0 / *r as f64).pairs(cfg.n_pairs())
        }
        Command::VMap { element: e, kappa, points, reduced } => {
            let cfg = configuration(points, g.max_n)?;
            let d = element(e, cfg.n_pairs())?;
            let k = speed(*kappa)?;
            let o = if *reduced { opts.reduced() } else { opts };
            let conj = cfg.conjugate();
            let f = |x: &[f64]| Ok(evaluate_f_with(&d, k, &Configuration::new(x.to_vec(), conj)?, &o)?.value);
            let est = v_map(&f, k, cfg.points(), cfg.n_pairs()).into_iter().collect::<crate::Result<Vec<_>>>()?;
            let names: Vec<String> = enumerate_diagrams(cfg.n_pairs()).iter().map(|d| d.to_string()).collect();
            let rows: Vec<(String, f64)> = names.iter().cloned().zip(est.iter().map(|e| e.value)).collect();
            Produced::new(json!({ "diagram": d.to_string(), "classes": names, "values": est.iter().map(|e| e.value).collect::<Vec<_>>() }))
                .errors(json!({ "values": est.iter().map(|e| e.error).collect::<Vec<_>>() }))
                .kappa(*kappa)
                .pairs(cfg.n_pairs())
                .table(diagram_table(&rows, "image"))
        }
        Command::Frobenius { element: e, i, kappa, points, reduced, force_log } => {
            let cfg = configuration(points, g.max_n)?;
            let d = element(e, cfg.n_pairs())?;
            let k = speed(*kappa)?;
            let o = if *reduced { opts.reduced() } else { opts };
            let conj = cfg.conjugate();
            let f = |x: &[f64]| Ok(evaluate_f_with(&d, k, &Configuration::new(x.to_vec(), conj)?, &o)?.value);
            let fit = frobenius_fit(&f, *i, k, cfg.points(), &FitOptions { force_log: *force_log, ..FitOptions::default() })?;
            Produced::new(json!({
                "diagram": d.to_string(),
                "a0": fit.a0, "a1": fit.a1, "b0": fit.b0, "log_b0": fit.log_b0,
                "fitted_exponents": fit.fitted_exponents,
                "expected_exponents": [1.0 - 6.0 / kappa, 2.0 / kappa],
                "log_significance": fit.log_significance(),
                "residual": fit.residual, "condition": fit.condition,
            }))
            .errors(json!({ "a0": fit.a0_err, "a1": fit.a1_err, "b0": fit.b0_err, "log_b0": fit.log_b0_err }))
            .kappa(*kappa)
            .pairs(cfg.n_pairs())
        }
        Command::Predict { case, kappa } => {
            let c = check_prediction(MergeCase::from_number(*case)?, speed(*kappa)?)?;
            Produced::new(json!({ "case": case, "predicted": c.predicted, "numeric": c.numeric, "ratio": c.ratio }))
                .errors(json!({ "numeric": c.numeric_error }))
                .kappa(*kappa)
        }
        Command::Weights { kappa, points, h } => {
            let cfg = configuration(points, g.max_n)?;
            let k = speed(*kappa)?;
            let w = if is_exceptional(k, cfg.n_pairs()).is_some() {
                connectivity_weights_exceptional(k, &cfg, *h, &opts)?
            } else {
                connectivity_weights(k, &cfg, &opts)?
            };
            let names: Vec<String> = enumerate_diagrams(cfg.n_pairs()).iter().map(|d| d.to_string()).collect();
            let rows: Vec<(String, f64)> = names.iter().cloned().zip(w.values.iter().copied()).collect();
            Produced::new(json!({
                "diagrams": names, "values": w.values, "regime": w.regime,
                "condition_number": w.condition_number, "all_positive": w.all_positive(),
            }))
            .errors(json!({ "values": w.errors }))
            .kappa(*kappa)
            .pairs(cfg.n_pairs())
            .table(diagram_table(&rows, "weight"))
        }
        Command::Probs { coeffs, kappa, points } => {
            let cfg = configuration(points, g.max_n)?;
            let k = speed(*kappa)?;
            let w = if is_exceptional(k, cfg.n_pairs()).is_some() {
                connectivity_weights_exceptional(k, &cfg, 1e-2, &opts)?
            } else {
                connectivity_weights(k, &cfg, &opts)?
            };
            let p = crossing_probabilities(coeffs, &w.values)?;
            let names: Vec<String> = enumerate_diagrams(cfg.n_pairs()).iter().map(|d| d.to_string()).collect();
            let rows: Vec<(String, f64)> = names.iter().cloned().zip(p.iter().copied()).collect();
            Produced::new(json!({ "diagrams": names, "probabilities": p, "weights": w.values, "sum": p.iter().sum::<f64>() }))
                .kappa(*kappa)
                .pairs(cfg.n_pairs())
                .table(diagram_table(&rows, "probability"))
        }
        Command::Theta { sigma, i, kappa, points, verify } => {
            let cfg = configuration(points, g.max_n)?;
            let k = speed(*kappa)?;
            let value = theta(*sigma, *i, k, &cfg, &opts)?;
            let mut out = json!({ "value": value });
            let mut checks = Vec::new();
            if *verify {
                let r = verify_theta_decomposition(*sigma, *i, k, &cfg, &opts);
                checks.push(Check {
                    name: "theta decomposition".into(),
                    pass: r.failures.is_empty() && r.discrepancy <= 1e-3,
                    measured: r.discrepancy,
                    tolerance: 1e-3,
                    detail: r.failures.join("; "),
                });
                out["decomposition"] = serde_json::to_value(&r).map_err(|e| Failure::Usage(e.to_string()))?;
            }
            let mut p = Produced::new(out).kappa(*kappa).pairs(cfg.n_pairs());
            p.checks = checks;
            p
        }
        Command::Verify { suite, n_pairs } => {
            let mut checks = suite.run(&opts);
            if let Some(n) = n_pairs {
                let tag = format!("N={n}");
                checks.retain(|c| !c.name.contains("N=") || c.name.split_whitespace().any(|w| w == tag));
            }
            let passed = checks.iter().filter(|c| c.pass).count();
            let mut p = Produced::new(json!({ "suite": suite, "passed": passed, "total": checks.len() }));
            p.table = Some(Table {
                header: vec!["check".into(), "pass".into(), "measured".into(), "tolerance".into()],
                rows: checks
                    .iter()
                    .map(|c| vec![c.name.clone(), c.pass.to_string(), format!("{:e}", c.measured), format!("{:e}", c.tolerance)])
                    .collect(),
            });
            p.n_pairs = *n_pairs;
            p.checks = checks;
            p
        }
    })
}

fn command_name(cmd: &Command) -> String {
    match serde_json::to_value(cmd) {
        Ok(Value::Object(m)) => m.get("command").and_then(Value::as_str).unwrap_or_default().to_string(),
        _ => String::new(),
    }
}

/// Run one parsed invocation.
pub fn run(cli: &Cli) -> Outcome<(RunReport, Option<Table>)> {
    let start = Instant::now();
    let produced = execute(&cli.command, &cli.global)?;
    let mut inputs = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    if let Value::Object(m) = &mut inputs {
        m.remove("command");
    }
    let report = RunReport {
        command: command_name(&cli.command),
        inputs,
        provenance: Provenance {
            kappa: produced.kappa,
            fugacity: produced.loop_weight.or_else(|| produced.kappa.and_then(|k| Speed::new(k).ok()).map(fugacity)),
            n_pairs: produced.n_pairs,
            rel_tol: cli.global.rel_tol,
            imag_tol: cli.global.imag_tol,
            version: env!("CARGO_PKG_VERSION"),
        },
        pass: produced.checks.iter().all(|c| c.pass),
        outputs: produced.outputs,
        error_estimates: produced.errors,
        checks: produced.checks,
        wall_time_s: cli.global.timing.then(|| start.elapsed().as_secs_f64()),
    };
    Ok((report, produced.table))
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&join(prefix, k), x, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(k, x)| flatten(&join(prefix, &(k + 1).to_string()), x, rows)),
        Value::String(s) => rows.push(vec![prefix.to_string(), s.clone()]),
        other => rows.push(vec![prefix.to_string(), other.to_string()]),
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV rendering: the command's table when it has one, otherwise flattened outputs.
pub fn to_csv(report: &RunReport, table: Option<&Table>) -> String {
    let (header, rows) = match table {
        Some(t) => (t.header.clone(), t.rows.clone()),
        None => {
            let mut rows = Vec::new();
            flatten("", &report.outputs, &mut rows);
            (vec!["key".to_string(), "value".to_string()], rows)
        }
    };
    let mut out = String::new();
    for r in std::iter::once(&header).chain(&rows) {
        out.push_str(&r.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn error_json(f: &Failure) -> Value {
    let kind = match f {
        Failure::Usage(_) => "Usage".to_string(),
        Failure::Compute(e) => format!("{e:?}").split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string(),
    };
    let mut m = Map::new();
    m.insert("kind".into(), json!(kind));
    m.insert("message".into(), json!(f.to_string()));
    json!({ "error": m })
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(j) = cli.global.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match run(&cli) {
        Ok((report, table)) => {
            if cli.global.csv {
                print!("{}", to_csv(&report, table.as_ref()));
            } else {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            }
            if report.pass {
                0
            } else {
                1
            }
        }
        Err(f) => {
            eprintln!("{}", error_json(&f));
            match f {
                Failure::Usage(_) => 2,
                Failure::Compute(_) => 1,
            }
        }
    }
}
