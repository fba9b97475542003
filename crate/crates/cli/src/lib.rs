//! Command-line front end for `thetanull`.
//!
//! Every command returns an [`Outcome`] holding the exit code and the text for
//! standard output and the diagnostic stream; `main` only prints it. Exit
//! codes: 0 success, 1 failed check, 2 usage or parse error, 3 domain error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod input;
pub mod suites;

use std::fmt::Write as _;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thetanull::fubini::{
    equivalent_forms_residual, map_form, nondescent_report, HermitianForm, HermitianFormRecord, MapId, NondescentReport,
};
use thetanull::nullwerte::{
    theta_null_prime, theta_null_second, theta_null_sj, theta_null_squared, ProjectivePoint, ProjectivePointRecord,
};
use thetanull::num_complex::Complex64;
use thetanull::theta::{parse_int_vector, theta_char_eval, theta_second_order_eval, Characteristic, Precision};
use thiserror::Error;

use crate::input::{parse_scalar, parse_siegel, parse_vector};
use crate::suites::{run_suite, Suite, SuiteReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// Environment variable overriding the default series tolerance.
pub const TOL_ENV: &str = "THETA_TOL";
pub const DEFAULT_TOL: f64 = 1e-12;
pub const TOL_RANGE: (f64, f64) = (1e-15, 1e-6);

/// Pass threshold of `form --check-equivalence`.
pub const FORM_EQUIVALENCE_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_USAGE,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "thetanull",
    version,
    about = "Theta constants, Thetanullwert maps and their Fubini-Study forms"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate theta[eps; eps'](Z; z), or theta_u(Z; z) with --second-order.
    Eval {
        /// Characteristic "eps|eps'" (digits or comma-separated integers); with
        /// --second-order either "u" or "u|0".
        #[arg(long = "char")]
        characteristic: String,
        /// Period matrix: JSON, a JSON file, or shorthand like "i", "diag(i,2i)".
        #[arg(long)]
        tau: String,
        /// Argument vector as JSON [[re, im], ...]; zero when omitted.
        #[arg(long)]
        z: Option<String>,
        #[arg(long)]
        second_order: bool,
    },
    /// Print a Thetanullwert vector.
    Nullwerte {
        /// One of second, squared, sj, prime.
        #[arg(long)]
        map: String,
        #[arg(long)]
        tau: String,
    },
    /// Run randomized identity suites.
    Verify {
        /// parity, addition, blocks, heat, sj-low, sj-high, veronese or all.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 2)]
        genus: usize,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Residual threshold; defaults to the suite's own threshold.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the normalized Fubini-Study pullback form of a map.
    Form {
        #[arg(long)]
        map: String,
        #[arg(long)]
        tau: String,
        /// Also compare with the paired map on the same side.
        #[arg(long)]
        check_equivalence: bool,
    },
    /// Non-descent report on the slices through diag(y0, P') and diag(P', y0).
    Degeneration {
        #[arg(long)]
        pi_prime: String,
        #[arg(long)]
        y0: String,
    },
}

/// Settings shared by all commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub format: OutputFormat,
}

impl RunConfig {
    /// Reads the tolerance from `env_tol` (the value of [`TOL_ENV`]) if set.
    pub fn new(format: OutputFormat, env_tol: Option<&str>) -> Result<Self, CliError> {
        let tol = match env_tol {
            None => DEFAULT_TOL,
            Some(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Parse(format!("{TOL_ENV}={s:?} is not a number")))?,
        };
        if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
            return Err(CliError::Parse(format!(
                "tolerance {tol:e} outside [{:e}, {:e}]",
                TOL_RANGE.0, TOL_RANGE.1
            )));
        }
        Ok(RunConfig { tol, format })
    }

    pub fn precision(&self) -> Precision {
        Precision::with_tol(self.tol).expect("validated range")
    }
}

/// Exit code and output of one command.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(e: &CliError) -> Self {
        Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

/// Runs a parsed command line; `env_tol` is the value of [`TOL_ENV`].
pub fn run(cli: &Cli, env_tol: Option<&str>) -> Outcome {
    let cfg = match RunConfig::new(cli.format, env_tol) {
        Ok(c) => c,
        Err(e) => return Outcome::error(&e),
    };
    let result = match &cli.command {
        Command::Eval {
            characteristic,
            tau,
            z,
            second_order,
        } => cmd_eval(&cfg, characteristic, tau, z.as_deref(), *second_order),
        Command::Nullwerte { map, tau } => cmd_nullwerte(&cfg, map, tau),
        Command::Verify {
            suite,
            genus,
            samples,
            seed,
            tol,
        } => cmd_verify(&cfg, suite, *genus, *samples, *seed, *tol),
        Command::Form {
            map,
            tau,
            check_equivalence,
        } => cmd_form(&cfg, map, tau, *check_equivalence),
        Command::Degeneration { pi_prime, y0 } => cmd_degeneration(&cfg, pi_prime, y0),
    };
    result.unwrap_or_else(|e| Outcome::error(&e))
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn parse_map(s: &str) -> Result<MapId, CliError> {
    s.parse()
        .map_err(|e: thetanull::fubini::FubiniError| CliError::Parse(e.to_string()))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain values serialize");
    s.push('\n');
    s
}

fn pair(c: Complex64) -> Value {
    json!([c.re, c.im])
}

pub fn cmd_eval(
    cfg: &RunConfig,
    characteristic: &str,
    tau: &str,
    z: Option<&str>,
    second_order: bool,
) -> Result<Outcome, CliError> {
    let parse_err = |e: thetanull::theta::ThetaError| CliError::Parse(e.to_string());
    let ch: Characteristic = if second_order {
        let (u, rest) = characteristic.split_once('|').unwrap_or((characteristic, ""));
        let u = parse_int_vector(u).map_err(parse_err)?;
        if !rest.is_empty() && parse_int_vector(rest).map_err(parse_err)?.iter().any(|&v| v != 0) {
            return Err(CliError::Parse("second-order mode takes \"u\" or \"u|0\"".into()));
        }
        Characteristic::new(u.clone(), vec![0; u.len()]).map_err(parse_err)?
    } else {
        characteristic.parse().map_err(parse_err)?
    };
    let z_mat = parse_siegel(tau)?;
    let g = z_mat.genus();
    let w = match z {
        Some(s) => parse_vector(s)?,
        None => vec![Complex64::new(0.0, 0.0); g],
    };
    if ch.genus() != g || w.len() != g {
        return Err(CliError::Domain(format!(
            "genus {g} needs a characteristic and z of length {g}, got {} and {}",
            ch.genus(),
            w.len()
        )));
    }
    let prec = cfg.precision();
    let v = if second_order {
        theta_second_order_eval(ch.eps(), &z_mat, &w, &prec)
    } else {
        theta_char_eval(&ch, &z_mat, &w, &prec)
    }
    .map_err(domain)?;
    let label = if second_order {
        format!("u={}", Characteristic::new(ch.eps().to_vec(), vec![0; g]).unwrap())
    } else {
        ch.to_string()
    };
    let out = match cfg.format {
        OutputFormat::Json => pretty(&json!({
            "char": ch.to_string(),
            "second_order": second_order,
            "value": pair(v.value),
            "radius": v.radius,
            "terms": v.terms,
        })),
        OutputFormat::Csv => format!(
            "char,re,im,radius,terms\n\"{}\",{:e},{:e},{:e},{}\n",
            ch, v.value.re, v.value.im, v.radius, v.terms
        ),
        OutputFormat::Text => format!(
            "{label}\nvalue  {:e} {:+e}i\nradius {:e}\nterms  {}\n",
            v.value.re, v.value.im, v.radius, v.terms
        ),
    };
    Ok(Outcome::ok(out))
}

fn render_point(cfg: &RunConfig, map: MapId, p: &ProjectivePoint) -> String {
    match cfg.format {
        OutputFormat::Json => {
            let rec = ProjectivePointRecord::from(p);
            pretty(&serde_json::to_value(rec).expect("record serializes"))
        }
        OutputFormat::Csv => {
            let mut s = String::from("label,re,im\n");
            for (l, c) in p.labels().iter().zip(p.coords()) {
                writeln!(s, "\"{l}\",{:e},{:e}", c.re, c.im).unwrap();
            }
            s
        }
        OutputFormat::Text => {
            let mut s = format!("{map} ({} coordinates)\n", p.len());
            for (l, c) in p.labels().iter().zip(p.coords()) {
                writeln!(s, "{l:<12} {:e} {:+e}i", c.re, c.im).unwrap();
            }
            s
        }
    }
}

pub fn cmd_nullwerte(cfg: &RunConfig, map: &str, tau: &str) -> Result<Outcome, CliError> {
    let map = parse_map(map)?;
    let z = parse_siegel(tau)?;
    let prec = cfg.precision();
    let p = match map {
        MapId::Second => theta_null_second(&z, &prec),
        MapId::Squared => theta_null_squared(&z, &prec),
        MapId::Sj => theta_null_sj(&z, &prec),
        MapId::Prime => theta_null_prime(&z, &prec),
    }
    .map_err(domain)?;
    Ok(Outcome::ok(render_point(cfg, map, &p)))
}

pub fn cmd_verify(
    cfg: &RunConfig,
    suite: &str,
    genus: usize,
    samples: usize,
    seed: u64,
    threshold: Option<f64>,
) -> Result<Outcome, CliError> {
    if genus == 0 {
        return Err(CliError::Parse("--genus must be at least 1".into()));
    }
    if let Some(t) = threshold {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Parse(format!("--tol must be positive, got {t}")));
        }
    }
    let mut stderr = String::new();
    let selected: Vec<Suite> = if suite == "all" {
        Suite::ALL
            .into_iter()
            .filter(|s| {
                let keep = genus >= s.min_genus();
                if !keep {
                    writeln!(stderr, "skipping {s}: needs genus >= {}", s.min_genus()).unwrap();
                }
                keep
            })
            .collect()
    } else {
        vec![suite.parse()?]
    };
    let prec = cfg.precision();
    let reports = selected
        .into_iter()
        .map(|s| run_suite(s, genus, samples, seed, threshold, &prec))
        .collect::<Result<Vec<_>, _>>()?;
    let passed: usize = reports.iter().map(|r| r.passed).sum();
    let total: usize = reports.iter().map(|r| r.samples.len()).sum();
    let ok = passed == total;
    let status = if ok {
        format!("PASS {passed}/{total}")
    } else {
        format!("FAIL {passed}/{total} passed")
    };

    let stdout = match cfg.format {
        OutputFormat::Json => pretty(&json!({
            "status": if ok { "PASS" } else { "FAIL" },
            "passed": passed,
            "total": total,
            "suites": reports,
        })),
        OutputFormat::Csv => {
            let mut s = String::from("suite,sample,genus,residual,threshold,pass\n");
            for r in &reports {
                for x in &r.samples {
                    writeln!(
                        s,
                        "{},{},{},{:e},{:e},{}",
                        x.suite, x.index, x.genus, x.residual, r.threshold, x.pass
                    )
                    .unwrap();
                }
            }
            writeln!(stderr, "{status}").unwrap();
            s
        }
        OutputFormat::Text => render_verify_text(&reports, &status),
    };
    Ok(Outcome {
        code: if ok { EXIT_OK } else { EXIT_CHECK_FAILED },
        stdout,
        stderr,
    })
}

fn render_verify_text(reports: &[SuiteReport], status: &str) -> String {
    let mut s = String::new();
    for r in reports {
        for x in &r.samples {
            writeln!(
                s,
                "{} sample {} genus {} residual {:.3e} {}",
                x.suite,
                x.index,
                x.genus,
                x.residual,
                if x.pass { "ok" } else { "FAIL" }
            )
            .unwrap();
        }
        writeln!(
            s,
            "{}: {} {}/{} (max residual {:.3e}, threshold {:e})",
            r.suite,
            if r.all_pass() { "PASS" } else { "FAIL" },
            r.passed,
            r.samples.len(),
            r.max_residual,
            r.threshold
        )
        .unwrap();
    }
    writeln!(s, "{status}").unwrap();
    s
}

fn label(l: (usize, usize)) -> String {
    format!("({},{})", l.0, l.1)
}

fn render_form(
    cfg: &RunConfig,
    map: MapId,
    form: &HermitianForm,
    equivalence: Option<(MapId, f64)>,
) -> (String, String) {
    let side = format!("{:?}", map.side()).to_lowercase();
    match cfg.format {
        OutputFormat::Json => {
            let eq = equivalence.map(|(partner, r)| {
                json!({
                    "side": side,
                    "partner": partner.to_string(),
                    "residual": r,
                    "threshold": FORM_EQUIVALENCE_THRESHOLD,
                    "pass": r <= FORM_EQUIVALENCE_THRESHOLD,
                })
            });
            let v = json!({
                "map": map.to_string(),
                "normalization": map.normalization(),
                "form": serde_json::to_value(HermitianFormRecord::from(form)).expect("record serializes"),
                "equivalence": eq,
            });
            (pretty(&v), String::new())
        }
        OutputFormat::Csv => {
            let mut s = String::from("row,col,re,im\n");
            for (a, &la) in form.coord_labels.iter().enumerate() {
                for (b, &lb) in form.coord_labels.iter().enumerate() {
                    let h = form.entries[(a, b)];
                    writeln!(s, "\"{}\",\"{}\",{:e},{:e}", label(la), label(lb), h.re, h.im).unwrap();
                }
            }
            let err = equivalence
                .map(|(partner, r)| format!("equivalence {side} {map}~{partner} residual {r:e}\n"))
                .unwrap_or_default();
            (s, err)
        }
        OutputFormat::Text => {
            let mut s = format!(
                "{map} form, normalization {:e}, genus {}\n",
                map.normalization(),
                form.genus
            );
            for (a, &la) in form.coord_labels.iter().enumerate() {
                write!(s, "{:<7}", label(la)).unwrap();
                for b in 0..form.coord_labels.len() {
                    let h = form.entries[(a, b)];
                    write!(s, " {:e} {:+e}i", h.re, h.im).unwrap();
                }
                s.push('\n');
            }
            if let Some((partner, r)) = equivalence {
                writeln!(
                    s,
                    "equivalence {side} {map}~{partner} residual {r:.3e} {}",
                    if r <= FORM_EQUIVALENCE_THRESHOLD { "ok" } else { "FAIL" }
                )
                .unwrap();
            }
            (s, String::new())
        }
    }
}

pub fn cmd_form(cfg: &RunConfig, map: &str, tau: &str, check_equivalence: bool) -> Result<Outcome, CliError> {
    let map = parse_map(map)?;
    let z = parse_siegel(tau)?;
    let prec = cfg.precision();
    let form = map_form(map, &z, &prec).map_err(domain)?;
    let equivalence = if check_equivalence {
        let side = map.side();
        let (a, b) = side.maps();
        let partner = if a == map { b } else { a };
        Some((partner, equivalent_forms_residual(&z, side, &prec).map_err(domain)?))
    } else {
        None
    };
    let failed = equivalence.is_some_and(|(_, r)| !(r <= FORM_EQUIVALENCE_THRESHOLD));
    let (stdout, stderr) = render_form(cfg, map, &form, equivalence);
    Ok(Outcome {
        code: if failed { EXIT_CHECK_FAILED } else { EXIT_OK },
        stdout,
        stderr,
    })
}

fn report_rows(r: &NondescentReport) -> Vec<(&'static str, String)> {
    vec![
        ("genus", r.genus.to_string()),
        ("y0_re", format!("{:e}", r.y0[0])),
        ("y0_im", format!("{:e}", r.y0[1])),
        ("first_slice_norm", format!("{:e}", r.first_slice_norm)),
        ("last_slice_norm", format!("{:e}", r.last_slice_norm)),
        ("first_slice_form", format!("{:e}", r.first_slice_form)),
        ("last_slice_form", format!("{:e}", r.last_slice_form)),
        ("first_slice_threshold", format!("{:e}", r.first_slice_threshold)),
        ("last_slice_floor", format!("{:e}", r.last_slice_floor)),
        ("swap_error", format!("{:e}", r.swap_error)),
        ("swap_tolerance", format!("{:e}", r.swap_tolerance)),
        ("swap_exchanges_slices", r.swap_exchanges_slices.to_string()),
        ("first_slice_vanishes", r.first_slice_vanishes.to_string()),
        ("last_slice_nonzero", r.last_slice_nonzero.to_string()),
        ("differ", r.differ.to_string()),
    ]
}

pub fn cmd_degeneration(cfg: &RunConfig, pi_prime: &str, y0: &str) -> Result<Outcome, CliError> {
    let pp = parse_siegel(pi_prime)?;
    let y = parse_scalar(y0)?;
    if !(y.im > 0.0) {
        return Err(CliError::Domain(format!(
            "y0 must lie in the upper half plane, got {y}"
        )));
    }
    let report = nondescent_report(&pp, y, &cfg.precision()).map_err(domain)?;
    let stdout = match cfg.format {
        OutputFormat::Json => pretty(&serde_json::to_value(&report).expect("report serializes")),
        OutputFormat::Csv => {
            let mut s = String::from("field,value\n");
            for (k, v) in report_rows(&report) {
                writeln!(s, "{k},{v}").unwrap();
            }
            s
        }
        OutputFormat::Text => {
            let mut s = String::new();
            for (k, v) in report_rows(&report) {
                writeln!(s, "{k:<22} {v}").unwrap();
            }
            s
        }
    };
    Ok(Outcome {
        code: if report.conclusive() {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        },
        stdout,
        stderr: String::new(),
    })
}
