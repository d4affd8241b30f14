//! Command-line front-end for maximal-intersection ellipse computations.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure.

mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mi_ellipse::intersect::intersection_profile;
use mi_ellipse::oracle;
use mi_ellipse::solver::SolveOptions;
use mi_ellipse::{
    check_mi_position, find_crossings, intersection_area, isotropic_weights, john_ellipse,
    loewner_ellipse, mi_ellipse as solve_mi, mi_family, BodyF64, BodySpec, EllipseF64, EllipseSpec,
    Parity,
};

const DEFAULT_GRID: usize = 2048;

#[derive(Parser)]
#[command(
    name = "mi-ellipse",
    about = "Maximal-intersection, John and Loewner ellipses of centrally symmetric plane convex bodies",
    version
)]
struct Cli {
    /// Significant digits in printed numbers
    #[arg(long, global = true, default_value_t = 17)]
    digits: usize,
    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the resolved configuration and exit
    #[arg(long, global = true)]
    show_config: bool,
    /// Seed for randomized oracles
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BodyArg {
    /// Path to a body JSON file, or the literal `fig1` for the built-in
    /// quartic fixture
    #[arg(long)]
    body: String,
}

#[derive(Subcommand)]
enum Command {
    /// Intersection area of a body and an ellipse
    Area {
        #[command(flatten)]
        body: BodyArg,
        /// Inline ellipse JSON {"t":..,"phi":..,"area":..}
        #[arg(long)]
        ellipse: String,
    },
    /// Boundary crossings with an ellipse (CSV)
    Crossings {
        #[command(flatten)]
        body: BodyArg,
        #[arg(
            long,
            default_value = r#"{"t":0.0,"phi":0.0,"area":3.141592653589793}"#
        )]
        ellipse: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// First/second derivative data of the intersection function (CSV)
    Derivs {
        #[command(flatten)]
        body: BodyArg,
        #[arg(
            long,
            default_value = r#"{"t":0.0,"phi":0.0,"area":3.141592653589793}"#
        )]
        ellipse: String,
    },
    /// Sample the intersection function along the standard family (CSV)
    Profile {
        #[command(flatten)]
        body: BodyArg,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        t_min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t_max: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
    },
    /// Maximal inscribed centered ellipse (JSON)
    John {
        #[command(flatten)]
        body: BodyArg,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Minimal circumscribed centered ellipse (JSON)
    Loewner {
        #[command(flatten)]
        body: BodyArg,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Maximal-intersection ellipse of prescribed area (JSON + CSV)
    Mi {
        #[command(flatten)]
        body: BodyArg,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Family of MI ellipses interpolating between John and Loewner (CSV)
    Family {
        #[command(flatten)]
        body: BodyArg,
        #[arg(long, default_value_t = 9)]
        steps: usize,
    },
    /// Test whether the unit disk is an MI ellipse for the body (JSON)
    CheckPosition {
        #[command(flatten)]
        body: BodyArg,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Balanced isotropic measure on the crossing set (JSON)
    Isotropic {
        #[command(flatten)]
        body: BodyArg,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Brute-force reference computations
    Oracle {
        #[command(subcommand)]
        sub: OracleCommand,
    },
    /// SVG overlay of the body with its John, Loewner and MI ellipses
    Plot {
        #[command(flatten)]
        body: BodyArg,
        /// Area of the MI ellipse to draw; defaults to pi
        #[arg(long, default_value_t = std::f64::consts::PI)]
        lambda: f64,
    },
    /// Built-in quartic fixture: print its JSON or run the position check
    Fig1 {
        #[arg(long)]
        check_position: bool,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Reference intersection area
    Area {
        #[command(flatten)]
        body: BodyArg,
        #[arg(long)]
        ellipse: String,
        /// mc | clip
        #[arg(long, default_value = "mc")]
        method: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Central finite differences of the intersection function
    Derivs {
        #[command(flatten)]
        body: BodyArg,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Exhaustive (t, phi) grid search for the MI ellipse
    Mi {
        #[command(flatten)]
        body: BodyArg,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = -1.5, allow_negative_numbers = true)]
        t_min: f64,
        #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
        t_max: f64,
        #[arg(long, default_value_t = 41)]
        grid: usize,
    },
}

enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }
}

fn input_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn numerical_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MI_ELLIPSE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mi-ellipse: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.show_config {
        let mut s = String::new();
        let _ = writeln!(s, "digits={}", cli.digits);
        let _ = writeln!(s, "seed={}", cli.seed);
        let _ = writeln!(s, "grid={DEFAULT_GRID}");
        let _ = writeln!(s, "area_rtol=1e-8");
        let _ = writeln!(s, "crossing_tol=1e-12");
        let _ = writeln!(s, "solver_tol=1e-7");
        let _ = writeln!(s, "extremal_tol=1e-7");
        let _ = writeln!(s, "position_tol=1e-6");
        let _ = writeln!(
            s,
            "threads={}",
            std::env::var("MI_ELLIPSE_THREADS").unwrap_or_else(|_| "auto".into())
        );
        return emit(&cli.out, &s);
    }
    let digits = cli.digits;
    let out = cli.out.clone();
    match cli.command {
        Command::Area { body, ellipse } => {
            let body = load_body(&body.body)?;
            let e = parse_ellipse(&ellipse)?;
            let a = intersection_area(&body, &e);
            emit(&out, &format!("{}\n", fmt(a, digits)))
        }
        Command::Crossings { body, ellipse, tol } => {
            let body = load_body(&body.body)?;
            let e = parse_ellipse(&ellipse)?;
            let cs = find_crossings(&body, &e, tol).map_err(numerical_err)?;
            let inv = cs
                .frame()
                .inverse()
                .ok_or_else(|| numerical_err("singular frame"))?;
            let mut s = String::from("theta,xi,parity,alpha\n");
            for c in cs.crossings() {
                let original = inv.apply(c.point());
                let parity = match c.parity {
                    Parity::Enter => "enter",
                    Parity::Exit => "exit",
                };
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    fmt(original.angle(), digits),
                    fmt(c.xi, digits),
                    parity,
                    fmt(c.alpha, digits)
                );
            }
            emit(&out, &s)
        }
        Command::Derivs { body, ellipse } => {
            let body = load_body(&body.body)?;
            let e = parse_ellipse(&ellipse)?;
            let cs = find_crossings(&body, &e, 1e-13).map_err(numerical_err)?;
            let d1 = mi_ellipse::deriv1(&cs).map_err(numerical_err)?;
            let d2 = mi_ellipse::deriv2(&cs).map_err(numerical_err)?;
            let profile = mi_ellipse::pair_profile(&cs).map_err(numerical_err)?;
            let bound = mi_ellipse::deriv2_lower_bound(&profile);
            let d = mi_ellipse::residual_d(&cs).map_err(numerical_err)?;
            let mut s = String::from("d1,d2,bound,abs_d\n");
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt(d1, digits),
                fmt(d2, digits),
                fmt(bound, digits),
                fmt(d.norm(), digits)
            );
            emit(&out, &s)
        }
        Command::Profile {
            body,
            t_min,
            t_max,
            steps,
        } => {
            if steps < 2 {
                return Err(CliError::Input("profile needs --steps >= 2".into()));
            }
            let body = load_body(&body.body)?;
            let prof = intersection_profile(&body, (t_min, t_max), steps);
            let mut s = String::from("t,area\n");
            for (t, a) in prof {
                let _ = writeln!(s, "{},{}", fmt(t, digits), fmt(a, digits));
            }
            emit(&out, &s)
        }
        Command::John { body, tol } => {
            let body = load_body(&body.body)?;
            let r = john_ellipse(&body, tol).map_err(numerical_err)?;
            emit(&out, &ellipse_json(&r.ellipse, Some(r.optimality_gap)))
        }
        Command::Loewner { body, tol } => {
            let body = load_body(&body.body)?;
            let r = loewner_ellipse(&body, tol).map_err(numerical_err)?;
            emit(&out, &ellipse_json(&r.ellipse, Some(r.optimality_gap)))
        }
        Command::Mi { body, lambda, tol } => {
            let body = load_body(&body.body)?;
            let opts = SolveOptions {
                tol,
                ..SolveOptions::default()
            };
            let r = solve_mi(&body, lambda, &opts).map_err(numerical_err)?;
            let mut s = ellipse_json(&r.ellipse, None);
            s.push_str("lambda,t,phi,intersection,residual\n");
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                fmt(lambda, digits),
                fmt(r.ellipse.t(), digits),
                fmt(r.ellipse.phi(), digits),
                fmt(r.intersection, digits),
                fmt(r.residual, digits)
            );
            emit(&out, &s)
        }
        Command::Family { body, steps } => {
            if steps < 2 {
                return Err(CliError::Input("family needs --steps >= 2".into()));
            }
            let body = load_body(&body.body)?;
            let fam = mi_family(&body, steps, &SolveOptions::default()).map_err(numerical_err)?;
            let mut s = String::from("lambda,t,phi,intersection,residual\n");
            for (lambda, r) in fam {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    fmt(lambda, digits),
                    fmt(r.ellipse.t(), digits),
                    fmt(r.ellipse.phi(), digits),
                    fmt(r.intersection, digits),
                    fmt(r.residual, digits)
                );
            }
            emit(&out, &s)
        }
        Command::CheckPosition { body, tol } => {
            let body = load_body(&body.body)?;
            let report = check_mi_position(&body, tol).map_err(numerical_err)?;
            let angles: Vec<f64> = report.crossings.crossings().iter().map(|c| c.xi).collect();
            let json = serde_json::json!({
                "is_mi": report.is_mi,
                "residual": report.residual,
                "quarter_turn_residual": report.quarter_turn_residual,
                "crossings": angles,
            });
            emit(&out, &format!("{}\n", pretty(&json)))
        }
        Command::Isotropic { body, tol } => {
            let body = load_body(&body.body)?;
            let report = check_mi_position(&body, tol).map_err(numerical_err)?;
            let measure =
                isotropic_weights(&report.crossings, tol.max(1e-6)).map_err(numerical_err)?;
            let json = serde_json::json!({
                "is_mi": report.is_mi,
                "residual": report.residual,
                "weights": measure.weights,
                "support": measure.support.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
                "balanced_residual": measure.balanced_residual(),
                "isotropy_residual": measure.isotropy_residual(16),
            });
            emit(&out, &format!("{}\n", pretty(&json)))
        }
        Command::Oracle { sub } => run_oracle(sub, cli.seed, digits, &out),
        Command::Plot { body, lambda } => {
            let body = load_body(&body.body)?;
            let john = john_ellipse(&body, 1e-7).map_err(numerical_err)?;
            let loewner = loewner_ellipse(&body, 1e-7).map_err(numerical_err)?;
            let mi = solve_mi(&body, lambda, &SolveOptions::default()).map_err(numerical_err)?;
            let ellipses = vec![
                ("unit-circle".to_string(), EllipseF64::unit_disk()),
                ("john".to_string(), john.ellipse),
                ("loewner".to_string(), loewner.ellipse),
                ("mi".to_string(), mi.ellipse),
            ];
            emit(&out, &svg::render(&body, &ellipses))
        }
        Command::Fig1 { check_position } => {
            let body = mi_ellipse::fixtures::fig1_body::<f64>();
            if check_position {
                let report = check_mi_position(&body, 1e-6).map_err(numerical_err)?;
                let mut s = String::new();
                let _ = writeln!(s, "is_mi={}", report.is_mi);
                let _ = writeln!(s, "residual={}", fmt(report.residual, digits));
                for c in report.crossings.crossings() {
                    let _ = writeln!(s, "xi={}", fmt(c.xi, digits));
                }
                emit(&out, &s)
            } else {
                let text = serde_json::to_string_pretty(&body.to_spec()).map_err(input_err)?;
                emit(&out, &format!("{text}\n"))
            }
        }
    }
}

fn run_oracle(
    sub: OracleCommand,
    seed: u64,
    digits: usize,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    match sub {
        OracleCommand::Area {
            body,
            ellipse,
            method,
            samples,
        } => {
            let body = load_body(&body.body)?;
            let e = parse_ellipse(&ellipse)?;
            let (value, sigma) = match method.as_str() {
                "mc" => {
                    let est = oracle::mc_intersection_area(&body, &e, samples, seed);
                    (est.value, est.sigma)
                }
                "clip" => {
                    let bp = body.boundary_points(4096);
                    let ep = oracle::polygonize_ellipse(&e, 4096);
                    let est = oracle::clip_area(&bp, &ep);
                    (est.value, est.sigma)
                }
                "analytic" => (intersection_area(&body, &e), 0.0),
                other => {
                    return Err(CliError::Input(format!(
                        "unknown oracle area method `{other}` (expected analytic|mc|clip)"
                    )))
                }
            };
            let mut s = String::from("value,sigma,method\n");
            let _ = writeln!(
                s,
                "{},{},{}",
                fmt(value, digits),
                fmt(sigma, digits),
                method
            );
            emit(out, &s)
        }
        OracleCommand::Derivs { body, order, h } => {
            let body = load_body(&body.body)?;
            let h = h.unwrap_or(if order == 1 { 1e-4 } else { 1e-3 });
            if !(order == 1 || order == 2) {
                return Err(CliError::Input(
                    "oracle derivs --order must be 1 or 2".into(),
                ));
            }
            let est = oracle::fd_derivative(&body, order, h);
            let mut s = String::from("order,h,value\n");
            let _ = writeln!(s, "{},{},{}", order, fmt(h, digits), fmt(est.value, digits));
            emit(out, &s)
        }
        OracleCommand::Mi {
            body,
            lambda,
            t_min,
            t_max,
            grid,
        } => {
            if grid < 21 {
                return Err(CliError::Input("oracle mi needs --grid >= 21".into()));
            }
            let body = load_body(&body.body)?;
            let r = oracle::grid_search_mi(&body, lambda, (t_min, t_max), grid);
            let mut s = String::from("lambda,t,phi,value,connected\n");
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                fmt(lambda, digits),
                fmt(r.best_t, digits),
                fmt(r.best_phi, digits),
                fmt(r.estimate.value, digits),
                r.connected
            );
            emit(out, &s)
        }
    }
}

fn load_body(arg: &str) -> Result<BodyF64, CliError> {
    if arg == "fig1" {
        return Ok(mi_ellipse::fixtures::fig1_body());
    }
    let text = std::fs::read_to_string(Path::new(arg))
        .map_err(|e| CliError::Input(format!("cannot read body file `{arg}`: {e}")))?;
    let spec: BodySpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("invalid body JSON in `{arg}`: {e}")))?;
    BodyF64::from_spec(&spec, DEFAULT_GRID).map_err(input_err)
}

fn parse_ellipse(text: &str) -> Result<EllipseF64, CliError> {
    let spec: EllipseSpec = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("invalid ellipse JSON: {e}")))?;
    if !(spec.area > 0.0 && spec.area.is_finite()) {
        return Err(CliError::Input("ellipse area must be positive".into()));
    }
    Ok(EllipseF64::from_spec(&spec))
}

fn ellipse_json(e: &EllipseF64, gap: Option<f64>) -> String {
    let q = e.form();
    let mut json = serde_json::json!({
        "t": e.t(),
        "phi": e.phi(),
        "area": e.area(),
        "q11": q.a,
        "q12": q.b,
        "q22": q.d,
    });
    if let Some(g) = gap {
        json["optimality_gap"] = serde_json::json!(g);
    }
    format!("{}\n", pretty(&json))
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).unwrap_or_else(|_| v.to_string())
}

/// Format with a fixed number of significant digits.
fn fmt(x: f64, digits: usize) -> String {
    let prec = digits.clamp(1, 17) - 1;
    format!("{x:.prec$e}")
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write `{}`: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
