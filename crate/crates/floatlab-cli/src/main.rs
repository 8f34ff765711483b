//! `floatlab`: floating functions, affine surface area, and the associated
//! convergence and identity checks from the command line.
//!
//! Exit codes: 0 success / all checks pass, 1 a requested check failed,
//! 2 usage error, 3 numerical error (structured JSON on stderr).

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use floatlab::convexfn::{self, ConvexFunction};
use floatlab::epigraph::{self, EllipsoidSpec, HyperplaneCut};
use floatlab::experiments::{self, DeltaLadder, GridSpec};
use floatlab::floating::{self, FloatParams};
use floatlab::geom::Mat;
use floatlab::parser;
use floatlab::surface::{self, BodyBoundary2D};
use floatlab::{Point, QuadratureSpec};

#[derive(Parser)]
#[command(name = "floatlab", version, about = "Floating functions and affine surface area of log-concave densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvergeMode {
    Theorem,
    Proposition,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Invariance,
    Valuation,
    Isoperimetric,
    Gauge,
    Capbounds,
    Uniformbound,
    Finiteness,
}

#[derive(Subcommand)]
enum Command {
    /// Cap volume of epi(psi) below the hyperplane y = <a,x> + b.
    Capvol {
        #[arg(long = "fn")]
        function: String,
        /// Slope a (one or two comma-separated numbers).
        #[arg(long)]
        slope: String,
        #[arg(long)]
        offset: f64,
    },
    /// Floating function values psi_delta at a point or on a grid.
    Float {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        delta: f64,
        /// Evaluation point x (one or two comma-separated numbers).
        #[arg(long, conflicts_with = "grid")]
        point: Option<String>,
        /// Grid lo:hi:count[,lo:hi:count]; output is CSV.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Affine surface area of e^{-psi}.
    Asa {
        #[arg(long = "fn")]
        function: String,
        /// Use the alternative (scaling-weighted) functional.
        #[arg(long)]
        alt: bool,
    },
    /// L_p affine surface area of a planar body.
    Asp {
        /// disk:r or ellipse:rx,ry
        #[arg(long)]
        body: String,
        #[arg(long)]
        p: f64,
    },
    /// Convergence of the integral ratio along a delta ladder.
    Converge {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, value_enum)]
        mode: ConvergeMode,
        /// max:min:count (geometric).
        #[arg(long)]
        ladder: Option<String>,
        /// lo:hi:count (1D line or 2D square).
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Identity / inequality checks.
    Check {
        #[arg(long, value_enum)]
        property: Property,
        /// Flat key=value file overriding the property defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Rolling radius of the graph of psi at a point.
    Rolling {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        point: String,
    },
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("FLOATLAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            if let Some(num) = err.downcast_ref::<floatlab::Error>() {
                eprintln!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "error": { "kind": error_kind(num), "message": num.to_string() }
                    }))
                    .unwrap()
                );
                ExitCode::from(3)
            } else {
                eprintln!("error: {err}");
                ExitCode::from(2)
            }
        }
    }
}

fn error_kind(e: &floatlab::Error) -> &'static str {
    use floatlab::Error::*;
    match e {
        Budget { .. } => "budget",
        NoSignChange { .. } => "no_sign_change",
        SearchBox => "search_box",
        NotCoercive { .. } => "not_coercive",
        Construction(_) => "construction",
        Domain(_) => "domain",
        Region(_) => "region",
        Parse(_) => "parse",
        Precondition(_) => "precondition",
        ConvexityViolation { .. } => "convexity_violation",
    }
}

fn parse_point(s: &str) -> anyhow::Result<(Point, usize)> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()?;
    match parts.len() {
        1 => Ok(([parts[0], 0.0], 1)),
        2 => Ok(([parts[0], parts[1]], 2)),
        n => anyhow::bail!("expected 1 or 2 coordinates, got {n}"),
    }
}

fn parse_range(s: &str) -> anyhow::Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    anyhow::ensure!(parts.len() == 3, "range must be lo:hi:count, got '{s}'");
    Ok((parts[0].trim().parse()?, parts[1].trim().parse()?, parts[2].trim().parse()?))
}

fn quad_spec(psi: &ConvexFunction) -> QuadratureSpec {
    convexfn::auto_quadrature_spec(psi, 1e-9, 1e-9)
}

fn spec_config(spec: &QuadratureSpec) -> Value {
    json!({
        "abs_tol": spec.abs_tol,
        "rel_tol": spec.rel_tol,
        "max_subdivisions": spec.max_subdivisions,
        "truncation_radius": spec.truncation_radius,
    })
}

fn emit(value: Value) {
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cmd: Command) -> anyhow::Result<bool> {
    match cmd {
        Command::Capvol { function, slope, offset } => {
            let psi = parser::parse(&function)?;
            let (a, sdim) = parse_point(&slope)?;
            anyhow::ensure!(sdim == psi.dim() || (sdim == 1 && psi.dim() == 1), "slope dimension mismatch");
            let spec = quad_spec(&psi);
            let cv = epigraph::cap_volume(&psi, &HyperplaneCut { slope: a, offset }, &spec)?;
            emit(json!({
                "config": { "fn": function, "slope": a[..psi.dim()], "offset": offset, "quadrature": spec_config(&spec) },
                "volume": cv.volume,
                "wet_measure": cv.derivative,
                "error_estimate": cv.error,
            }));
            Ok(true)
        }
        Command::Float { function, delta, point, grid, output } => {
            let psi = parser::parse(&function)?;
            let params = FloatParams::for_function(&psi, delta)?;
            let config = json!({
                "fn": function, "delta": delta,
                "cut_volume_tol": params.cut_volume_tol,
                "search_half_width": params.search.half_width,
                "quadrature": spec_config(&params.quad),
            });
            match (point, grid) {
                (Some(p), None) => {
                    let (x, _) = parse_point(&p)?;
                    let ev = floating::floating_value(&psi, &x, &params)?;
                    emit(json!({
                        "config": config,
                        "point": ev.point[..psi.dim()],
                        "psi": ev.psi,
                        "psi_delta": ev.psi_delta,
                        "slope": ev.slope[..psi.dim()],
                        "cut_volume": ev.cut_volume,
                    }));
                    Ok(true)
                }
                (None, Some(g)) => {
                    let ranges: Vec<&str> = g.split(',').collect();
                    let pts = match ranges.len() {
                        1 => {
                            anyhow::ensure!(psi.dim() == 1, "1D grid for a 2D function");
                            let (lo, hi, count) = parse_range(ranges[0])?;
                            floating::grid_1d(lo, hi, count)
                        }
                        2 => {
                            anyhow::ensure!(psi.dim() == 2, "2D grid for a 1D function");
                            let (lx, hx, cx) = parse_range(ranges[0])?;
                            let (ly, hy, cy) = parse_range(ranges[1])?;
                            floating::grid_2d([lx, ly], [hx, hy], [cx, cy])
                        }
                        n => anyhow::bail!("grid takes 1 or 2 ranges, got {n}"),
                    };
                    let rows = floating::floating_grid(&psi, &pts, &params);
                    let failures = rows.iter().filter(|r| r.is_err()).count();
                    if failures > 0 {
                        eprintln!("warning: {failures} grid points failed and were omitted");
                    }
                    write_or_print(output.as_ref(), &floating::grid_to_csv(psi.dim(), &rows))?;
                    Ok(true)
                }
                _ => anyhow::bail!("exactly one of --point or --grid is required"),
            }
        }
        Command::Asa { function, alt } => {
            let psi = parser::parse(&function)?;
            let spec = quad_spec(&psi);
            let est = if alt {
                surface::asa_alternative(&psi, &spec)?
            } else {
                surface::asa_checked(&psi, &spec)?
            };
            emit(json!({
                "config": { "fn": function, "alt": alt, "quadrature": spec_config(&spec) },
                "value": est.value,
                "error_estimate": est.error,
            }));
            Ok(true)
        }
        Command::Asp { body, p } => {
            let parsed = parse_body(&body)?;
            let spec = QuadratureSpec::default_for(1);
            let est = surface::asp_body(&parsed, p, &spec)?;
            emit(json!({
                "config": { "body": body, "p": p, "quadrature": spec_config(&spec) },
                "value": est.value,
                "error_estimate": est.error,
            }));
            Ok(true)
        }
        Command::Converge { function, mode, ladder, grid, csv } => {
            let psi = parser::parse(&function)?;
            let ladder = match ladder {
                Some(s) => {
                    let (max, min, count) = parse_range(&s)?;
                    DeltaLadder::new(max, min, count)?
                }
                None => DeltaLadder::default_for(psi.dim()),
            };
            let grid_spec = match grid {
                Some(s) => {
                    let (lo, hi, count) = parse_range(&s)?;
                    if psi.dim() == 1 {
                        GridSpec::Line { lo, hi, count }
                    } else {
                        GridSpec::Square { lo, hi, count }
                    }
                }
                None => GridSpec::default_for(psi.dim()),
            };
            let rep = match mode {
                ConvergeMode::Theorem => experiments::theorem_ratio(&psi, &ladder, &grid_spec)?,
                ConvergeMode::Proposition => experiments::proposition_ratio(&psi, &ladder, &grid_spec)?,
            };
            if let Some(path) = csv {
                std::fs::write(path, rep.to_csv())?;
            }
            emit(json!({
                "config": { "fn": function, "ladder": ladder, "grid": grid_spec },
                "report": rep,
            }));
            Ok(true)
        }
        Command::Check { property, config } => {
            let cfg = match config {
                Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
                None => HashMap::new(),
            };
            run_check(property, &cfg)
        }
        Command::Rolling { function, point } => {
            let psi = parser::parse(&function)?;
            let (x, _) = parse_point(&point)?;
            let tol = 1e-4;
            let r = epigraph::rolling_function(&psi, &x, tol);
            emit(json!({
                "config": { "fn": function, "point": x[..psi.dim()], "tol": tol },
                "rolling_radius": r,
            }));
            Ok(true)
        }
    }
}

fn parse_body(s: &str) -> anyhow::Result<BodyBoundary2D> {
    let (kind, args) = s
        .split_once(':')
        .ok_or_else(|| anyhow::anyhow!("body must be disk:r or ellipse:rx,ry"))?;
    match kind {
        "disk" => Ok(BodyBoundary2D::disk(args.trim().parse()?)?),
        "ellipse" => {
            let (rx, ry) = args
                .split_once(',')
                .ok_or_else(|| anyhow::anyhow!("ellipse needs rx,ry"))?;
            Ok(BodyBoundary2D::ellipse(rx.trim().parse()?, ry.trim().parse()?)?)
        }
        other => anyhow::bail!("unknown body kind '{other}'"),
    }
}

fn parse_config(text: &str) -> anyhow::Result<HashMap<String, String>> {
    let mut out = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("line {}: expected key=value", lineno + 1))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn cfg_f64(cfg: &HashMap<String, String>, key: &str, default: f64) -> anyhow::Result<f64> {
    match cfg.get(key) {
        Some(v) => Ok(v.parse()?),
        None => Ok(default),
    }
}

fn cfg_usize(cfg: &HashMap<String, String>, key: &str, default: usize) -> anyhow::Result<usize> {
    match cfg.get(key) {
        Some(v) => Ok(v.parse()?),
        None => Ok(default),
    }
}

fn cfg_fn(cfg: &HashMap<String, String>, key: &str, default: &str) -> anyhow::Result<ConvexFunction> {
    let spec = cfg.get(key).map(String::as_str).unwrap_or(default);
    Ok(parser::parse(spec)?)
}

fn run_check(property: Property, cfg: &HashMap<String, String>) -> anyhow::Result<bool> {
    let report = match property {
        Property::Invariance => {
            let psi = cfg_fn(cfg, "fn", "quad(0.5)")?;
            let tol = cfg_f64(cfg, "tol", 5e-3)?;
            let t = [cfg_f64(cfg, "t1", 0.0)?, cfg_f64(cfg, "t2", 0.0)?];
            let a = if psi.dim() == 1 {
                Mat::new1(cfg_f64(cfg, "a11", 2.0)?)
            } else {
                Mat::new2(
                    cfg_f64(cfg, "a11", 2.0)?,
                    cfg_f64(cfg, "a12", 0.0)?,
                    cfg_f64(cfg, "a21", 0.0)?,
                    cfg_f64(cfg, "a22", 0.5)?,
                )
            };
            surface::check_affine_invariance(&psi, a, t, tol)?
        }
        Property::Valuation => {
            let psi1 = cfg_fn(cfg, "fn1", "max(quad(1), affine(pownorm(1,1); 1; 0))")?;
            let psi2 = cfg_fn(cfg, "fn2", "max(quad(1), affine(pownorm(1,1); -1; 0))")?;
            let tol = cfg_f64(cfg, "tol", 1e-3)?;
            surface::check_valuation(&psi1, &psi2, tol)?
        }
        Property::Isoperimetric => {
            let psi = cfg_fn(cfg, "fn", "quad(1)")?;
            surface::check_isoperimetric(&psi, cfg_f64(cfg, "tol", 2e-3)?)?
        }
        Property::Gauge => surface::check_gauge_relation(
            cfg_f64(cfg, "rx", 1.0)?,
            cfg_f64(cfg, "ry", 1.0)?,
            cfg_f64(cfg, "tol", 1e-2)?,
        )?,
        Property::Capbounds => cap_bounds_battery(
            cfg_usize(cfg, "count", 200)?,
            cfg_usize(cfg, "seed", 7)? as u64,
        )?,
        Property::Uniformbound => {
            let psi = cfg_fn(cfg, "fn", "quad(0.5)")?;
            let lo = cfg_f64(cfg, "lo", -2.0)?;
            let hi = cfg_f64(cfg, "hi", 2.0)?;
            let count = cfg_usize(cfg, "count", 81)?;
            let delta = cfg_f64(cfg, "delta", 1e-4)?;
            let grid = if psi.dim() == 1 {
                floating::grid_1d(lo, hi, count)
            } else {
                floating::grid_2d([lo, lo], [hi, hi], [count, count])
            };
            experiments::uniform_bound_check(&psi, &grid, delta)?
        }
        Property::Finiteness => {
            let psi = cfg_fn(cfg, "fn", "quad(0.5)")?;
            experiments::finiteness_suite(&psi)?
        }
    };
    emit(json!({ "config": cfg, "report": report }));
    Ok(report.pass)
}

/// Random ellipsoid/height configurations: exact cap volume must sit in the
/// sandwich bounds.
fn cap_bounds_battery(count: usize, seed: u64) -> anyhow::Result<floatlab::CheckReport> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut worst_slack = f64::INFINITY;
    for _ in 0..count {
        let m = rng.gen_range(1..=3usize);
        let axes: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..3.0)).collect();
        let h = rng.gen_range(0.0..axes[m - 1]);
        let exact = epigraph::ellipsoid_cap_volume(&EllipsoidSpec::new(axes.clone())?, h)?;
        let (lower, upper) = epigraph::ellipsoid_cap_bounds(&EllipsoidSpec::new(axes)?, h)?;
        let slack = (exact - lower).min(upper - exact);
        worst_slack = worst_slack.min(slack);
        if !(lower - 1e-12 <= exact && exact <= upper + 1e-12) {
            failures += 1;
        }
    }
    let mut rep = floatlab::CheckReport::absolute("cap_bounds", failures as f64, 0.0, 0.5);
    rep = rep.note(format!("{count} random configurations, worst sandwich slack {worst_slack:.3e}"));
    Ok(rep)
}
