//! The `sphloc` command line.
//!
//! Every subcommand prints a JSON [`RunReport`] (to stdout, or to the file
//! given by `--output`). Exit codes: 0 success, 1 usage error, 2 domain or
//! validation error, 3 inconclusive search.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::convex2d::schema::{parse_body, BodySpec};
use crate::convex2d::{reference_volume_product, Cone2D, ConvexBody2D, VolumePreset};
use crate::gcc::{
    check_cone_inequality, check_full_correlation_2d, find_t0, hunt_strip_counterexample, needle_cone_consistency,
    HuntOutcome, T0Search, DEFAULT_HUNT_BUDGET,
};
use crate::mahler::{alpha_estimate, mahler_bound, AlphaSearchConfig};
use crate::needle::{meridian_fubini_check, needle_integrate, needle_normalize, NeedleDensity, SphereFunction};
use crate::numerics::QuadratureSpec;
use crate::waist::{tube_or_full, waist_curve, write_curve_csv, Modulus, WaistParams};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// Environment override for the default absolute quadrature tolerance.
pub const ABS_TOL_ENV: &str = "SPHLOC_ABS_TOL";
/// Environment override for the default relative quadrature tolerance.
pub const REL_TOL_ENV: &str = "SPHLOC_REL_TOL";

/// What every subcommand prints.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub params: Value,
    pub results: Value,
    pub quadrature: QuadratureSpec,
    pub seed: u64,
    /// Seconds; excluded from determinism comparisons.
    pub wall_time: f64,
}

#[derive(Debug, Parser)]
#[command(name = "sphloc", version, about = "Spherical localisation numerics")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Global {
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, env = ABS_TOL_ENV, default_value_t = QuadratureSpec::default().abs_tol)]
    abs_tol: f64,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, env = REL_TOL_ENV, default_value_t = QuadratureSpec::default().rel_tol)]
    rel_tol: f64,
    #[arg(long, global = true, default_value_t = QuadratureSpec::default().max_subdivisions)]
    max_subdivisions: usize,
    /// Seed for randomized searches; echoed by every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Waist lower bound w(eps) with the round tube volume alongside.
    Waist(WaistArgs),
    /// Normalized volume of the eps-tube around a great k-sphere.
    Tube(TubeArgs),
    /// Integral of a 1-D function against a normalized needle density.
    NeedleIntegrate(NeedleArgs),
    /// Sphere integral against the average of meridian needle integrals.
    NeedleFubini(FubiniArgs),
    /// Gaussian correlation in the plane for two body files.
    GccCheck(BodyPairArgs),
    /// Cone version of the correlation inequality at a fixed phase.
    GccCone(GccConeArgs),
    /// Seeded search for strip pairs violating the cone inequality.
    GccStripHunt(HuntArgs),
    /// Grid search for a phase satisfying the cone inequality.
    GccT0(GccT0Args),
    /// Sampled estimate of the Mahler alpha constant.
    MahlerAlpha(AlphaArgs),
    /// Volume-product lower bound from alpha.
    MahlerBound(BoundArgs),
    /// Parse and validate body files.
    BodiesValidate(ValidateArgs),
}

#[derive(Debug, Args, Serialize)]
struct WaistArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    /// `l2`, `lp:<p>` or `table:<eps>/<delta>,...`.
    #[arg(long, default_value = "l2")]
    space: String,
    /// `start:stop:step`, a single value, or a comma list.
    #[arg(long)]
    eps: String,
    /// Also write the curve as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct TubeArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    eps: String,
}

#[derive(Debug, Args, Serialize)]
struct NeedleArgs {
    /// Ambient sphere dimension.
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Phase of the sin form `sin(t + phase)^(n-k)`.
    #[arg(long, conflicts_with = "t0")]
    phase: Option<f64>,
    /// Phase of the cos form `cos(t + t0)^(n-k)`.
    #[arg(long)]
    t0: Option<f64>,
    /// Support `a,b`.
    #[arg(long, allow_hyphen_values = true)]
    support: String,
    /// `one`, `t`, `t2`, `sin`, `cos`, `exp` or `poly:c0,c1,...`.
    #[arg(long, default_value = "one")]
    f: String,
}

#[derive(Debug, Args, Serialize)]
struct FubiniArgs {
    #[arg(long)]
    n: u32,
    /// `const[:c]`, `coord:i`, `coord2:i`, `zonal` or `poly:seed`.
    #[arg(long, default_value = "const")]
    f: String,
    #[arg(long, default_value_t = 32)]
    directions: usize,
}

#[derive(Debug, Args, Serialize)]
struct BodyPairArgs {
    #[arg(long)]
    k1: PathBuf,
    #[arg(long)]
    k2: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct GccConeArgs {
    /// Cone `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    cone: String,
    #[arg(long, allow_hyphen_values = true)]
    t0: f64,
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    bodies: BodyPairArgs,
}

#[derive(Debug, Args, Serialize)]
struct HuntArgs {
    #[arg(long, default_value_t = DEFAULT_HUNT_BUDGET)]
    budget: usize,
    /// Polar grid size of the brute-force confirmation; 0 skips it.
    #[arg(long, default_value_t = 1000)]
    confirm_grid: usize,
}

#[derive(Debug, Args, Serialize)]
struct GccT0Args {
    #[arg(long, allow_hyphen_values = true)]
    cone: String,
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    bodies: BodyPairArgs,
    #[arg(long, default_value_t = 512)]
    grid: usize,
}

#[derive(Debug, Args, Serialize)]
struct AlphaArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    theta_grid: Option<usize>,
    #[arg(long)]
    interval_grid: Option<usize>,
    #[arg(long)]
    min_interval_length: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    refine_iters: Option<usize>,
    #[arg(long)]
    min_vertices: Option<usize>,
    #[arg(long)]
    max_vertices: Option<usize>,
    #[arg(long)]
    min_radius: Option<f64>,
    #[arg(long)]
    max_radius: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct BoundArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    alpha: f64,
    /// Evaluate the formula for n = 2, 3 as well.
    #[arg(long)]
    allow_small_n: bool,
}

#[derive(Debug, Args, Serialize)]
struct ValidateArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

/// A failed run: exit code and message for stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_DOMAIN,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_DOMAIN,
        message: message.into(),
    }
}

struct Outcome {
    command: &'static str,
    params: Value,
    results: Value,
    code: i32,
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let start = Instant::now();
    let spec = match QuadratureSpec::new(cli.global.abs_tol, cli.global.rel_tol, cli.global.max_subdivisions) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_DOMAIN;
        }
    };
    let outcome = match dispatch(&cli, &spec, stderr) {
        Ok(o) => o,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            return f.code;
        }
    };
    let report = RunReport {
        command: outcome.command.to_owned(),
        params: outcome.params,
        results: outcome.results,
        quadrature: spec,
        seed: cli.global.seed,
        wall_time: start.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    let written = match &cli.global.output {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_DOMAIN;
    }
    outcome.code
}

fn echo<A: Serialize>(global: &Global, args: &A) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialize");
    if let Value::Object(map) = &mut v {
        map.insert("abs_tol".into(), json!(global.abs_tol));
        map.insert("rel_tol".into(), json!(global.rel_tol));
        map.insert("max_subdivisions".into(), json!(global.max_subdivisions));
        map.insert("seed".into(), json!(global.seed));
    }
    v
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("results serialize")
}

fn dispatch(cli: &Cli, spec: &QuadratureSpec, stderr: &mut dyn Write) -> Result<Outcome, Failure> {
    let g = &cli.global;
    let ok = |command, params, results| Outcome {
        command,
        params,
        results,
        code: EXIT_OK,
    };
    Ok(match &cli.command {
        Command::Waist(a) => {
            let space = parse_space(&a.space)?;
            let params = WaistParams::new(a.n, a.k, space)?;
            let grid = parse_grid(&a.eps)?;
            let rows = waist_curve(&params, &grid, spec)?;
            if let Some(path) = &a.csv {
                let file = fs::File::create(path).map_err(|e| invalid(format!("cannot create {}: {e}", path.display())))?;
                write_curve_csv(&rows, file).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
            }
            let mut p = echo(g, a);
            p["space"] = to_value(&params.space);
            p["eps_grid"] = to_value(&grid);
            ok("waist", p, json!({ "rows": rows }))
        }
        Command::Tube(a) => {
            let grid = parse_grid(&a.eps)?;
            let rows = grid
                .iter()
                .map(|&eps| Ok(json!({ "eps": eps, "tube": tube_or_full(a.n, a.k, eps, spec)? })))
                .collect::<Result<Vec<_>, Error>>()?;
            let mut p = echo(g, a);
            p["eps_grid"] = to_value(&grid);
            ok("tube", p, json!({ "rows": rows }))
        }
        Command::NeedleIntegrate(a) => {
            let support = parse_pair(&a.support, "support")?;
            let raw = match a.t0 {
                Some(t0) => NeedleDensity::from_cos_phase(a.n, a.k, t0, support, 1.0)?,
                None => NeedleDensity::new(a.n, a.k, a.phase.unwrap_or(0.0), support, 1.0)?,
            };
            let d = needle_normalize(&raw)?;
            let f = LineFunction::parse(&a.f)?;
            let value = needle_integrate(&d, |t| f.eval(t), spec)?;
            let mut p = echo(g, a);
            p["phase"] = json!(d.phase());
            p["exponent"] = json!(d.exponent());
            ok(
                "needle-integrate",
                p,
                json!({ "scale": d.scale(), "exponent": d.exponent(), "phase": d.phase(), "value": value }),
            )
        }
        Command::NeedleFubini(a) => {
            let f: SphereFunction = a.f.parse()?;
            let bound = f.bind(a.n)?;
            let report = meridian_fubini_check(a.n, |x| bound.eval(x), a.directions, spec)?;
            ok("needle-fubini", echo(g, a), to_value(&report))
        }
        Command::GccCheck(a) => {
            let (k1, k2) = load_pair(a)?;
            let report = check_full_correlation_2d(&k1, &k2, spec)?;
            ok("gcc-check", body_echo(echo(g, a), &k1, &k2), to_value(&report))
        }
        Command::GccCone(a) => {
            let cone = parse_cone(&a.cone)?;
            let (k1, k2) = load_pair(&a.bodies)?;
            let report = check_cone_inequality(&cone, a.t0, a.n, &k1, &k2, spec)?;
            let consistency = match needle_cone_consistency(&cone, a.t0, a.n, &k1, &k2, spec) {
                Ok(c) => to_value(&c),
                Err(Error::DivisionByZero(_)) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            ok(
                "gcc-cone",
                body_echo(echo(g, a), &k1, &k2),
                json!({ "report": report, "needle_consistency": consistency }),
            )
        }
        Command::GccStripHunt(a) => {
            let outcome = hunt_strip_counterexample(g.seed, a.budget, spec)?;
            let (confirm, code) = match &outcome {
                HuntOutcome::Found { witness, .. } => {
                    let brute = if a.confirm_grid > 0 {
                        json!(witness.instance.brute_force_ratio(a.confirm_grid)?)
                    } else {
                        Value::Null
                    };
                    (brute, EXIT_OK)
                }
                HuntOutcome::NotFound { min_ratio, .. } => {
                    let _ = writeln!(stderr, "no witness found; minimum ratio {min_ratio:?}");
                    (Value::Null, EXIT_INCONCLUSIVE)
                }
            };
            Outcome {
                command: "gcc-strip-hunt",
                params: echo(g, a),
                results: json!({ "outcome": outcome, "brute_force_ratio": confirm }),
                code,
            }
        }
        Command::GccT0(a) => {
            let cone = parse_cone(&a.cone)?;
            let (k1, k2) = load_pair(&a.bodies)?;
            let search = find_t0(&cone, a.n, &k1, &k2, a.grid, spec)?;
            let code = match search {
                T0Search::Found { .. } => EXIT_OK,
                T0Search::NotFound { .. } => EXIT_INCONCLUSIVE,
            };
            Outcome {
                command: "gcc-t0",
                params: body_echo(echo(g, a), &k1, &k2),
                results: to_value(&search),
                code,
            }
        }
        Command::MahlerAlpha(a) => {
            let config = alpha_config(a, g.seed);
            let estimate = alpha_estimate(&config, spec)?;
            let mut p = echo(g, a);
            p["config"] = to_value(&config);
            ok("mahler-alpha", p, to_value(&estimate))
        }
        Command::MahlerBound(a) => {
            let b = mahler_bound(a.n, a.alpha, a.allow_small_n)?;
            let results = json!({
                "bound": b,
                "ball_product": reference_volume_product(VolumePreset::Ball, a.n)?,
                "cube_product": reference_volume_product(VolumePreset::Cube, a.n)?,
            });
            ok("mahler-bound", echo(g, a), results)
        }
        Command::BodiesValidate(a) => {
            let mut entries = Vec::new();
            let mut bad = 0;
            for path in &a.files {
                let entry = match fs::read_to_string(path) {
                    Err(e) => {
                        bad += 1;
                        let _ = writeln!(stderr, "{}: {e}", path.display());
                        json!({ "file": path, "valid": false, "error": e.to_string() })
                    }
                    Ok(text) => match parse_body(&text) {
                        Ok(body) => json!({ "file": path, "valid": true, "body": BodySpec::from_body(&body) }),
                        Err(e) => {
                            bad += 1;
                            let _ = writeln!(stderr, "{}:{}:{}: {}", path.display(), e.line, e.column, e.message);
                            json!({
                                "file": path, "valid": false,
                                "line": e.line, "column": e.column, "error": e.message,
                            })
                        }
                    },
                };
                entries.push(entry);
            }
            Outcome {
                command: "bodies-validate",
                params: echo(g, a),
                results: json!({ "files": entries, "invalid": bad }),
                code: if bad == 0 { EXIT_OK } else { EXIT_DOMAIN },
            }
        }
    })
}

fn alpha_config(a: &AlphaArgs, seed: u64) -> AlphaSearchConfig {
    let mut c = AlphaSearchConfig::new(a.n);
    c.seed = seed;
    c.theta_grid = a.theta_grid.unwrap_or(c.theta_grid);
    c.interval_grid = a.interval_grid.unwrap_or(c.interval_grid);
    c.min_interval_length = a.min_interval_length.unwrap_or(c.min_interval_length);
    c.sample_count = a.samples.unwrap_or(c.sample_count);
    c.refine_iters = a.refine_iters.unwrap_or(c.refine_iters);
    c.vertex_range = (
        a.min_vertices.unwrap_or(c.vertex_range.0),
        a.max_vertices.unwrap_or(c.vertex_range.1),
    );
    c.radial_bounds = (
        a.min_radius.unwrap_or(c.radial_bounds.0),
        a.max_radius.unwrap_or(c.radial_bounds.1),
    );
    c
}

fn body_echo(mut params: Value, k1: &ConvexBody2D, k2: &ConvexBody2D) -> Value {
    params["k1_body"] = to_value(&BodySpec::from_body(k1));
    params["k2_body"] = to_value(&BodySpec::from_body(k2));
    params
}

fn load_body(path: &Path) -> Result<ConvexBody2D, Failure> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_body(&text).map_err(|e| invalid(format!("{}:{}:{}: {}", path.display(), e.line, e.column, e.message)))
}

fn load_pair(a: &BodyPairArgs) -> Result<(ConvexBody2D, ConvexBody2D), Failure> {
    Ok((load_body(&a.k1)?, load_body(&a.k2)?))
}

fn parse_number(s: &str, what: &str) -> Result<f64, Failure> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| invalid(format!("bad number {s:?} in {what}")))
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), Failure> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| invalid(format!("{what} must be `a,b`, got {s:?}")))?;
    Ok((parse_number(a, what)?, parse_number(b, what)?))
}

fn parse_cone(s: &str) -> Result<Cone2D, Failure> {
    let (lo, hi) = parse_pair(s, "cone")?;
    Ok(Cone2D::new(lo, hi)?)
}

/// `start:stop:step` (endpoints included within half a step), a comma list,
/// or a single value.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| {
        p.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("bad number {p:?} in grid {s:?}"))
    };
    match parts.as_slice() {
        [single] => single.split(',').map(num).collect(),
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 || stop < start {
                return Err(format!("grid {s:?} needs step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor();
            if count > 1e7 {
                return Err(format!("grid {s:?} has too many points"));
            }
            let count = count as usize;
            let mut out: Vec<f64> = (0..=count).map(|i| start + step * i as f64).collect();
            if let Some(last) = out.last_mut() {
                if (*last - stop).abs() <= 0.5 * step {
                    *last = stop;
                }
            }
            Ok(out)
        }
        _ => Err(format!("grid {s:?} must be start:stop:step, a list, or a value")),
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        invalid(message)
    }
}

fn parse_space(s: &str) -> Result<Modulus, Failure> {
    let (name, arg) = match s.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let space = match (name, arg) {
        ("l2", None) => Modulus::L2,
        ("lp", Some(p)) => Modulus::Lp { p: parse_number(p, "space")? },
        ("table", Some(list)) => Modulus::Table {
            pairs: list
                .split(',')
                .map(|pair| {
                    let (e, d) = pair
                        .split_once('/')
                        .ok_or_else(|| invalid(format!("table entries are eps/delta, got {pair:?}")))?;
                    Ok((parse_number(e, "space")?, parse_number(d, "space")?))
                })
                .collect::<Result<_, Failure>>()?,
        },
        _ => return Err(invalid(format!("unknown space {s:?}; use l2, lp:<p> or table:<eps>/<delta>,..."))),
    };
    space.validate()?;
    Ok(space)
}

/// Integrands for `needle-integrate`.
#[derive(Debug, Clone, PartialEq)]
enum LineFunction {
    One,
    T,
    T2,
    Sin,
    Cos,
    Exp,
    Poly(Vec<f64>),
}

impl LineFunction {
    fn parse(s: &str) -> Result<Self, Failure> {
        Ok(match s {
            "one" => Self::One,
            "t" => Self::T,
            "t2" => Self::T2,
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "exp" => Self::Exp,
            _ => match s.strip_prefix("poly:") {
                Some(c) => Self::Poly(c.split(',').map(|x| parse_number(x, "f")).collect::<Result<_, _>>()?),
                None => return Err(invalid(format!("unknown function {s:?}"))),
            },
        })
    }

    fn eval(&self, t: f64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::T => t,
            Self::T2 => t * t,
            Self::Sin => t.sin(),
            Self::Cos => t.cos(),
            Self::Exp => t.exp(),
            Self::Poly(c) => c.iter().rev().fold(0.0, |acc, &x| acc * t + x),
        }
    }
}
