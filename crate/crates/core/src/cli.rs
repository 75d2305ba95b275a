//! Command-line front end. Every command writes one JSON document and
//! returns an exit code: 0 pass, 1 verification failure, 2 configuration
//! or parse error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cjson;
use crate::expr::C64;
use crate::hopf::{
    example1_entry, example2_entry, family_to_diagonal, family_to_linear, kodaira_entry,
    vaisman_entry, CatalogEntry, HopfError,
};
use crate::maps::{contraction_test, jordan_form, ContractionOptions, MapError, PolyAutomorphism};
use crate::verify::{run_suite, suite_passed, LeeSolver, Samples, SuiteConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hopf-lck",
    version,
    about = "Certify lcK structures on Hopf manifolds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the verification suite on a catalog entry or a config file.
    Verify(VerifyArgs),
    /// Evaluate a scaling deformation family at `t` and at the limit `t = 0`.
    Deform(DeformArgs),
    /// Jordan form of a matrix or of a map's linear part.
    Jordan(FileArgs),
    /// Contraction test for a map file or an entry's generator.
    Contraction(ContractionArgs),
    /// Pointwise Lee-form recovery for an entry's `Omega`.
    SolveLee(VerifyArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub mu_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_im: Option<f64>,
    /// Real part of the deformation parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub r1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub r2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p2: Option<f64>,
}

#[derive(Debug, Args, Clone)]
pub struct VerifyArgs {
    /// Catalog entry: example1, example2, kodaira, vaisman.
    #[arg(long, conflicts_with = "file")]
    pub entry: Option<String>,
    /// JSON run configuration.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Contraction probe radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Contraction target radius.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Linearize,
    Diagonalize,
}

#[derive(Debug, Args, Clone)]
pub struct DeformArgs {
    /// Map JSON or matrix JSON.
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub t_im: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct FileArgs {
    /// Map JSON or matrix JSON.
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct ContractionArgs {
    /// Map JSON or matrix JSON.
    #[arg(long, conflicts_with = "entry")]
    pub file: Option<PathBuf>,
    /// Use the cyclic generator of a catalog entry.
    #[arg(long)]
    pub entry: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

/// Complex config values may be a plain number or `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    fn value(self) -> C64 {
        match self {
            ComplexValue::Real(x) => C64::new(x, 0.0),
            ComplexValue::Pair(p) => cjson::from_pair(p),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterOverrides {
    pub mu: Option<ComplexValue>,
    pub alpha: Option<ComplexValue>,
    pub t: Option<ComplexValue>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
}

/// JSON run configuration for `verify` and `solve-lee`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub entry: String,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub tol: Option<f64>,
    pub radius: Option<f64>,
    pub eps: Option<f64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub parameters: ParameterOverrides,
}

fn default_points() -> usize {
    1000
}

fn default_seed() -> u64 {
    42
}

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<HopfError> for CliError {
    fn from(e: HopfError) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<MapError> for CliError {
    fn from(e: MapError) -> Self {
        CliError::config(e.to_string())
    }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: invalid JSON: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let value = read_json(path)?;
    serde_json::from_value(value).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Map JSON (`{dim, components}`) or a square matrix of reals or `[re, im]` pairs.
#[derive(Debug, Clone)]
pub enum MapInput {
    Map(PolyAutomorphism),
    Matrix(DMatrix<C64>),
}

impl MapInput {
    fn as_map(&self) -> Result<PolyAutomorphism, CliError> {
        match self {
            MapInput::Map(g) => Ok(g.clone()),
            MapInput::Matrix(m) => Ok(PolyAutomorphism::linear(m)?),
        }
    }

    fn as_matrix(&self) -> Result<DMatrix<C64>, CliError> {
        match self {
            MapInput::Matrix(m) => Ok(m.clone()),
            MapInput::Map(g) if g.is_linear() => Ok(g.linear_part()),
            MapInput::Map(_) => Err(CliError::config(
                "expected a matrix or a linear map, got a nonlinear map",
            )),
        }
    }
}

pub fn load_map_input(path: &Path) -> Result<MapInput, CliError> {
    let value = read_json(path)?;
    let at = |e: String| CliError::config(format!("{}: {e}", path.display()));
    match value {
        Value::Object(_) => serde_json::from_value::<PolyAutomorphism>(value)
            .map(MapInput::Map)
            .map_err(|e| at(e.to_string())),
        Value::Array(_) => {
            let rows: Vec<Vec<ComplexValue>> =
                serde_json::from_value(value).map_err(|e| at(e.to_string()))?;
            let rows: Vec<Vec<[f64; 2]>> = rows
                .into_iter()
                .map(|r| r.into_iter().map(|v| cjson::pair(v.value())).collect())
                .collect();
            let m = cjson::matrix_from_rows(&rows).map_err(at)?;
            if !m.is_square() {
                return Err(at(format!(
                    "matrix is {}x{}, expected square",
                    m.nrows(),
                    m.ncols()
                )));
            }
            Ok(MapInput::Matrix(m))
        }
        _ => Err(at("expected a map object or a matrix array".into())),
    }
}

/// Resolved run settings after merging config file and flags.
#[derive(Debug, Clone)]
struct Resolved {
    entry: CatalogEntry,
    suite: SuiteConfig,
    out: Option<PathBuf>,
}

fn merge_params(file: ParameterOverrides, flags: &ParamArgs) -> ParameterOverrides {
    let complex = |base: Option<ComplexValue>, re: Option<f64>, im: Option<f64>| {
        if re.is_none() && im.is_none() {
            return base;
        }
        let b = base.map(ComplexValue::value).unwrap_or_default();
        Some(ComplexValue::Pair([re.unwrap_or(b.re), im.unwrap_or(b.im)]))
    };
    ParameterOverrides {
        mu: complex(file.mu, flags.mu_re, flags.mu_im),
        alpha: complex(file.alpha, flags.alpha_re, flags.alpha_im),
        t: complex(file.t, flags.t, flags.t_im),
        r1: flags.r1.or(file.r1),
        r2: flags.r2.or(file.r2),
        p1: flags.p1.or(file.p1),
        p2: flags.p2.or(file.p2),
    }
}

/// Builds a catalog entry by name. Defaults: `mu = 2`, `alpha = 0.5`,
/// `t = 1`, `r = (1, 1.5)`, `p = (1, 2)`.
pub fn build_entry(name: &str, params: &ParameterOverrides) -> Result<CatalogEntry, CliError> {
    let mu = params
        .mu
        .map(ComplexValue::value)
        .unwrap_or(C64::new(2.0, 0.0));
    let alpha = params
        .alpha
        .map(ComplexValue::value)
        .unwrap_or(C64::new(0.5, 0.0));
    let t = params
        .t
        .map(ComplexValue::value)
        .unwrap_or(C64::new(1.0, 0.0));
    let r = [params.r1.unwrap_or(1.0), params.r2.unwrap_or(1.5)];
    let p = [params.p1.unwrap_or(1.0), params.p2.unwrap_or(2.0)];
    let entry = match name {
        "example1" => example1_entry(mu)?,
        "example2" => example2_entry(2, mu)?,
        "kodaira" => kodaira_entry(alpha, t)?,
        "vaisman" => vaisman_entry(&r, &p)?,
        other => return Err(HopfError::UnknownEntry(other.to_string()).into()),
    };
    Ok(entry)
}

fn resolve(args: &VerifyArgs) -> Result<Resolved, CliError> {
    let (name, mut points, mut seed, mut tol, mut radius, mut eps, mut out, file_params) =
        match (&args.entry, &args.file) {
            (Some(e), None) => (
                e.clone(),
                1000,
                42,
                None,
                None,
                None,
                None,
                ParameterOverrides::default(),
            ),
            (None, Some(path)) => {
                let c = load_config(path)?;
                (
                    c.entry,
                    c.points,
                    c.seed,
                    c.tol,
                    c.radius,
                    c.eps,
                    c.out,
                    c.parameters,
                )
            }
            _ => {
                return Err(CliError::config(
                    "exactly one of --entry or --file is required",
                ))
            }
        };
    if let Some(v) = args.points {
        points = v;
    }
    if let Some(v) = args.seed {
        seed = v;
    }
    tol = args.tol.or(tol);
    radius = args.radius.or(radius);
    eps = args.eps.or(eps);
    out = args.out.clone().or(out);
    if points < 1 {
        return Err(CliError::config("points: must be at least 1"));
    }
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(CliError::config(format!("tol: must be positive, got {t}")));
        }
    }
    let params = merge_params(file_params, &args.params);
    let entry = build_entry(&name, &params)?;
    let mut contraction = ContractionOptions::default();
    if let Some(r) = radius {
        contraction.radius = r;
    }
    if let Some(e) = eps {
        contraction.eps = e;
    }
    if !(contraction.radius > 0.0 && contraction.eps > 0.0) {
        return Err(CliError::config("radius and eps: must be positive"));
    }
    Ok(Resolved {
        entry,
        suite: SuiteConfig {
            points,
            seed,
            tolerance: tol,
            contraction,
        },
        out,
    })
}

/// Output document and exit code.
pub struct Outcome {
    pub document: Value,
    pub code: i32,
    pub out: Option<PathBuf>,
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let r = resolve(args)?;
    let reports = run_suite(&r.entry, &r.suite);
    let code = if suite_passed(&reports) {
        EXIT_PASS
    } else {
        EXIT_FAIL
    };
    Ok(Outcome {
        document: to_value(&reports)?,
        code,
        out: r.out,
    })
}

#[derive(Serialize)]
struct LeeSummary<'a> {
    entry: &'a str,
    status: &'a str,
    tolerance: f64,
    num_points: usize,
    seed: u64,
    max_residual: f64,
    max_reality_defect: f64,
    /// Largest gap to the entry's own `theta`, when it has one.
    max_theta_gap: Option<f64>,
    results: Vec<crate::verify::LeeSolveResult>,
}

pub fn cmd_solve_lee(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let r = resolve(args)?;
    let omega = r
        .entry
        .form("Omega")
        .ok_or_else(|| CliError::config(format!("entry {} has no Omega", r.entry.name)))?;
    let tol = r
        .suite
        .tolerance
        .unwrap_or_else(|| r.entry.default_tolerance());
    let samples = Samples::annulus(r.entry.dim, r.suite.points, r.suite.seed);
    let solver = LeeSolver::new(omega).map_err(|e| CliError::config(e.to_string()))?;
    let theta = r.entry.form("theta");
    let mut results = Vec::with_capacity(samples.points.len());
    let (mut max_res, mut max_real) = (0.0f64, 0.0f64);
    let mut gap: Option<f64> = theta.map(|_| 0.0);
    let mut failed = false;
    for p in &samples.points {
        let s = match solver.solve(p) {
            Ok(s) => s,
            Err(e) => {
                return Ok(Outcome {
                    document: json!({ "entry": r.entry.name, "status": "fail", "error": e.to_string() }),
                    code: EXIT_FAIL,
                    out: r.out,
                })
            }
        };
        max_res = max_res.max(s.residual);
        max_real = max_real.max(s.reality_defect);
        failed |= !(s.residual < tol) || !(s.reality_defect < tol);
        if let (Some(th), Some(g)) = (theta, gap.as_mut()) {
            let v = th
                .evaluate(p)
                .map_err(|e| CliError::config(e.to_string()))?;
            let d = s
                .theta_coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| (c - v.get(&[j])).norm())
                .fold(0.0, f64::max);
            *g = g.max(d);
        }
        results.push(s);
    }
    let summary = LeeSummary {
        entry: &r.entry.name,
        status: if failed { "fail" } else { "pass" },
        tolerance: tol,
        num_points: samples.points.len(),
        seed: samples.seed,
        max_residual: max_res,
        max_reality_defect: max_real,
        max_theta_gap: gap,
        results,
    };
    Ok(Outcome {
        document: to_value(&summary)?,
        code: if failed { EXIT_FAIL } else { EXIT_PASS },
        out: r.out,
    })
}

pub fn cmd_deform(args: &DeformArgs) -> Result<Outcome, CliError> {
    let input = load_map_input(&args.file)?;
    let t = C64::new(args.t, args.t_im);
    let document = match args.family {
        Family::Linearize => {
            let g = input.as_map()?;
            let fam = family_to_linear(&g);
            let at_t = fam.at(t)?;
            let limit = fam.limit()?;
            let linear = g.linear_part();
            let matches = limit == PolyAutomorphism::linear(&linear)?;
            json!({
                "family": "linearize",
                "t": cjson::pair(t),
                "map_at_t": at_t,
                "limit": limit,
                "linear_part": cjson::matrix_rows(&linear),
                "limit_matches_linear_part": matches,
            })
        }
        Family::Diagonalize => {
            let a = input.as_matrix()?;
            let fam = family_to_diagonal(&a)?;
            let limit = fam.limit();
            let diagonal = DMatrix::from_diagonal(&a.diagonal());
            json!({
                "family": "diagonalize",
                "t": cjson::pair(t),
                "matrix_at_t": cjson::matrix_rows(&fam.at(t)),
                "limit": cjson::matrix_rows(&limit),
                "diagonal": cjson::matrix_rows(&diagonal),
                "limit_matches_diagonal": limit == diagonal,
            })
        }
    };
    Ok(Outcome {
        document,
        code: EXIT_PASS,
        out: args.out.clone(),
    })
}

pub fn cmd_jordan(args: &FileArgs) -> Result<Outcome, CliError> {
    let input = load_map_input(&args.file)?;
    let a = match &input {
        MapInput::Matrix(m) => m.clone(),
        MapInput::Map(g) => g.linear_part(),
    };
    let (document, code) = match jordan_form(&a) {
        Ok(d) => {
            let mut v = to_value(&d)?;
            v["status"] = json!("ok");
            (v, EXIT_PASS)
        }
        Err(e @ MapError::IllConditioned(_)) => (
            json!({ "status": "ill_conditioned", "error": e.to_string() }),
            EXIT_FAIL,
        ),
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome {
        document,
        code,
        out: args.out.clone(),
    })
}

pub fn cmd_contraction(args: &ContractionArgs) -> Result<Outcome, CliError> {
    let g = match (&args.file, &args.entry) {
        (Some(path), None) => load_map_input(path)?.as_map()?,
        (None, Some(name)) => {
            let params = merge_params(ParameterOverrides::default(), &args.params);
            build_entry(name, &params)?.group.contracting_generator().0
        }
        _ => {
            return Err(CliError::config(
                "exactly one of --file or --entry is required",
            ))
        }
    };
    let opts = ContractionOptions {
        radius: args.radius,
        eps: args.eps,
        max_iter: args.max_iter,
        ..ContractionOptions::default()
    };
    if !(opts.radius > 0.0 && opts.eps > 0.0) {
        return Err(CliError::config("radius and eps: must be positive"));
    }
    let (document, code) = match contraction_test(&g, &opts) {
        Ok(r) => {
            let code = if r.is_contraction {
                EXIT_PASS
            } else {
                EXIT_FAIL
            };
            (to_value(&r)?, code)
        }
        Err(e @ MapError::IterationDiverged { .. }) => (
            json!({ "is_contraction": false, "error": e.to_string() }),
            EXIT_FAIL,
        ),
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome {
        document,
        code,
        out: args.out.clone(),
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::config(format!("serializing output: {e}")))
}

/// Pretty JSON with a trailing newline.
pub fn render(document: &Value) -> String {
    let mut s = serde_json::to_string_pretty(document).expect("values serialize");
    s.push('\n');
    s
}

pub fn dispatch(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Verify(a) => cmd_verify(a),
        Command::Deform(a) => cmd_deform(a),
        Command::Jordan(a) => cmd_jordan(a),
        Command::Contraction(a) => cmd_contraction(a),
        Command::SolveLee(a) => cmd_solve_lee(a),
    }
}

/// Runs a parsed command, writes its output and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(&cli.command) {
        Ok(outcome) => {
            let text = render(&outcome.document);
            match &outcome.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return EXIT_CONFIG;
                    }
                }
                None => print!("{text}"),
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
