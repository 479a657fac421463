//! Command-line front-end for the metaward toolkit.
//!
//! [`run`] turns a parsed [`RunConfig`] into an exit code and a rendered
//! report; the binary only parses arguments, sizes the thread pool and writes
//! the output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use metaward::correlators::{
    build_reduced_system, check_boundedness, check_causality, check_symmetry, contraction_limit_check,
    default_w_samples, dual_ward_generators, meta_ward_generators, singularity_demo, w_collapse_check,
    ward_residual_on, CorrelatorFamily, CorrelatorParams, CorrelatorSpec, FieldPoint, Grid, Region, ResidualReport,
    CONTRACTION_MUS, SYMMETRY_TOL, W_COLLAPSE_TOL,
};
use metaward::hardy::{
    dualization_roundtrip, m2_battery, m2_report, spectral_onesidedness, HardyParams, M2Report, Verdict,
    ROUNDTRIP_DEFAULT_L, ROUNDTRIP_DEFAULT_N,
};
use metaward::reps::{
    contract_cga, make_generator, verify_chiral_isomorphism, verify_dynamical_symmetry, verify_n_extension_with,
    verify_solution_space_invariance, verify_structure_constants, verify_structure_constants_with, AlgebraReport,
    Factory, Family, GeneratorSource, GeneratorSpec, Kind, ParamValues,
};
use metaward::{parse_op_expr, DiffOp, GaussianRational, Var};

pub const TOOL: &str = "metaward";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const WARD_TOL: f64 = 1e-10;
pub const M2_TOL: f64 = 1e-6;
pub const M2_QUADRATURE_TOL: f64 = 1e-10;
pub const SPECTRUM_DEFAULT_N: usize = 1 << 16;
pub const SPECTRUM_DEFAULT_L: f64 = 200.0;

/// Exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug, Clone)]
#[command(name = "metaward", version, about = "Exact and numeric checks of meta-conformal representations")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Structure constants of a generator family.
    AlgebraCheck,
    /// Commutators with the dual rapidity generator N.
    NCheck,
    /// Dynamical symmetry of the meta-conformal generators.
    DynsymCheck,
    /// The chiral Virasoro pair behind the orthoconformal generators.
    ChiralCheck,
    /// The mu -> 0 contraction to the conformal Galilean algebra.
    Contract,
    /// Ward residuals of two-point functions under two-body generators.
    WardResidual,
    /// The reduced covariance system on the dual two-point function.
    ReducedSystem,
    /// Collapse of the dual scaling function onto one variable.
    WCollapse,
    /// Correlator values on a grid.
    CorrelatorTable,
    /// Symmetry, causality, boundedness, divergence and the contraction limit.
    Properties,
    /// Square-integral bound of the Hardy-class test function.
    HardyM2,
    /// One-sidedness of the windowed spectrum.
    HardySpectrum,
    /// Spectral round trip of the dualization.
    Roundtrip,
    /// Values of the naive form approaching its singular locus.
    SingularityDemo,
    /// The commutator [A, B] of two operator expressions.
    Commutator {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::AlgebraCheck => "algebra-check",
            Command::NCheck => "n-check",
            Command::DynsymCheck => "dynsym-check",
            Command::ChiralCheck => "chiral-check",
            Command::Contract => "contract",
            Command::WardResidual => "ward-residual",
            Command::ReducedSystem => "reduced-system",
            Command::WCollapse => "w-collapse",
            Command::CorrelatorTable => "correlator-table",
            Command::Properties => "properties",
            Command::HardyM2 => "hardy-m2",
            Command::HardySpectrum => "hardy-spectrum",
            Command::Roundtrip => "roundtrip",
            Command::SingularityDemo => "singularity-demo",
            Command::Commutator { .. } => "commutator",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegionArg {
    Natural,
    PositiveRatio,
    NegativeRatio,
}

impl From<RegionArg> for Region {
    fn from(r: RegionArg) -> Self {
        match r {
            RegionArg::Natural => Region::Natural,
            RegionArg::PositiveRatio => Region::PositiveRatio,
            RegionArg::NegativeRatio => Region::NegativeRatio,
        }
    }
}

#[derive(Args, Debug, Clone, Default, PartialEq)]
pub struct Options {
    /// Generator family (meta, meta-dual, cga, ortho-chiral) or correlator
    /// family (ortho, schr, schr-ext, meta-naive, meta-final, cga, dual).
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Largest mode index checked.
    #[arg(long, global = true)]
    pub nmax: Option<i64>,
    /// Scaling dimension, shared by both bodies.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Rapidity, shared by both bodies.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub nu1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub nu2: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Mass of the first body in the causal Schrödinger form.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m1: Option<f64>,
    /// Time separation used by singularity-demo.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// nu1 + nu2 for the Hardy-class commands.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub nu_sum: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Offset of the integration line in hardy-m2.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v: Option<f64>,
    /// Number of samples of the discrete transform.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Window length of the discrete transform.
    #[arg(long, global = true)]
    pub l: Option<f64>,
    /// CSV grid with header t,r,zeta1,zeta2.
    #[arg(long, global = true)]
    pub grid: Option<PathBuf>,
    /// Sub-region for ward-residual.
    #[arg(long, global = true, value_enum)]
    pub region: Option<RegionArg>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Evaluate the final form with gamma < 0 on its literal branch.
    #[arg(long, global = true)]
    pub literal_negative_rapidity: bool,
    /// Flip the sign of the rapidity term of Y_0 (testing aid).
    #[arg(long, global = true, hide = true)]
    pub mutate: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] metaward::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Exit code and rendered report of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
}

#[derive(Clone, Debug, Default)]
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

struct Report {
    pass: bool,
    parameters: BTreeMap<String, Value>,
    tolerance: Option<f64>,
    text: String,
    json: Value,
    table: Option<Table>,
}

/// 17 significant digits, locale independent.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Runs one subcommand. Never panics on bad input: usage and domain errors
/// come back as exit code 2 with the message as output.
pub fn run(config: &RunConfig) -> Outcome {
    let default_format = match config.command {
        Command::CorrelatorTable | Command::SingularityDemo => Format::Csv,
        _ => Format::Text,
    };
    let format = config.options.format.unwrap_or(default_format);
    let result = dispatch(config).and_then(|report| render(config, format, &report).map(|out| (report.pass, out)));
    match result {
        Ok((pass, output)) => Outcome {
            code: if pass { EXIT_PASS } else { EXIT_FAIL },
            output,
        },
        Err(e) => Outcome {
            code: EXIT_USAGE,
            output: format!("error: {e}\n"),
        },
    }
}

/// Runs and writes the report to `--out` (or returns it for stdout).
pub fn run_to_destination(config: &RunConfig) -> Outcome {
    let outcome = run(config);
    match (&config.options.out, outcome.code) {
        (Some(path), EXIT_PASS | EXIT_FAIL) => match std::fs::write(path, &outcome.output) {
            Ok(()) => Outcome {
                code: outcome.code,
                output: String::new(),
            },
            Err(e) => Outcome {
                code: EXIT_USAGE,
                output: format!("error: {}: {e}\n", path.display()),
            },
        },
        _ => outcome,
    }
}

fn dispatch(config: &RunConfig) -> CliResult<Report> {
    let o = &config.options;
    match &config.command {
        Command::AlgebraCheck => algebra_check(o),
        Command::NCheck => n_check(o),
        Command::DynsymCheck => dynsym_check(o),
        Command::ChiralCheck => chiral_check(o),
        Command::Contract => contract(o),
        Command::WardResidual => ward(o),
        Command::ReducedSystem => reduced_system(o),
        Command::WCollapse => w_collapse(o),
        Command::CorrelatorTable => correlator_table(o),
        Command::Properties => properties(o),
        Command::HardyM2 => hardy_m2(o),
        Command::HardySpectrum => hardy_spectrum(o),
        Command::Roundtrip => roundtrip(o),
        Command::SingularityDemo => singularity(o),
        Command::Commutator { a, b } => commutator(a, b),
    }
}

fn render(config: &RunConfig, format: Format, report: &Report) -> CliResult<String> {
    match format {
        Format::Text => Ok(report.text.clone()),
        Format::Json => {
            let mut envelope = serde_json::Map::new();
            envelope.insert("tool".into(), json!(TOOL));
            envelope.insert("version".into(), json!(VERSION));
            envelope.insert("command".into(), json!(config.command.name()));
            envelope.insert("parameters".into(), json!(report.parameters));
            if let Some(tol) = report.tolerance {
                envelope.insert("tolerance".into(), json!(tol));
            }
            envelope.insert("pass".into(), json!(report.pass));
            envelope.insert("report".into(), report.json.clone());
            let mut s = serde_json::to_string_pretty(&Value::Object(envelope))
                .map_err(|e| CliError::usage(format!("cannot serialize report: {e}")))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let table = report
                .table
                .as_ref()
                .ok_or_else(|| CliError::usage(format!("no CSV form for {}", config.command.name())))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::usage(format!("cannot write CSV: {e}"));
            w.write_record(&table.header).map_err(io)?;
            for row in &table.rows {
                w.write_record(row).map_err(io)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| CliError::usage(format!("cannot write CSV: {e}")))?;
            String::from_utf8(bytes).map_err(|e| CliError::usage(e.to_string()))
        }
    }
}

fn to_json(value: &impl serde::Serialize) -> Value {
    serde_json::to_value(value).expect("reports serialize")
}

#[derive(Deserialize)]
struct GridRow {
    t: f64,
    r: f64,
    #[serde(default)]
    zeta1: f64,
    #[serde(default)]
    zeta2: f64,
}

/// Reads a grid file with header `t,r,zeta1,zeta2` (the dual coordinates may
/// be omitted and default to zero).
pub fn read_grid(path: &Path) -> CliResult<Grid> {
    let io = |message: String| CliError::Io {
        path: path.display().to_string(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io(e.to_string()))?;
    let mut points = Vec::new();
    for row in reader.deserialize::<GridRow>() {
        let row = row.map_err(|e| io(e.to_string()))?;
        points.push(FieldPoint::with_zeta(row.t, row.r, row.zeta1, row.zeta2));
    }
    if points.is_empty() {
        return Err(io("grid file has no points".into()));
    }
    Ok(Grid::from_points(points))
}

fn grid_or(o: &Options, default: impl FnOnce() -> Grid, params: &mut BTreeMap<String, Value>) -> CliResult<Grid> {
    match &o.grid {
        Some(path) => {
            params.insert("grid".into(), json!(path.display().to_string()));
            read_grid(path)
        }
        None => {
            params.insert("grid".into(), json!("standard"));
            Ok(default())
        }
    }
}

// ---------------------------------------------------------------------------
// Algebra

fn algebra_family(o: &Options, default: Family) -> CliResult<Family> {
    match &o.family {
        Some(s) => Family::from_str(s).map_err(CliError::from),
        None => Ok(default),
    }
}

fn n_max(o: &Options) -> i64 {
    o.nmax.unwrap_or(3)
}

fn exact(name: &str, x: f64) -> CliResult<GaussianRational> {
    GaussianRational::from_f64(x).ok_or_else(|| CliError::usage(format!("--{name} must be finite")))
}

/// Numeric values for the representation parameters that were given; the
/// others stay formal.
fn param_values(o: &Options, params: &mut BTreeMap<String, Value>) -> CliResult<ParamValues> {
    if o.mu.is_some() {
        return Err(CliError::usage("mu is a ring variable in exact checks and cannot be assigned"));
    }
    if o.nu1.is_some() != o.nu2.is_some() || o.nu1 != o.nu2 {
        return Err(CliError::usage("exact checks take a single nu: pass equal --nu1 and --nu2"));
    }
    let mut values = ParamValues::formal();
    for (name, var, value) in [("x", Var::X, o.x), ("gamma", Var::Gamma, o.gamma), ("nu", Var::Nu, o.nu1), ("c", Var::C, o.c)] {
        match value {
            Some(v) => {
                values = values.with(var, exact(name, v)?);
                params.insert(name.into(), json!(v));
            }
            None => {
                params.insert(name.into(), json!("formal"));
            }
        }
    }
    Ok(values)
}

/// The standard factory with the rapidity term of `Y_0` sign-flipped.
struct Mutated {
    family: Family,
    params: ParamValues,
}

impl GeneratorSource for Mutated {
    fn generator(&self, kind: Kind, n: i64) -> metaward::Result<DiffOp> {
        let op = make_generator(&GeneratorSpec::new(self.family, kind, n))?;
        let op = if kind == Kind::Y && n == 0 {
            let scalar = DiffOp::scalar(op.scalar_part());
            let gamma_free = scalar.substitute(Var::Gamma, &GaussianRational::zero())?;
            let gamma_term = scalar.checked_sub(&gamma_free)?;
            op.checked_sub(&gamma_term.scale(&GaussianRational::from_int(2)))?
        } else {
            op
        };
        self.params.apply(op)
    }
}

fn algebra_text(title: &str, report: &AlgebraReport) -> String {
    let mut s = String::new();
    let failures: Vec<_> = report.failures().collect();
    let _ = writeln!(
        s,
        "{title}: {} relations, {}",
        report.pairs.len(),
        if failures.is_empty() { "all zero".to_string() } else { format!("{} non-zero", failures.len()) }
    );
    for f in failures {
        let _ = writeln!(s, "  FAIL {} = {}", f.relation, f.residual_text);
    }
    s
}

fn algebra_table(reports: &[&AlgebraReport]) -> Table {
    let mut t = Table::new(&["family", "lhs", "rhs", "relation", "zero", "residual"]);
    for r in reports {
        for p in &r.pairs {
            t.push(vec![
                r.family.clone(),
                p.lhs.clone(),
                p.rhs.clone(),
                p.relation.clone(),
                p.zero.to_string(),
                p.residual_text.clone(),
            ]);
        }
    }
    t
}

fn algebra_report(params: BTreeMap<String, Value>, titled: Vec<(String, AlgebraReport)>) -> Report {
    let pass = titled.iter().all(|(_, r)| r.all_zero);
    let text: String = titled.iter().map(|(title, r)| algebra_text(&format!("{title} [{}]", r.family), r)).collect();
    let reports: Vec<AlgebraReport> = titled.into_iter().map(|(_, r)| r).collect();
    let json = if reports.len() == 1 { to_json(&reports[0]) } else { to_json(&reports) };
    let table = Some(algebra_table(&reports.iter().collect::<Vec<_>>()));
    Report {
        pass,
        parameters: params,
        tolerance: None,
        text,
        json,
        table,
    }
}

fn algebra_check(o: &Options) -> CliResult<Report> {
    let family = algebra_family(o, Family::Meta)?;
    let n = n_max(o);
    let mut params = BTreeMap::from([
        ("family".to_string(), json!(family.label())),
        ("nmax".to_string(), json!(n)),
        ("mutate".to_string(), json!(o.mutate)),
    ]);
    let report = if family == Family::OrthoChiral {
        if o.mutate {
            return Err(CliError::usage("--mutate needs a family with Y generators"));
        }
        verify_structure_constants(family, n)?
    } else {
        let values = param_values(o, &mut params)?;
        if o.mutate {
            verify_structure_constants_with(&Mutated { family, params: values }, family, n)?
        } else {
            verify_structure_constants_with(&Factory::with_params(family, values), family, n)?
        }
    };
    Ok(algebra_report(params, vec![(format!("structure constants, nmax {n}"), report)]))
}

fn n_check(o: &Options) -> CliResult<Report> {
    let n = n_max(o);
    let mut params = BTreeMap::from([("family".to_string(), json!("meta-dual")), ("nmax".to_string(), json!(n))]);
    let values = param_values(o, &mut params)?;
    let report = verify_n_extension_with(n, &values)?;
    Ok(algebra_report(params, vec![(format!("N extension, nmax {n}"), report)]))
}

fn dynsym_check(o: &Options) -> CliResult<Report> {
    let n = n_max(o);
    let params = BTreeMap::from([("family".to_string(), json!("meta")), ("nmax".to_string(), json!(n))]);
    let reports = vec![
        (format!("dynamical symmetry, nmax {n}"), verify_dynamical_symmetry(n)?),
        (format!("solution space invariance, nmax {n}"), verify_solution_space_invariance(n)?),
    ];
    Ok(algebra_report(params, reports))
}

fn chiral_check(o: &Options) -> CliResult<Report> {
    let n = n_max(o);
    let params = BTreeMap::from([("family".to_string(), json!("ortho-chiral")), ("nmax".to_string(), json!(n))]);
    let report = verify_chiral_isomorphism(n)?;
    Ok(algebra_report(params, vec![(format!("chiral pair, nmax {n}"), report)]))
}

fn contract(o: &Options) -> CliResult<Report> {
    let n = n_max(o);
    let params = BTreeMap::from([("family".to_string(), json!("meta")), ("nmax".to_string(), json!(n))]);
    let c = contract_cga(n)?;
    let mut report = algebra_report(params, vec![(format!("contraction mu -> 0, nmax {n}"), c.report.clone())]);
    let mut text = String::new();
    for (label, op) in &c.generators {
        let _ = writeln!(text, "{label} = {op}");
    }
    text.push_str(&report.text);
    report.text = text;
    let generators: Vec<Value> = c
        .generators
        .iter()
        .map(|(label, op)| json!({ "label": label, "operator": op.to_string() }))
        .collect();
    report.json = json!({ "generators": generators, "report": c.report });
    Ok(report)
}

fn commutator(a: &str, b: &str) -> CliResult<Report> {
    let lhs = parse_op_expr(a)?;
    let rhs = parse_op_expr(b)?;
    let bracket = lhs.commutator(&rhs)?;
    let text = format!("{bracket}\n");
    let mut table = Table::new(&["a", "b", "commutator"]);
    table.push(vec![lhs.to_string(), rhs.to_string(), bracket.to_string()]);
    Ok(Report {
        pass: true,
        parameters: BTreeMap::from([("a".to_string(), json!(a)), ("b".to_string(), json!(b))]),
        tolerance: None,
        text,
        json: json!({ "a": lhs.to_string(), "b": rhs.to_string(), "commutator": bracket.to_string(), "zero": bracket.is_zero() }),
        table: Some(table),
    })
}

// ---------------------------------------------------------------------------
// Correlators

fn correlator_params(o: &Options, params: &mut BTreeMap<String, Value>) -> CorrelatorParams {
    let mut p = CorrelatorParams::default();
    if let Some(x) = o.x {
        p = p.with_x(x);
    }
    if let Some(g) = o.gamma {
        p = p.with_gamma(g);
    }
    p = p.with_nu(o.nu1.unwrap_or(p.nu1), o.nu2.unwrap_or(p.nu2));
    if let Some(mu) = o.mu {
        p = p.with_mu(mu);
    }
    if let Some(c) = o.c {
        p.c = c;
    }
    if let Some(m1) = o.m1 {
        p.m1 = m1;
    }
    p.literal_negative_rapidity = o.literal_negative_rapidity;
    for (k, v) in [
        ("x", p.x1),
        ("gamma", p.gamma1),
        ("nu1", p.nu1),
        ("nu2", p.nu2),
        ("mu", p.mu),
        ("c", p.c),
        ("m1", p.m1),
    ] {
        params.insert(k.into(), json!(v));
    }
    if p.literal_negative_rapidity {
        params.insert("literal_negative_rapidity".into(), json!(true));
    }
    p
}

fn correlator_family(s: &str) -> CliResult<CorrelatorFamily> {
    CorrelatorFamily::from_str(s).map_err(CliError::from)
}

fn residual_text(r: &ResidualReport, tol: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} on {}: {} points, max relative residual {:.3e} (tol {:e}) {}",
        r.field,
        r.domain,
        r.points,
        r.max_rel,
        tol,
        if r.passes(tol) { "PASS" } else { "FAIL" }
    );
    for g in &r.generators {
        let _ = writeln!(s, "  {:<16} max abs {:.3e}  max rel {:.3e}", g.id, g.max_abs, g.max_rel);
    }
    s
}

fn residual_table(reports: &[ResidualReport]) -> Table {
    let mut t = Table::new(&["field", "generator", "points", "max_abs", "max_rel"]);
    for r in reports {
        for g in &r.generators {
            t.push(vec![r.field.clone(), g.id.clone(), r.points.to_string(), num(g.max_abs), num(g.max_rel)]);
        }
    }
    t
}

fn residual_report(params: BTreeMap<String, Value>, tol: f64, reports: Vec<ResidualReport>) -> Report {
    Report {
        pass: reports.iter().all(|r| r.passes(tol)),
        parameters: params,
        tolerance: Some(tol),
        text: reports.iter().map(|r| residual_text(r, tol)).collect(),
        table: Some(residual_table(&reports)),
        json: to_json(&reports),
    }
}

fn ward(o: &Options) -> CliResult<Report> {
    let tol = o.tol.unwrap_or(WARD_TOL);
    let mut params = BTreeMap::new();
    let base = correlator_params(o, &mut params);
    let families = match &o.family {
        Some(s) => vec![correlator_family(s)?],
        None => vec![CorrelatorFamily::MetaNaive, CorrelatorFamily::MetaFinal, CorrelatorFamily::Dual],
    };
    params.insert("families".into(), json!(families.iter().map(|f| f.label()).collect::<Vec<_>>()));
    if let Some(r) = o.region {
        params.insert("region".into(), to_json(&Region::from(r)));
    }
    let explicit_grid = match &o.grid {
        Some(path) => {
            params.insert("grid".into(), json!(path.display().to_string()));
            Some(read_grid(path)?)
        }
        None => {
            params.insert("grid".into(), json!("standard"));
            None
        }
    };
    let mut reports = Vec::new();
    for family in families {
        let (generators, default_region) = match family {
            CorrelatorFamily::MetaNaive => (meta_ward_generators()?, Region::Natural),
            CorrelatorFamily::MetaFinal => (meta_ward_generators()?, Region::PositiveRatio),
            CorrelatorFamily::Dual => (dual_ward_generators()?, Region::Natural),
            other => {
                return Err(CliError::usage(format!(
                    "no Ward identity for `{other}`: use meta-naive, meta-final or dual"
                )))
            }
        };
        let region = o.region.map(Region::from).unwrap_or(default_region);
        let grid = explicit_grid.clone().unwrap_or_else(|| Grid::for_family(family));
        let spec = CorrelatorSpec::new(family, base);
        reports.push(ward_residual_on(&generators, &spec, region, &grid)?);
    }
    Ok(residual_report(params, tol, reports))
}

fn reduced_system(o: &Options) -> CliResult<Report> {
    let tol = o.tol.unwrap_or(WARD_TOL);
    let mut params = BTreeMap::new();
    let p = correlator_params(o, &mut params);
    let grid = grid_or(o, || Grid::standard(true), &mut params)?;
    let ops = build_reduced_system()?;
    let spec = CorrelatorSpec::new(CorrelatorFamily::Dual, p);
    let r = ward_residual_on(&ops, &spec, Region::Natural, &grid)?;
    let mut report = residual_report(params, tol, vec![r.clone()]);
    let mut text = String::new();
    for (label, op) in &ops {
        let _ = writeln!(text, "{label}: {op} = 0");
    }
    text.push_str(&report.text);
    report.text = text;
    let system: Vec<Value> = ops
        .iter()
        .map(|(label, op)| json!({ "label": label, "operator": op.to_string() }))
        .collect();
    report.json = json!({ "system": system, "residual": r });
    Ok(report)
}

fn w_collapse(o: &Options) -> CliResult<Report> {
    let tol = o.tol.unwrap_or(W_COLLAPSE_TOL);
    let mut params = BTreeMap::new();
    let p = correlator_params(o, &mut params);
    let nu_sum = o.nu_sum.unwrap_or(p.nu_sum());
    params.insert("nu_sum".into(), json!(nu_sum));
    let r = w_collapse_check(nu_sum, p.mu, &default_w_samples(p.mu))?;
    let pass = r.max_curve_gap <= tol && r.max_partner_gap <= tol;
    let text = format!(
        "w collapse, nu_sum {nu_sum}, mu {}: {} samples, max gap to w^-nu {:.3e}, max gap to equal-w partner {:.3e} (tol {tol:e}) {}\n",
        p.mu,
        r.samples.len(),
        r.max_curve_gap,
        r.max_partner_gap,
        if pass { "PASS" } else { "FAIL" }
    );
    let mut table = Table::new(&["u", "v", "w_re", "w_im", "g_re", "g_im", "curve_gap", "partner_u", "partner_gap"]);
    for s in &r.samples {
        table.push(vec![
            num(s.u),
            num(s.v),
            num(s.w.re),
            num(s.w.im),
            num(s.g.re),
            num(s.g.im),
            num(s.curve_gap),
            opt_num(s.partner_u),
            opt_num(s.partner_gap),
        ]);
    }
    Ok(Report {
        pass,
        parameters: params,
        tolerance: Some(tol),
        text,
        json: to_json(&r),
        table: Some(table),
    })
}

fn correlator_table(o: &Options) -> CliResult<Report> {
    let family = correlator_family(o.family.as_deref().unwrap_or("meta-final"))?;
    let mut params = BTreeMap::from([("family".to_string(), json!(family.label()))]);
    let p = correlator_params(o, &mut params);
    let grid = grid_or(o, || Grid::for_family(family), &mut params)?;
    let spec = CorrelatorSpec::new(family, p);
    let zeta = family.uses_zeta();
    let mut header = vec!["family", "x1", "gamma1", "mu", "t", "r", "re", "im"];
    if zeta {
        header.extend(["zeta1", "zeta2"]);
    }
    let mut table = Table::new(&header);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for pt in &grid.points {
        match spec.eval(pt) {
            Ok(v) => {
                let mut row = vec![
                    family.label().to_string(),
                    num(p.x1),
                    num(p.gamma1),
                    num(p.mu),
                    num(pt.t),
                    num(pt.r),
                    num(v.re),
                    num(v.im),
                ];
                if zeta {
                    row.extend([num(pt.zeta1), num(pt.zeta2)]);
                }
                table.push(row);
                rows.push(json!({ "point": pt, "re": v.re, "im": v.im }));
            }
            Err(e) => skipped.push(json!({ "point": pt, "reason": e.to_string() })),
        }
    }
    if rows.is_empty() {
        return Err(metaward::Error::EmptyGrid.into());
    }
    let mut text = format!("{family}: {} values, {} points outside the domain\n", rows.len(), skipped.len());
    for row in &table.rows {
        let _ = writeln!(text, "  t {} r {}  {} {}", row[4], row[5], row[6], row[7]);
    }
    Ok(Report {
        pass: true,
        parameters: params,
        tolerance: None,
        text,
        json: json!({ "values": rows, "skipped": skipped }),
        table: Some(table),
    })
}

fn singularity(o: &Options) -> CliResult<Report> {
    let mu = o.mu.unwrap_or(1.0);
    let gamma = o.gamma.unwrap_or(1.0);
    let x = o.x.unwrap_or(0.0);
    let t = o.t.unwrap_or(1.0);
    let params = BTreeMap::from([
        ("mu".to_string(), json!(mu)),
        ("gamma".to_string(), json!(gamma)),
        ("x".to_string(), json!(x)),
        ("t".to_string(), json!(t)),
    ]);
    let r = singularity_demo(mu, gamma, x, t)?;
    let mut table = Table::new(&["eps", "r_over_t", "value", "status"]);
    let mut text = format!("naive form approaching r/t = -1/mu (mu {mu}, gamma {gamma}, x {x}, t {t})\n");
    for row in &r.rows {
        table.push(vec![num(row.eps), num(row.r_over_t), opt_num(row.value), row.status.clone()]);
        let value = row.value.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(text, "  eps {:<8e} r/t {:<22} {value:<14} {}", row.eps, row.r_over_t, row.status);
    }
    let _ = writeln!(text, "divergence flagged: {}", r.divergence_flagged);
    Ok(Report {
        pass: r.divergence_flagged,
        parameters: params,
        tolerance: None,
        text,
        json: to_json(&r),
        table: Some(table),
    })
}

fn properties(o: &Options) -> CliResult<Report> {
    let mut params = BTreeMap::new();
    let p = correlator_params(o, &mut params);
    let grid = grid_or(o, || Grid::standard(false), &mut params)?;
    let singular_x = o.x.unwrap_or(0.0);
    params.insert("singularity_x".into(), json!(singular_x));
    let mut table = Table::new(&["property", "family", "metric", "value", "pass"]);
    let mut text = String::new();
    let mut pass = true;
    let mut json_parts = serde_json::Map::new();
    let mut record = |property: &str, family: &str, metric: &str, value: f64, ok: bool, table: &mut Table| {
        pass &= ok;
        table.push(vec![property.into(), family.into(), metric.into(), num(value), ok.to_string()]);
        let _ = writeln!(
            text,
            "{:<12} {:<11} {metric} = {value:.3e} {}",
            property,
            family,
            if ok { "PASS" } else { "FAIL" }
        );
    };
    let gated = [CorrelatorFamily::Ortho, CorrelatorFamily::MetaFinal, CorrelatorFamily::Cga];
    let mut sym = Vec::new();
    for f in gated {
        let r = check_symmetry(&CorrelatorSpec::new(f, p), &grid)?;
        record("symmetry", f.label(), "max_rel_gap", r.max_rel_gap, r.pass, &mut table);
        sym.push(r);
    }
    json_parts.insert("symmetry".into(), to_json(&sym));
    let c = check_causality(&p, &grid)?;
    record("causality", "schr-ext", "acausal_nonzero", c.acausal_nonzero as f64, c.pass, &mut table);
    json_parts.insert("causality".into(), to_json(&c));
    let mut bounded = Vec::new();
    for f in gated {
        let r = check_boundedness(&CorrelatorSpec::new(f, p), 1.0, 1.0)?;
        record("boundedness", f.label(), "bound_violations", r.bound_violations as f64, r.pass, &mut table);
        bounded.push(r);
    }
    json_parts.insert("boundedness".into(), to_json(&bounded));
    let s = singularity_demo(p.mu, p.gamma1, singular_x, 1.0)?;
    let peak = s.rows.iter().filter_map(|r| r.value).fold(0.0, f64::max);
    record("divergence", "meta-naive", "peak_value", peak, s.divergence_flagged, &mut table);
    json_parts.insert("divergence".into(), to_json(&s));
    let l = contraction_limit_check(p.gamma1, p.x1, &CONTRACTION_MUS, &grid)?;
    let last = l.steps.last().map(|s| s.max_rel_gap).unwrap_or(f64::NAN);
    record("limit", "meta-final", "final_rel_gap", last, l.pass, &mut table);
    json_parts.insert("limit".into(), to_json(&l));
    Ok(Report {
        pass,
        parameters: params,
        tolerance: Some(SYMMETRY_TOL),
        text,
        json: Value::Object(json_parts),
        table: Some(table),
    })
}

// ---------------------------------------------------------------------------
// Hardy class

fn m2_text(r: &M2Report, tol: f64) -> String {
    format!(
        "nu_sum {:<5} lambda {:<4} v {:<4} numeric {:.15e} closed {:.15e} rel gap {:.2e} {}\n",
        r.params.nu_sum,
        r.params.lambda,
        r.params.v,
        r.value,
        r.closed_form,
        r.rel_gap,
        if r.rel_gap <= tol { "PASS" } else { "FAIL" }
    )
}

fn hardy_m2(o: &Options) -> CliResult<Report> {
    let tol = o.tol.unwrap_or(M2_TOL);
    let single = o.nu_sum.is_some() || o.lambda.is_some() || o.v.is_some();
    let (reports, params) = if single {
        let hp = HardyParams::new(o.nu_sum.unwrap_or(2.0), o.lambda.unwrap_or(1.0), o.v.unwrap_or(0.0));
        let params = BTreeMap::from([
            ("nu_sum".to_string(), json!(hp.nu_sum)),
            ("lambda".to_string(), json!(hp.lambda)),
            ("v".to_string(), json!(hp.v)),
        ]);
        (vec![m2_report(&hp, M2_QUADRATURE_TOL)?], params)
    } else {
        (m2_battery(M2_QUADRATURE_TOL)?, BTreeMap::from([("battery".to_string(), json!(true))]))
    };
    let mut params = params;
    params.insert("quadrature_tol".into(), json!(M2_QUADRATURE_TOL));
    let mut table = Table::new(&["nu_sum", "lambda", "v", "value", "closed_form", "rel_gap", "abs_error_estimate", "evaluations"]);
    for r in &reports {
        table.push(vec![
            num(r.params.nu_sum),
            num(r.params.lambda),
            num(r.params.v),
            num(r.value),
            num(r.closed_form),
            num(r.rel_gap),
            num(r.abs_error_estimate),
            r.evaluations.to_string(),
        ]);
    }
    Ok(Report {
        pass: reports.iter().all(|r| r.rel_gap <= tol),
        parameters: params,
        tolerance: Some(tol),
        text: reports.iter().map(|r| m2_text(r, tol)).collect(),
        json: if single { to_json(&reports[0]) } else { to_json(&reports) },
        table: Some(table),
    })
}

fn hardy_spectrum(o: &Options) -> CliResult<Report> {
    let nu_sum = o.nu_sum.unwrap_or(2.0);
    let lambda = o.lambda.unwrap_or(1.0);
    let n = o.n.unwrap_or(SPECTRUM_DEFAULT_N);
    let l = o.l.unwrap_or(SPECTRUM_DEFAULT_L);
    let params = BTreeMap::from([
        ("nu_sum".to_string(), json!(nu_sum)),
        ("lambda".to_string(), json!(lambda)),
        ("n".to_string(), json!(n)),
        ("l".to_string(), json!(l)),
    ]);
    let r = spectral_onesidedness(nu_sum, lambda, n, l)?;
    let text = format!(
        "spectrum of (z + {lambda} i)^-{nu_sum}, N {n}, L {l}, {} window: positive {:.6e}, negative {:.6e}, forbidden {:.3e}, energy gap {:.2e}, verdict {:?}\n",
        r.window, r.positive_fraction, r.negative_fraction, r.forbidden_fraction, r.energy_rel_gap, r.verdict
    );
    let mut table = Table::new(&["nu_sum", "lambda", "n", "l", "positive_fraction", "negative_fraction", "forbidden_fraction", "tail_fraction", "energy_rel_gap", "verdict"]);
    table.push(vec![
        num(nu_sum),
        num(lambda),
        n.to_string(),
        num(l),
        num(r.positive_fraction),
        num(r.negative_fraction),
        num(r.forbidden_fraction),
        num(r.tail_fraction),
        num(r.energy_rel_gap),
        to_json(&r.verdict).as_str().unwrap_or_default().to_string(),
    ]);
    Ok(Report {
        pass: r.verdict == Verdict::Pass,
        parameters: params,
        tolerance: None,
        text,
        json: to_json(&r),
        table: Some(table),
    })
}

fn roundtrip(o: &Options) -> CliResult<Report> {
    let nu_sum = o.nu_sum.unwrap_or(2.0);
    let lambda = o.lambda.unwrap_or(1.0);
    let n = o.n.unwrap_or(ROUNDTRIP_DEFAULT_N);
    let l = o.l.unwrap_or(ROUNDTRIP_DEFAULT_L);
    let params = BTreeMap::from([
        ("nu_sum".to_string(), json!(nu_sum)),
        ("lambda".to_string(), json!(lambda)),
        ("n".to_string(), json!(n)),
        ("l".to_string(), json!(l)),
    ]);
    let r = dualization_roundtrip(nu_sum, lambda, n, l)?;
    let mut text = format!(
        "round trip nu_sum {nu_sum}, lambda {lambda}, N {n}, L {l}: shape deviation {:.3e} on {} bins (worst gamma {:.4}), reconstruction gap {:.3e} {}\n",
        r.max_shape_deviation,
        r.bulk_bins,
        r.worst_gamma,
        r.reconstruction_gap,
        if r.pass { "PASS" } else { "FAIL" }
    );
    let mut table = Table::new(&["check", "mu", "u", "gamma0", "lhs", "rhs", "rel_gap"]);
    table.push(vec!["shape".into(), String::new(), String::new(), String::new(), String::new(), String::new(), num(r.max_shape_deviation)]);
    table.push(vec!["reconstruction".into(), String::new(), String::new(), String::new(), String::new(), String::new(), num(r.reconstruction_gap)]);
    for b in &r.bridge {
        let _ = writeln!(text, "  exponent bridge mu {} u {} gamma0 {}: {:.16e} vs {:.16e}", b.mu, b.u, b.gamma0, b.lhs, b.rhs);
        table.push(vec!["bridge".into(), num(b.mu), num(b.u), num(b.gamma0), num(b.lhs), num(b.rhs), num(b.rel_gap)]);
    }
    Ok(Report {
        pass: r.pass,
        parameters: params,
        tolerance: None,
        text,
        json: to_json(&r),
        table: Some(table),
    })
}
