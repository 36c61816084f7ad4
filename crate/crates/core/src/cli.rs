//! Command-line front end. Every subcommand reads an optional JSON config,
//! applies flag overrides and writes JSON (single results) or CSV (sweeps).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::acceptance;
use crate::cutanalysis::{self, DEFAULT_T_GRID};
use crate::error::{Error, Result};
use crate::geodesy::{self, Label};
use crate::heatkernel;
use crate::laplace::{self, DiagonalForm, KernelMode, NewtonDiagram, RepresentationOptions};
use crate::manifold::{ModelManifold, Point, PolarDirection};
use crate::numerics::linalg::norm;

pub const THREADS_ENV: &str = "HEATCUT_THREADS";
const MIN_NODES: usize = 9;

#[derive(Debug, Parser)]
#[command(name = "heatcut", version, about = "Small-time heat kernel asymptotics at the cut locus")]
pub struct Cli {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the artifact here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Heat kernel values.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// `E_t` and its derivatives.
    #[command(subcommand)]
    Energy(EnergyCmd),
    /// Representation identities for the gradient and Hessian.
    #[command(subcommand)]
    Repr(ReprCmd),
    /// The midpoint measure `μ_t`.
    #[command(subcommand)]
    Mu(MuCmd),
    /// Newton diagrams and Laplace expansions.
    #[command(subcommand)]
    Laplace(LaplaceCmd),
    /// Cut locus analysis.
    #[command(subcommand)]
    Cut(CutCmd),
    /// Acceptance suite.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Debug, Subcommand)]
pub enum KernelCmd {
    /// `p_t(x,y)` as JSON.
    Eval(PairArgs),
}

#[derive(Debug, Subcommand)]
pub enum EnergyCmd {
    /// `E_t`, Varadhan gap, `∇_A E_t` and `∇²_{A,A} E_t` over the t grid, as CSV.
    Sweep(PairArgs),
}

#[derive(Debug, Subcommand)]
pub enum ReprCmd {
    CheckGrad(ReprArgs),
    CheckHess(ReprArgs),
}

#[derive(Debug, Args)]
pub struct ReprArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exact,
    Truncated,
}

#[derive(Debug, Subcommand)]
pub enum MuCmd {
    /// Cluster weights of `μ_t`, its limit and the leading forms, as JSON.
    Show(PairArgs),
}

#[derive(Debug, Subcommand)]
pub enum LaplaceCmd {
    /// Remoteness, multiplicity and nondegeneracy of a phase, as JSON.
    Diagram(DiagramArgs),
    /// Expansion of `∫ e^{−g/t} φ` for a diagonal phase `Σ u_j^{2k_j}`, as JSON.
    Expand(ExpandArgs),
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    /// Exponents separated by `;`, components by `,` (e.g. `2,2;6,0;0,6`).
    #[arg(long)]
    pub exponents: Option<String>,
    /// Coefficients, one per exponent (default 1).
    #[arg(long, value_delimiter = ',')]
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    /// `k_1,…,k_n` of the phase.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u32>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Amplitude: `one` (φ ≡ 1) or `exp` (φ = exp Σu_j).
    #[arg(long, value_enum, default_value_t = PhiArg::One)]
    pub phi: PhiArg,
    /// `∂_{u_j}∇_A E` at the midpoint, for the lower-order Hessian term.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub du_grad: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PhiArg {
    One,
    Exp,
}

#[derive(Debug, Subcommand)]
pub enum CutCmd {
    /// Labels and cut distances over a planar direction grid, as CSV.
    Map(DirectionArgs),
    /// `ρ` on the P directions of the grid, as CSV.
    Rho(DirectionArgs),
    /// Blow-up report for the pair, as JSON.
    ClassifyPair(PairArgs),
}

#[derive(Debug, Args)]
pub struct DirectionArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long)]
    pub directions: Option<usize>,
    /// Grid offset in units of the angular spacing.
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    /// Runs every criterion; prints a table and writes the JSON summary.
    All,
    /// Runs one criterion.
    Criterion { id: usize },
}

#[derive(Debug, Args, Default)]
pub struct PairArgs {
    /// `circle[:R]`, `sphere:n[:R]`, `torus:L1,L2,…` or a JSON object.
    #[arg(long)]
    pub model: Option<String>,
    /// Comma-separated coordinates, or `north`/`south` on spheres.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    /// Unit direction at x; with `--d` it replaces `--y`.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub nodes_per_axis: Option<usize>,
}

/// Config file contents. Every field is optional; flags take precedence.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Option<ModelManifold>,
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub theta: Option<Vec<f64>>,
    pub d: Option<f64>,
    pub t: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    pub a: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub nodes_per_axis: Option<usize>,
    pub directions: Option<usize>,
    pub exponents: Option<Vec<Vec<u32>>>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(g) = &self.t_grid {
            if g.is_empty() || g.iter().any(|t| !(*t > 0.0)) {
                return Err(Error::Config("field `t_grid`: times must be positive".into()));
            }
            if g.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::Config("field `t_grid`: times must be strictly decreasing".into()));
            }
        }
        if let Some(t) = self.t {
            if !(t > 0.0) {
                return Err(Error::Config(format!("field `t`: must be positive, got {t}")));
            }
        }
        if let Some(n) = self.nodes_per_axis {
            if n < MIN_NODES {
                return Err(Error::Config(format!("field `nodes_per_axis`: at least {MIN_NODES} required, got {n}")));
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) {
                return Err(Error::Config(format!("field `epsilon`: must be positive, got {e}")));
            }
        }
        if self.directions == Some(0) {
            return Err(Error::Config("field `directions`: must be positive".into()));
        }
        Ok(())
    }
}

/// Parses a number with an optional `pi` factor: `2pi`, `-pi/2`, `0.5*pi`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Usage(format!("cannot parse number `{s}`"));
    match s.find("pi") {
        None => s.parse().map_err(|_| bad()),
        Some(i) => {
            let head = s[..i].trim_end_matches('*');
            let coef = match head {
                "" | "+" => 1.0,
                "-" => -1.0,
                h => h.parse::<f64>().map_err(|_| bad())?,
            };
            let tail = &s[i + 2..];
            let div = match tail.strip_prefix('/') {
                Some(d) => d.parse::<f64>().map_err(|_| bad())?,
                None if tail.is_empty() => 1.0,
                None => return Err(bad()),
            };
            Ok(coef * std::f64::consts::PI / div)
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_number).collect()
}

pub fn parse_model(s: &str) -> Result<ModelManifold> {
    let s = s.trim();
    if s.starts_with('{') {
        return ModelManifold::from_json(s);
    }
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let parts: Vec<&str> = if rest.is_empty() { vec![] } else { rest.split(':').collect() };
    match (kind, parts.as_slice()) {
        ("circle", []) => ModelManifold::circle(1.0),
        ("circle", [r]) => ModelManifold::circle(parse_number(r)?),
        ("sphere", [n]) => ModelManifold::sphere(n.parse().map_err(|_| Error::InvalidModel(format!("bad dimension `{n}`")))?, 1.0),
        ("sphere", [n, r]) => {
            ModelManifold::sphere(n.parse().map_err(|_| Error::InvalidModel(format!("bad dimension `{n}`")))?, parse_number(r)?)
        }
        ("torus" | "flat_torus", [p]) => ModelManifold::torus(&parse_list(p)?),
        _ => Err(Error::InvalidModel(format!("cannot parse model `{s}`"))),
    }
}

fn parse_point_arg(m: &ModelManifold, s: &str) -> Result<Vec<f64>> {
    match (s.trim(), m) {
        ("north", ModelManifold::Sphere { .. }) => Ok(m.north().coords),
        ("south", ModelManifold::Sphere { .. }) => Ok(m.south().coords),
        _ => parse_list(s),
    }
}

/// Config merged with flags.
struct Resolved {
    cfg: ExperimentConfig,
    model: ModelManifold,
}

impl Resolved {
    fn new(config: &Option<PathBuf>, pair: &PairArgs, output: &Option<PathBuf>) -> Result<Self> {
        let mut cfg = Self::config_only(config)?;
        if let Some(s) = &pair.model {
            cfg.model = Some(parse_model(s)?);
        }
        let model = cfg.model.clone().ok_or_else(|| Error::Config("field `model`: required".into()))?;
        let field = |name: &str, e: Error| Error::Config(format!("field `{name}`: {e}"));
        if let Some(s) = &pair.x {
            cfg.x = Some(parse_point_arg(&model, s).map_err(|e| field("x", e))?);
        }
        if let Some(s) = &pair.y {
            cfg.y = Some(parse_point_arg(&model, s).map_err(|e| field("y", e))?);
        }
        if let Some(s) = &pair.theta {
            cfg.theta = Some(parse_list(s).map_err(|e| field("theta", e))?);
        }
        if let Some(s) = &pair.d {
            cfg.d = Some(parse_number(s).map_err(|e| field("d", e))?);
        }
        if let Some(s) = &pair.a {
            cfg.a = Some(parse_list(s).map_err(|e| field("a", e))?);
        }
        cfg.t = pair.t.or(cfg.t);
        cfg.t_grid = pair.t_grid.clone().or(cfg.t_grid);
        cfg.epsilon = pair.epsilon.or(cfg.epsilon);
        cfg.nodes_per_axis = pair.nodes_per_axis.or(cfg.nodes_per_axis);
        if output.is_some() {
            cfg.output = output.clone();
        }
        cfg.validate()?;
        Ok(Resolved { cfg, model })
    }

    fn config_only(config: &Option<PathBuf>) -> Result<ExperimentConfig> {
        let cfg = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn x(&self) -> Result<Point> {
        let c = self.cfg.x.clone().ok_or_else(|| Error::Config("field `x`: required".into()))?;
        self.model.point(c).map_err(|e| Error::Config(format!("field `x`: {e}")))
    }

    fn y(&self, x: &Point) -> Result<Point> {
        match (&self.cfg.y, &self.cfg.theta, self.cfg.d) {
            (Some(c), _, _) => self.model.point(c.clone()).map_err(|e| Error::Config(format!("field `y`: {e}"))),
            (None, Some(th), Some(d)) => {
                let th = self.theta_at(x, th)?;
                Ok(self.model.exp(x, &th.theta.iter().map(|v| v * d).collect::<Vec<_>>()))
            }
            _ => Err(Error::Config("field `y`: required (or `theta` with `d`)".into())),
        }
    }

    fn theta_at(&self, x: &Point, th: &[f64]) -> Result<PolarDirection> {
        let v = self.model.project_tangent(x, th);
        let n = norm(&v);
        if th.len() != self.model.ambient_dim() || !(n > 0.0) {
            return Err(Error::Config("field `theta`: must be a nonzero tangent vector at x".into()));
        }
        Ok(PolarDirection { theta: v.iter().map(|c| c / n).collect() })
    }

    fn t(&self) -> Result<f64> {
        self.cfg.t.ok_or_else(|| Error::Config("field `t`: required".into()))
    }

    fn t_grid(&self) -> Vec<f64> {
        self.cfg.t_grid.clone().unwrap_or_else(|| DEFAULT_T_GRID.to_vec())
    }

    /// `A` at `y`, defaulting to the first frame vector.
    fn a(&self, y: &Point) -> Result<Vec<f64>> {
        match &self.cfg.a {
            Some(a) if a.len() != self.model.ambient_dim() => {
                Err(Error::Config(format!("field `a`: expected {} components", self.model.ambient_dim())))
            }
            Some(a) => Ok(self.model.project_tangent(y, a)),
            None => Ok(self.model.tangent_frame(y)[0].clone()),
        }
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        let s = format!("{v:.16e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent present");
        format!("{mantissa}e{:+03}", exp.parse::<i32>().expect("integer exponent"))
    } else {
        format!("{v}")
    }
}

fn reformat(v: Value) -> Value {
    match v {
        Value::Number(n) if !n.is_i64() && !n.is_u64() => match n.as_f64() {
            Some(f) => Value::Number(fmt17(f).parse().expect("formatted float is valid JSON")),
            None => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(reformat).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, reformat(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with every float at 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::InternalFault(e.to_string()))?;
    serde_json::to_string_pretty(&reformat(v)).map(|s| s + "\n").map_err(|e| Error::InternalFault(e.to_string()))
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Csv { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    fn render(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InternalFault(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::InternalFault(e.to_string()))?)
            .map_err(|e| Error::InternalFault(e.to_string()))
    }
}

fn emit(text: &str, output: &Option<PathBuf>) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Error::InternalFault(e.to_string()))
        }
    }
}

fn theta_columns(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("theta_{i}")).collect()
}

#[derive(Serialize)]
struct KernelReport<'a> {
    model: &'a ModelManifold,
    x: &'a Point,
    y: &'a Point,
    distance: f64,
    kernel: heatkernel::KernelEvaluation,
}

#[derive(Serialize)]
struct MuReport {
    t: f64,
    epsilon: f64,
    nodes: usize,
    total: f64,
    cluster_weights: Vec<f64>,
    limit_weights: Option<Vec<f64>>,
    leading_forms: laplace::LeadingForms,
}

#[derive(Serialize)]
struct DiagramReport {
    remoteness: laplace::Remoteness,
    leading_term: laplace::LaplaceLeadingTerm,
    nondegeneracy: Option<laplace::Nondegeneracy>,
}

#[derive(Serialize)]
struct ExpandReport {
    exponents: Vec<u32>,
    t: f64,
    order: usize,
    leading_order: f64,
    expansion: f64,
    lower_order_term: Option<laplace::LowerOrderTerm>,
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    passed: usize,
    failed: usize,
    criteria: Vec<VerifyRow<'a>>,
}

#[derive(Serialize)]
struct VerifyRow<'a> {
    id: usize,
    name: &'a str,
    passed: bool,
    detail: &'a str,
}

fn parse_exponents(s: &str) -> Result<Vec<Vec<u32>>> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<u32>().map_err(|_| Error::Config(format!("field `exponents`: cannot parse `{v}`"))))
                .collect()
        })
        .collect()
}

fn verify(results: &[acceptance::CriterionResult], output: &Option<PathBuf>, default_path: &str) -> Result<i32> {
    for r in results {
        println!("{:>2}  {:<28} {}  {:>7.2}s  {}", r.id, r.name, if r.passed { "PASS" } else { "FAIL" }, r.elapsed_s, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let summary = VerifySummary {
        passed: results.len() - failed,
        failed,
        criteria: results.iter().map(|r| VerifyRow { id: r.id, name: r.name, passed: r.passed, detail: &r.detail }).collect(),
    };
    let path = output.clone().unwrap_or_else(|| PathBuf::from(default_path));
    emit(&to_json(&summary)?, &Some(path.clone()))?;
    println!("{} passed, {failed} failed; summary written to {}", summary.passed, path.display());
    Ok(if failed == 0 { 0 } else { 1 })
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let cfg_out = |pair: &PairArgs| Resolved::new(&cli.config, pair, &cli.output);
    match &cli.command {
        Command::Kernel(KernelCmd::Eval(p)) => {
            let r = cfg_out(p)?;
            let x = r.x()?;
            let y = r.y(&x)?;
            let kernel = heatkernel::heat_kernel(&r.model, r.t()?, &x, &y)?;
            let rep = KernelReport { model: &r.model, x: &x, y: &y, distance: r.model.distance(&x, &y), kernel };
            emit(&to_json(&rep)?, &r.cfg.output)?;
        }
        Command::Energy(EnergyCmd::Sweep(p)) => {
            let r = cfg_out(p)?;
            let x = r.x()?;
            let y = r.y(&x)?;
            let a = r.a(&y)?;
            let e = r.model.energy(&x, &y);
            let mut csv = Csv::new(["t", "energy_t", "energy", "varadhan_gap", "grad", "grad_error", "hess", "hess_error", "step_floored"]);
            for t in r.t_grid() {
                let et = heatkernel::energy_t(&r.model, t, &x, &y)?.value;
                let d = heatkernel::energy_derivatives(&r.model, t, &x, &y, &a)?;
                csv.rows.push(vec![
                    fmt17(t),
                    fmt17(et),
                    fmt17(e),
                    fmt17(e - et),
                    fmt17(d.grad.value),
                    fmt17(d.grad.error),
                    fmt17(d.hess.value),
                    fmt17(d.hess.error),
                    d.hess.step_floored.to_string(),
                ]);
            }
            emit(&csv.render()?, &r.cfg.output)?;
        }
        Command::Repr(cmd) => {
            let (args, hess) = match cmd {
                ReprCmd::CheckGrad(a) => (a, false),
                ReprCmd::CheckHess(a) => (a, true),
            };
            let r = cfg_out(&args.pair)?;
            let x = r.x()?;
            let y = r.y(&x)?;
            let a = r.a(&y)?;
            let mut opts = RepresentationOptions {
                epsilon: r.cfg.epsilon,
                mode: match args.mode {
                    ModeArg::Exact => KernelMode::Exact,
                    ModeArg::Truncated => KernelMode::Truncated,
                },
                ..Default::default()
            };
            if let Some(n) = r.cfg.nodes_per_axis {
                opts.nodes_per_axis = n;
            }
            if let Some(tol) = args.tolerance {
                opts.tolerance = tol;
            }
            let t = r.t()?;
            let c = if hess {
                laplace::representation_check_hess(&r.model, &x, &y, t, &a, &opts)?
            } else {
                laplace::representation_check_grad(&r.model, &x, &y, t, &a, &opts)?
            };
            emit(&to_json(&c)?, &r.cfg.output)?;
        }
        Command::Mu(MuCmd::Show(p)) => {
            let r = cfg_out(p)?;
            let x = r.x()?;
            let y = r.y(&x)?;
            let a = r.a(&y)?;
            let mut opts = laplace::MuOptions { epsilon: r.cfg.epsilon, ..Default::default() };
            if let Some(n) = r.cfg.nodes_per_axis {
                opts.nodes_per_axis = n;
            }
            let mu = laplace::mu_t_with(&r.model, &x, &y, r.t()?, &opts)?;
            let leading_forms = laplace::leading_forms_on(&r.model, &x, &y, &mu, &a)?;
            let rep = MuReport {
                t: mu.t,
                epsilon: mu.epsilon,
                nodes: mu.nodes.len(),
                total: mu.total(),
                cluster_weights: mu.cluster_weights(),
                limit_weights: laplace::limit_measure(&r.model, &x, &y).ok().map(|l| l.weights),
                leading_forms,
            };
            emit(&to_json(&rep)?, &r.cfg.output)?;
        }
        Command::Laplace(LaplaceCmd::Diagram(args)) => {
            let cfg = Resolved::config_only(&cli.config)?;
            let exps = match &args.exponents {
                Some(s) => parse_exponents(s)?,
                None => cfg.exponents.clone().ok_or_else(|| Error::Config("field `exponents`: required".into()))?,
            };
            let coefs = args.coefficients.clone().unwrap_or_else(|| vec![1.0; exps.len()]);
            if coefs.len() != exps.len() {
                return Err(Error::Config("field `coefficients`: one per exponent required".into()));
            }
            let d = NewtonDiagram::new(exps.into_iter().zip(coefs).collect())?;
            let rep = DiagramReport {
                remoteness: laplace::newton_remoteness(&d)?,
                leading_term: laplace::laplace_leading_term(&d)?,
                nondegeneracy: laplace::nondegeneracy_check(&d).ok(),
            };
            emit(&to_json(&rep)?, &cli.output.clone().or(cfg.output))?;
        }
        Command::Laplace(LaplaceCmd::Expand(args)) => {
            let cfg = Resolved::config_only(&cli.config)?;
            let t = args.t.or(cfg.t).ok_or_else(|| Error::Config("field `t`: required".into()))?;
            let form = DiagonalForm::new(args.k.clone())?;
            let expansion = match args.phi {
                PhiArg::One => laplace::diagonal_expansion(&form, |a| if a.iter().all(|v| *v == 0) { 1.0 } else { 0.0 }, t, args.order)?,
                PhiArg::Exp => laplace::diagonal_expansion(&form, |_| 1.0, t, args.order)?,
            };
            let lower_order_term = match &args.du_grad {
                Some(g) => Some(laplace::lower_order_hessian_term(&form, g, 1)?),
                None => None,
            };
            let lo = form.leading_order();
            let rep = ExpandReport {
                exponents: form.exponents.clone(),
                t,
                order: args.order,
                leading_order: *lo.numer() as f64 / *lo.denom() as f64,
                expansion,
                lower_order_term,
            };
            emit(&to_json(&rep)?, &cli.output.clone().or(cfg.output))?;
        }
        Command::Cut(CutCmd::Map(args)) | Command::Cut(CutCmd::Rho(args)) => {
            let rho = matches!(cli.command, Command::Cut(CutCmd::Rho(_)));
            let r = cfg_out(&args.pair)?;
            let x = r.x()?;
            let count = args.directions.or(r.cfg.directions).unwrap_or(360);
            if count == 0 {
                return Err(Error::Config("field `directions`: must be positive".into()));
            }
            let n = r.model.ambient_dim();
            let grid = geodesy::direction_grid(&r.model, &x, count, args.offset);
            let mut csv = if rho {
                Csv::new(theta_columns(n).into_iter().chain(["rho", "psi", "psi_tilde", "phi", "F"].map(String::from)))
            } else {
                Csv::new(theta_columns(n).into_iter().chain(["label", "cut_distance", "n_associates", "conjugacy"].map(String::from)))
            };
            for th in &grid {
                let c = geodesy::classify_theta(&r.model, &x, th)?;
                let mut row: Vec<String> = th.theta.iter().map(|v| fmt17(*v)).collect();
                if rho {
                    if c.label != Label::P {
                        continue;
                    }
                    let a = match &r.cfg.a {
                        Some(a) => a.clone(),
                        None => r.model.tangent_frame(&x)[0].clone(),
                    };
                    let s = cutanalysis::rho_on_p(&r.model, &x, th, &a)?;
                    let i = s.ingredients;
                    row.extend([s.rho, i.psi, i.psi_tilde, i.phi, i.f].map(fmt17));
                } else {
                    row.push(c.label.to_string());
                    row.push(fmt17(c.cut_distance));
                    row.push(c.n_associates().map_or("continuum".into(), |k| k.to_string()));
                    row.push(c.conjugacy.to_string());
                }
                csv.rows.push(row);
            }
            emit(&csv.render()?, &r.cfg.output)?;
        }
        Command::Cut(CutCmd::ClassifyPair(p)) => {
            let r = cfg_out(p)?;
            let x = r.x()?;
            let y = r.y(&x)?;
            let rep = cutanalysis::blowup_classifier(&r.model, &x, &y, &r.t_grid(), None)?;
            emit(&to_json(&rep)?, &r.cfg.output)?;
        }
        Command::Verify(VerifyCmd::All) => {
            let cfg = Resolved::config_only(&cli.config)?;
            return verify(&acceptance::run_all(), &cli.output.clone().or(cfg.output), "verify_summary.json");
        }
        Command::Verify(VerifyCmd::Criterion { id }) => {
            let cfg = Resolved::config_only(&cli.config)?;
            let res = acceptance::run_criterion(*id)?;
            return verify(&[res], &cli.output.clone().or(cfg.output), &format!("verify_criterion_{id}.json"));
        }
    }
    Ok(0)
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::Config(format!("{THREADS_ENV} must be positive")));
        }
        // a second call in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Entry point; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match init_threads().and_then(|_| execute(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Usage(_) | Error::InvalidModel(_) | Error::InvalidPoint(_) => 2,
                _ => 1,
            }
        }
    }
}
