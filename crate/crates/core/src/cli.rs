//! The `covlab` experiment runner.
//!
//! Results go to stdout as one JSON object per line; diagnostics go to stderr
//! in the same form. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | internal error |
//! | 2 | bad configuration or arguments |
//! | 3 | validation failed |
//! | 4 | I/O or malformed input file |
//! | 5 | budget exhausted without reaching the target |

use crate::covering::{
    besicovitch_select, disjoint_color, greedy_5r_cover, uncovered_centers, verify_5r_cover,
    verify_extraction, vitali_extract, AdmissiblePolicy,
};
use crate::error::Error;
use crate::exec::Execution;
use crate::io::{read_balls, read_measure};
use crate::measure::{
    alpha_grid, density_representation_check, lebesgue_decompose, random_grid_functions,
    AtomicMeasure, MaximalOperator, Weak11Report,
};
use crate::metric::{MetricSpec, DEFAULT_STRICT_MARGIN};
use crate::report::{summarize, RunReport};
use crate::wbcp::{
    grow_family_with, import_certificate, search_target, write_certificate, Certificate,
    SearchBudget, DEFAULT_PRECISION,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const OUT_DIR_ENV: &str = "COVLAB_OUT_DIR";

pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const IO: i32 = 4;
    pub const BUDGET: i32 = 5;
}

#[derive(Debug, Parser)]
#[command(
    name = "covlab",
    version,
    about = "Covering properties of metric spaces: searches, covers, measure experiments"
)]
pub struct Cli {
    /// TOML file with default values for any flag; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file (certificates, reports) or directory (report tables).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Directory for automatically named outputs.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,

    /// Run on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a Besicovitch family and write its certificate.
    Search {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Family size to look for; without it, sizes 1, 2, ... up to --max-k are tried.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        max_k: Option<usize>,
        #[arg(long)]
        radius_cap: Option<f64>,
    },
    /// Re-validate a certificate.
    Validate {
        file: PathBuf,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Add one ball to a certified family.
    Grow {
        file: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run a covering algorithm on a ball file and verify its guarantees.
    Cover {
        balls: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::FiveR)]
        algo: Algo,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Disjoint extraction of balls exhausting an atomic measure.
    Extract {
        #[arg(long)]
        balls: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_enum, default_value_t = Policy::Finest)]
        policy: Policy,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Measure differentiation experiments.
    Diff {
        #[command(subcommand)]
        mode: DiffMode,
    },
    /// Summarise certificates and reports into CSV tables.
    Report {
        /// Files or directories (all `*.json` directly inside) to read.
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DiffMode {
    /// Lebesgue decomposition and the exact density representation residual.
    Density {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        lambda: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Weak (1,1) audit on grid-Lebesgue measure of the unit square.
    Weak11 {
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 100)]
        functions: usize,
        #[arg(long, default_value_t = 16)]
        levels: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    #[value(name = "5r")]
    FiveR,
    Besicovitch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Full,
    Finest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricName {
    Euclidean,
    Pnorm,
    LpMean,
    Koranyi,
    HebischSikora,
    HeisenbergEps,
    Nonstandard,
}

#[derive(Clone, Debug, Default, Args)]
pub struct MetricArgs {
    #[arg(long, value_enum)]
    pub metric: Option<MetricName>,
    /// Full metric description as JSON, e.g. '{"kind":"koranyi"}'.
    #[arg(long, conflicts_with = "metric")]
    pub metric_json: Option<String>,
    /// Dimension for euclidean and pnorm.
    #[arg(long)]
    pub n: Option<usize>,
    /// Exponent for pnorm and lp-mean.
    #[arg(long)]
    pub p: Option<f64>,
    /// Second exponent of lp-mean.
    #[arg(long)]
    pub lp_s: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Wrap the metric in its snowflake d^s.
    #[arg(long)]
    pub snowflake_s: Option<f64>,
}

#[derive(Clone, Debug, Default, Args)]
pub struct BudgetArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Precision recorded in (and used to accept) certificates.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

/// Values read from `--config`. Every key is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub metric: Option<MetricName>,
    pub metric_spec: Option<MetricSpec>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub lp_s: Option<f64>,
    pub gamma: Option<f64>,
    pub eps: Option<f64>,
    pub alpha: Option<f64>,
    pub snowflake_s: Option<f64>,
    pub k: Option<usize>,
    pub max_k: Option<usize>,
    pub radius_cap: Option<f64>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub iters: Option<usize>,
    pub tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Lib(Error),
    Validation(String),
    Budget(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Budget(_) => exit::BUDGET,
            CliError::Lib(e) => match e {
                Error::DimensionMismatch { .. }
                | Error::InvalidSpec(_)
                | Error::InvalidArgument(_)
                | Error::EmptyFamily
                | Error::UnsupportedSpec(_)
                | Error::Precondition(_) => exit::CONFIG,
                Error::ValidationFailed { .. } => exit::VALIDATION,
                Error::ResourceLimit { .. } => exit::BUDGET,
                Error::Parse { .. } | Error::Format(_) | Error::Io(_) | Error::Json(_) => exit::IO,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self.code() {
            exit::CONFIG => "config",
            exit::VALIDATION => "validation",
            exit::IO => "io",
            exit::BUDGET => "budget",
            _ => "internal",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Validation(m) | CliError::Budget(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn diagnostic(level: &str, value: serde_json::Value) {
    let mut v = value;
    v["level"] = json!(level);
    eprintln!("{v}");
}

fn emit(value: serde_json::Value) {
    println!("{value}");
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::CONFIG
            } else {
                exit::OK
            };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            diagnostic(
                "error",
                json!({ "kind": e.kind(), "exit_code": e.code(), "message": e.message() }),
            );
            e.code()
        }
    }
}

struct Context {
    file: FileConfig,
    out: Option<PathBuf>,
    out_dir: PathBuf,
    exec: Execution,
}

impl Context {
    fn new(cli: &Cli) -> CliResult<Self> {
        let file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(Error::Io)?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let out = cli.out.clone().or_else(|| file.out.clone());
        let out_dir = cli
            .out_dir
            .clone()
            .or_else(|| file.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        let exec = if cli.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        };
        Ok(Context {
            file,
            out,
            out_dir,
            exec,
        })
    }

    /// `--out` if given, otherwise `name` inside the output directory.
    fn output_path(&self, name: &str) -> CliResult<PathBuf> {
        if let Some(p) = &self.out {
            return Ok(p.clone());
        }
        std::fs::create_dir_all(&self.out_dir).map_err(Error::Io)?;
        Ok(self.out_dir.join(name))
    }

    fn metric(&self, args: &MetricArgs) -> CliResult<MetricSpec> {
        let f = &self.file;
        let spec = if let Some(js) = &args.metric_json {
            serde_json::from_str(js).map_err(|e| CliError::Config(format!("--metric-json: {e}")))?
        } else {
            match args.metric.or(f.metric) {
                None => f.metric_spec.clone().ok_or_else(|| {
                    CliError::Config("no metric given (use --metric or --metric-json)".into())
                })?,
                Some(name) => {
                    let n = args.n.or(f.n).unwrap_or(2);
                    let p = args.p.or(f.p);
                    match name {
                        MetricName::Euclidean => MetricSpec::Euclidean { n },
                        MetricName::Pnorm => MetricSpec::PNorm {
                            n,
                            p: p.unwrap_or(1.0),
                        },
                        MetricName::LpMean => MetricSpec::LpMeanProduct {
                            p: p.unwrap_or(2.0),
                            s: args.lp_s.or(f.lp_s).unwrap_or(3.0),
                        },
                        MetricName::Koranyi => MetricSpec::Koranyi,
                        MetricName::HebischSikora => MetricSpec::HebischSikora {
                            gamma: args.gamma.or(f.gamma).unwrap_or(2.0),
                        },
                        MetricName::HeisenbergEps => MetricSpec::HeisenbergEps {
                            eps: args.eps.or(f.eps).unwrap_or(1.0),
                        },
                        MetricName::Nonstandard => MetricSpec::NonStandardGauge {
                            alpha: args.alpha.or(f.alpha).unwrap_or(2.0),
                        },
                    }
                }
            }
        };
        let spec = match args.snowflake_s.or(f.snowflake_s) {
            Some(s) => MetricSpec::snowflake(spec, s),
            None => spec,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn budget(&self, args: &BudgetArgs, k: usize) -> CliResult<(SearchBudget, f64)> {
        let f = &self.file;
        let d = SearchBudget::default();
        let budget = SearchBudget {
            restarts: args.restarts.or(f.restarts).unwrap_or(d.restarts),
            iterations: args.iters.or(f.iters).unwrap_or(d.iterations),
            target_k: k,
            seed: args.seed.or(f.seed).unwrap_or(0),
            ..d
        };
        budget.validate()?;
        let tolerance = args.tolerance.or(f.tolerance).unwrap_or(DEFAULT_PRECISION);
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(CliError::Config(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        Ok((budget, tolerance))
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(Error::Io)?;
    }
    std::fs::write(path, text).map_err(Error::Io)?;
    Ok(())
}

fn cert_name(cert: &Certificate) -> String {
    format!(
        "cert-{}-k{}-seed{}.json",
        cert.config.spec.label(),
        cert.k(),
        cert.seed
    )
}

fn emit_certificate(event: &str, path: &Path, cert: &Certificate) {
    emit(json!({
        "event": event,
        "path": path.display().to_string(),
        "metric": cert.config.spec.label(),
        "k": cert.k(),
        "margin": cert.margin,
        "threshold": cert.threshold(),
        "valid": cert.is_valid(),
    }));
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::Search {
            metric,
            budget,
            k,
            max_k,
            radius_cap,
        } => {
            let spec = ctx.metric(metric)?;
            let f = &ctx.file;
            let radius_cap = radius_cap.or(f.radius_cap);
            match k.or(f.k) {
                Some(k) => {
                    let (budget, tol) = ctx.budget(budget, k)?;
                    let mut cert = search_target(&spec, k, &budget, radius_cap, None, ctx.exec)?;
                    cert.precision = tol;
                    if !cert.is_valid() {
                        return Err(CliError::Budget(format!(
                            "no valid family of size {k} for {} within budget (best margin {:e})",
                            spec.label(),
                            cert.margin
                        )));
                    }
                    let path = ctx.output_path(&cert_name(&cert))?;
                    write_certificate(&cert, &path)?;
                    emit_certificate("certificate", &path, &cert);
                }
                None => {
                    let max_k = max_k
                        .or(f.max_k)
                        .unwrap_or(SearchBudget::default().target_k);
                    let (budget, tol) = ctx.budget(budget, max_k.max(1))?;
                    let mut best: Option<Certificate> = None;
                    for k in 1..=max_k {
                        let mut cert =
                            search_target(&spec, k, &budget, radius_cap, None, ctx.exec)?;
                        cert.precision = tol;
                        emit(
                            json!({ "event": "searched", "metric": spec.label(), "k": k, "margin": cert.margin, "valid": cert.is_valid() }),
                        );
                        if !cert.is_valid() {
                            break;
                        }
                        best = Some(cert);
                    }
                    let cert = best.ok_or_else(|| {
                        CliError::Budget(format!("no valid family found for {}", spec.label()))
                    })?;
                    let path = ctx.output_path(&cert_name(&cert))?;
                    write_certificate(&cert, &path)?;
                    emit_certificate("certificate", &path, &cert);
                }
            }
        }
        Command::Validate { file, tolerance } => {
            let tol = tolerance.or(ctx.file.tolerance);
            match import_certificate(file, tol) {
                Ok(cert) => emit_certificate("validated", file, &cert),
                Err(Error::ValidationFailed { margin, threshold }) => {
                    emit(
                        json!({ "event": "validated", "path": file.display().to_string(), "margin": margin, "threshold": threshold, "valid": false }),
                    );
                    return Err(CliError::Validation(format!(
                        "{}: margin {margin:e} does not exceed {threshold:e}",
                        file.display()
                    )));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Grow { file, budget } => {
            let cert = import_certificate(file, None)?;
            let (mut b, _) = ctx.budget(budget, cert.k() + 1)?;
            if budget.seed.is_none() && ctx.file.seed.is_none() {
                b.seed = cert.seed;
            }
            let grown = grow_family_with(&cert, &b, ctx.exec)?;
            if grown.k() == cert.k() {
                return Err(CliError::Budget(format!(
                    "could not grow {} beyond k={} within budget",
                    cert.config.spec.label(),
                    cert.k()
                )));
            }
            let path = ctx.output_path(&cert_name(&grown))?;
            write_certificate(&grown, &path)?;
            emit_certificate("certificate", &path, &grown);
        }
        Command::Cover {
            balls,
            algo,
            metric,
        } => {
            let spec = ctx.metric(metric)?;
            let family = read_balls(balls, &spec)?;
            let report = match algo {
                Algo::FiveR => {
                    let result = greedy_5r_cover(&family)?;
                    let v = verify_5r_cover(&family, &result);
                    RunReport::Cover {
                        metric_spec: spec.clone(),
                        algo: "5r".into(),
                        balls: family.len(),
                        passed: v.passed(),
                        failures: v.failures,
                        selected: result.selected,
                        tau: result.tau,
                        multiplicity: result.multiplicity,
                        colors: None,
                    }
                }
                Algo::Besicovitch => {
                    let result = besicovitch_select(&family)?;
                    let coloring = disjoint_color(&family, &result)?;
                    let covered = uncovered_centers(&family, &result.selected).is_empty();
                    RunReport::Cover {
                        metric_spec: spec.clone(),
                        algo: "besicovitch".into(),
                        balls: family.len(),
                        passed: covered && coloring.verify(&family, DEFAULT_STRICT_MARGIN),
                        failures: Vec::new(),
                        selected: result.selected,
                        tau: result.tau,
                        multiplicity: result.multiplicity,
                        colors: Some(coloring.q),
                    }
                }
            };
            let RunReport::Cover {
                passed,
                ref selected,
                ref multiplicity,
                ..
            } = report
            else {
                unreachable!()
            };
            let name = format!(
                "cover-{}-{}.json",
                if *algo == Algo::FiveR {
                    "5r"
                } else {
                    "besicovitch"
                },
                spec.label()
            );
            let path = ctx.output_path(&name)?;
            write_text(&path, &report.to_text()?)?;
            emit(
                json!({ "event": "report", "path": path.display().to_string(), "selected": selected.len(), "max_multiplicity": multiplicity.max, "passed": passed }),
            );
            if !passed {
                return Err(CliError::Validation("cover verification failed".into()));
            }
        }
        Command::Extract {
            balls,
            measure,
            policy,
            metric,
        } => {
            let spec = ctx.metric(metric)?;
            let family = read_balls(balls, &spec)?;
            let lambda = read_measure(measure, &spec)?;
            let policy = match policy {
                Policy::Full => AdmissiblePolicy::Full,
                Policy::Finest => AdmissiblePolicy::Finest,
            };
            let trace = vitali_extract(&lambda, lambda.points(), &family, policy)?;
            let disjoint = verify_extraction(&family, &trace, DEFAULT_STRICT_MARGIN);
            let report = RunReport::Extraction {
                metric_spec: spec.clone(),
                atoms: lambda.len(),
                balls: family.len(),
                disjoint,
                decay_holds: trace.decay_holds(),
                trace,
            };
            let path = ctx.output_path(&format!("extract-{}.json", spec.label()))?;
            write_text(&path, &report.to_text()?)?;
            let RunReport::Extraction {
                trace, decay_holds, ..
            } = &report
            else {
                unreachable!()
            };
            emit(json!({
                "event": "report",
                "path": path.display().to_string(),
                "rounds": trace.rounds.len(),
                "final_residual": trace.final_residual(),
                "decay_holds": decay_holds,
                "disjoint": disjoint,
            }));
            if !disjoint {
                return Err(CliError::Validation(
                    "kept balls are not pairwise disjoint".into(),
                ));
            }
        }
        Command::Diff { mode } => run_diff(&ctx, mode)?,
        Command::Report { inputs } => {
            let mut files = Vec::new();
            for input in inputs {
                if input.is_dir() {
                    let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                        .map_err(Error::Io)?
                        .filter_map(|e| e.ok().map(|e| e.path()))
                        .filter(|p| p.extension().is_some_and(|x| x == "json"))
                        .collect();
                    found.sort();
                    files.extend(found);
                } else {
                    files.push(input.clone());
                }
            }
            let mut texts = Vec::new();
            for f in &files {
                match std::fs::read_to_string(f) {
                    Ok(t) => texts.push((f.display().to_string(), t)),
                    Err(e) => texts.push((f.display().to_string(), format!("<unreadable: {e}>"))),
                }
            }
            let summary = summarize(&texts);
            for (source, error) in &summary.malformed {
                diagnostic(
                    "warning",
                    json!({ "kind": "malformed_input", "source": source, "message": error }),
                );
            }
            let dir = ctx.out.clone().unwrap_or_else(|| ctx.out_dir.clone());
            for path in summary.write_tables(&dir)? {
                emit(json!({ "event": "table", "path": path.display().to_string() }));
            }
        }
    }
    Ok(())
}

fn run_diff(ctx: &Context, mode: &DiffMode) -> CliResult<()> {
    match mode {
        DiffMode::Density { mu, lambda, metric } => {
            let spec = ctx.metric(metric)?;
            let mu = read_measure(mu, &spec)?;
            let lambda = read_measure(lambda, &spec)?;
            let dec = lebesgue_decompose(&mu, &lambda)?;
            let residual = density_representation_check(&mu, &lambda, lambda.points())?;
            let report = RunReport::Density {
                metric_spec: spec.clone(),
                mu_atoms: mu.len(),
                lambda_atoms: lambda.len(),
                absolutely_continuous_mass: dec.absolutely_continuous.total_mass(),
                singular_mass: dec.singular.total_mass(),
                residual: residual.to_string(),
            };
            let path = ctx.output_path(&format!("density-{}.json", spec.label()))?;
            write_text(&path, &report.to_text()?)?;
            emit(
                json!({ "event": "report", "path": path.display().to_string(), "residual": residual.to_string() }),
            );
        }
        DiffMode::Weak11 {
            grid,
            functions,
            levels,
            seed,
        } => {
            let seed = seed.or(ctx.file.seed).unwrap_or(0);
            let lambda = AtomicMeasure::grid_lebesgue(2, *grid)?;
            let op = MaximalOperator::new(&lambda, ctx.exec)?;
            let mut worst: Option<Weak11Report> = None;
            let mut max_mult = 0;
            let mut holds = true;
            for f in random_grid_functions(*grid, *functions, seed) {
                let mf = op.evaluate(&f)?;
                let rep = op.weak11(&f, &alpha_grid(&mf, *levels))?;
                holds &= rep.bound_holds(1e-9);
                max_mult = max_mult.max(rep.max_multiplicity());
                if worst
                    .as_ref()
                    .is_none_or(|w| rep.max_ratio() > w.max_ratio())
                {
                    worst = Some(rep);
                }
            }
            let worst = worst.unwrap_or(Weak11Report {
                norm: 0.0,
                rows: Vec::new(),
            });
            let max_ratio = worst.max_ratio();
            let report = RunReport::Weak11 {
                metric_spec: lambda.spec.clone(),
                atoms: lambda.len(),
                functions: *functions,
                max_ratio,
                max_multiplicity: max_mult,
                bound_holds: holds,
                worst: worst.rows,
            };
            let path = ctx.output_path(&format!("weak11-grid{grid}-seed{seed}.json"))?;
            write_text(&path, &report.to_text()?)?;
            emit(
                json!({ "event": "report", "path": path.display().to_string(), "max_ratio": max_ratio, "max_multiplicity": max_mult, "bound_holds": holds }),
            );
            if !holds {
                return Err(CliError::Validation(
                    "weak (1,1) ratio exceeded the measured multiplicity".into(),
                ));
            }
        }
    }
    Ok(())
}
