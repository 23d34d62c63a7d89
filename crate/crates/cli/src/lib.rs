//! The `betagof` command line: goodness-of-fit tests on data, power
//! studies, kernel eigenvalues, simulation from the alternatives and the
//! embedded humidity data.
//!
//! All output goes through the writers handed to [`run`]; results go to
//! `out`, progress and diagnostics to `err`.

pub mod input;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use betagof::alternatives::{sample_alternative, AlternativeSpec};
use betagof::asymptotics::{eigenvalues, EigenMethod, KernelContext};
use betagof::beta_model::{self, BetaParams, EstimationMethod, Sample};
use betagof::bootstrap::{run_tests, BootstrapPlan};
use betagof::datasets;
use betagof::exec::Exec;
use betagof::gof_tests::StatisticKind;
use betagof::power::{run_power_study_with_progress, PowerStudyConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{EigenReport, FitSummary, InputSummary, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "betagof", version, about = "Goodness-of-fit tests for the beta family")]
pub struct Cli {
    /// Worker threads (default: available parallelism). Output does not
    /// depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bootstrap goodness-of-fit tests on a data set.
    Test(TestArgs),
    /// Monte Carlo power study from a TOML or JSON config.
    Power(PowerArgs),
    /// Eigenvalues of the limiting covariance operator of T_n.
    Eigen(EigenArgs),
    /// Draw from an alternative, one value per line.
    Simulate(SimulateArgs),
    /// Print an embedded data set.
    Data(DataArgs),
    /// Q-Q coordinates against the fitted beta law, as CSV.
    Qq(QqArgs),
}

#[derive(Debug, Args)]
pub struct Source {
    /// Embedded data set (may2007, may2008).
    #[arg(long, conflicts_with = "file")]
    pub data: Option<String>,
    /// Observations, one per line or single-column CSV; `-` reads stdin.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Clamp observations into [eps, 1 - eps] before fitting.
    #[arg(long, value_name = "EPS")]
    pub winsorize: Option<f64>,
}

impl Source {
    fn load(&self) -> Result<(Sample, String)> {
        let (s, label) = input::load(self.data.as_deref(), self.file.as_deref())?;
        match self.winsorize {
            Some(eps) if !(eps > 0.0 && eps < 0.5) => {
                bail!("--winsorize needs 0 < eps < 0.5, got {eps}")
            }
            Some(eps) => Ok((s.winsorized(eps), label)),
            None => Ok((s, label)),
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub source: Source,
    /// Comma-separated statistics: tn, rf:A, ks, cm, ad, or all.
    #[arg(long, default_value = "tn")]
    pub stat: String,
    #[arg(long, default_value = "mle")]
    pub estimator: EstimationMethod,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 1000)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Exit with status 2 if any test rejects.
    #[arg(long)]
    pub gate: bool,
    /// Include the wall-clock runtime in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Config file (.json for JSON, anything else is read as TOML).
    pub config: PathBuf,
    /// Print the resolved study without running it.
    #[arg(long)]
    pub dry_run: bool,
    /// Suppress progress lines on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    /// Grid size.
    #[arg(long, default_value_t = 64)]
    pub m: usize,
    /// Number of eigenvalues listed.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value = "galerkin")]
    pub method: EigenMethod,
    /// Quadrature order for expectations over X.
    #[arg(long, default_value_t = 64)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Law, e.g. "B(2,2)", "LT(3,2)", "C(1)oGO(2,1)".
    pub spec: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// may2007 or may2008; omit to list the names.
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct QqArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value = "mle")]
    pub estimator: EstimationMethod,
}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

/// Parse `args` (program name first) and run.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_ERROR
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            }
        }
    }
}

fn executor(threads: Option<usize>) -> Result<Exec> {
    match threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(t) => Ok(Exec::with_threads(t)),
        None => Ok(Exec::parallel()),
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let exec = executor(cli.threads)?;
    match &cli.command {
        Command::Test(a) => cmd_test(a, cli.format, &exec, out),
        Command::Power(a) => cmd_power(a, cli.format, &exec, out, err),
        Command::Eigen(a) => cmd_eigen(a, cli.format, &exec, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Data(a) => cmd_data(a, out),
        Command::Qq(a) => cmd_qq(a, out),
    }
}

/// Fit, test and summarise a sample.
pub fn test_report(
    sample: &Sample,
    source: &str,
    plan: &BootstrapPlan,
    exec: &Exec,
) -> Result<Report> {
    let fits = [EstimationMethod::MaximumLikelihood, EstimationMethod::Moments]
        .into_iter()
        .filter_map(|m| {
            beta_model::fit(sample, m)
                .ok()
                .map(|params| FitSummary { estimator: m, params })
        })
        .collect();
    let tests = run_tests(sample, plan, exec)
        .with_context(|| format!("testing {source}"))?;
    let values = sample.values();
    Ok(Report {
        tool: "betagof".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input: InputSummary {
            source: source.into(),
            n: values.len(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        },
        fits,
        estimator: plan.estimator,
        tests,
        seed: plan.seed,
        runtime_seconds: None,
    })
}

fn cmd_test(a: &TestArgs, format: Format, exec: &Exec, out: &mut dyn Write) -> Result<i32> {
    let start = Instant::now();
    let (sample, label) = a.source.load()?;
    let plan = BootstrapPlan {
        statistics: StatisticKind::parse_list(&a.stat)?,
        estimator: a.estimator,
        b: a.b,
        level: a.level,
        seed: a.seed,
        keep_values: false,
    };
    let mut report = test_report(&sample, &label, &plan, exec)?;
    if a.timing {
        report.runtime_seconds = Some(start.elapsed().as_secs_f64());
    }
    match format {
        Format::Text => out.write_all(report.to_text().as_bytes())?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Csv => out.write_all(report.to_csv()?.as_bytes())?,
    }
    Ok(if a.gate && report.any_rejected() {
        EXIT_REJECTED
    } else {
        EXIT_OK
    })
}

/// Read and validate a power-study config.
pub fn load_power_config(path: &Path) -> Result<PowerStudyConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let cfg: PowerStudyConfig = if is_json {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    };
    cfg.validate()
        .with_context(|| format!("invalid config {}", path.display()))?;
    Ok(cfg)
}

fn cmd_power(
    a: &PowerArgs,
    format: Format,
    exec: &Exec,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let cfg = load_power_config(&a.config)?;
    if a.dry_run {
        match format {
            Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&cfg)?)?,
            _ => out.write_all(plan_text(&cfg).as_bytes())?,
        }
        return Ok(EXIT_OK);
    }
    let quiet = a.quiet;
    let table = run_power_study_with_progress(&cfg, exec, |p| {
        if !quiet {
            let _ = writeln!(err, "[{}/{}] {} n={}", p.done, p.total, p.alternative, p.n);
        }
    })?;
    match format {
        Format::Text => out.write_all(report::power_text(&table).as_bytes())?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&table)?)?,
        Format::Csv => out.write_all(report::power_csv(&table)?.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn plan_text(cfg: &PowerStudyConfig) -> String {
    let stats: Vec<String> = cfg.statistics.iter().map(|k| k.to_string()).collect();
    let alts: Vec<String> = cfg.alternatives.iter().map(|a| a.to_string()).collect();
    let sizes: Vec<String> = cfg.n.iter().map(|n| n.to_string()).collect();
    let fits = cfg.cells() as u128 * cfg.mc_reps as u128 * (cfg.b as u128 + 1);
    format!(
        "alternatives: {}\nn: {}\nmc_reps: {}\nB: {}\nlevel: {}\nstatistics: {}\n\
         estimator: {}\nmaster_seed: {}\ncells: {}\nmodel fits: {}\n",
        alts.join(" "),
        sizes.join(", "),
        cfg.mc_reps,
        cfg.b,
        cfg.level,
        stats.join(", "),
        cfg.estimator,
        cfg.master_seed,
        cfg.cells(),
        fits
    )
}

fn cmd_eigen(a: &EigenArgs, format: Format, exec: &Exec, out: &mut dyn Write) -> Result<i32> {
    let params = BetaParams::new(a.alpha, a.beta)?;
    let ctx = KernelContext::new(params, a.order)?;
    let e = eigenvalues(&ctx, a.m, a.method, exec)?;
    let rep = EigenReport::new(params, &e, a.k);
    match format {
        Format::Text => out.write_all(rep.to_text().as_bytes())?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?,
        Format::Csv => out.write_all(rep.to_csv()?.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn write_values(values: &[f64], out: &mut dyn Write) -> Result<()> {
    for v in values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let spec: AlternativeSpec = a.spec.parse().with_context(|| format!("in '{}'", a.spec))?;
    if a.n == 0 {
        bail!("--n must be positive");
    }
    let s = sample_alternative(&spec, a.n, a.seed)?;
    match &a.out {
        Some(path) => {
            let mut f = fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_values(s.values(), &mut f)?;
        }
        None => write_values(s.values(), out)?,
    }
    Ok(EXIT_OK)
}

fn cmd_data(a: &DataArgs, out: &mut dyn Write) -> Result<i32> {
    match &a.name {
        None => {
            for name in datasets::NAMES {
                writeln!(out, "{name}")?;
            }
        }
        Some(name) => {
            let s = datasets::by_name(name).with_context(|| {
                format!(
                    "unknown dataset '{name}' (available: {})",
                    datasets::NAMES.join(", ")
                )
            })?;
            write_values(s.values(), out)?;
        }
    }
    Ok(EXIT_OK)
}

/// Plotting positions (i - 1/2)/n, fitted quantiles and order statistics.
pub fn qq_points(sample: &Sample, params: BetaParams) -> Result<Vec<(f64, f64, f64)>> {
    let sorted = sample.sorted();
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let p = (i as f64 + 0.5) / n;
            Ok((p, beta_model::quantile(p, params)?, x))
        })
        .collect()
}

fn cmd_qq(a: &QqArgs, out: &mut dyn Write) -> Result<i32> {
    let (sample, _) = a.source.load()?;
    let params = beta_model::fit(&sample, a.estimator)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "theoretical", "observed"])?;
    for (p, q, x) in qq_points(&sample, params)? {
        w.write_record([p.to_string(), q.to_string(), x.to_string()])?;
    }
    out.write_all(&w.into_inner()?)?;
    Ok(EXIT_OK)
}
