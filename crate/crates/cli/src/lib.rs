//! Command-line front end: argument parsing, subcommand execution and report
//! emission.
//!
//! Exit codes: 0 success or valid generator, 2 invalid generator or
//! counterexample found, 3 inconclusive, 1 operational or usage error.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fdpd::estimation::{
    estimate, full_divergence_estimate, BiasConfig, BIAS_CSV_HEADER, DEFAULT_TOL,
};
use fdpd::ext::{Combined, ExtReal};
use fdpd::phi::PhiSpec;
use fdpd::{
    bias_experiment, builtin_phi, certify, fdpd, fdpd_alpha_zero, parametric_density, search_counterexample,
    CertifierConfig, Density, DivergenceSpec, Model, Sample, SearchGrid, Verdict,
};
use serde::Serialize;
use serde_json::json;

pub const SCHEMA_VERSION: &str = "1.0";
pub const DEFAULT_SEED: u64 = 20240607;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Invalid,
    Inconclusive,
    Error,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Error => 1,
            Outcome::Invalid => 2,
            Outcome::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Where the generator comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiSource {
    Builtin(String),
    /// CSV with header `x,phi`.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiArg {
    pub source: PhiSource,
    pub value_at_zero: Option<ExtReal>,
}

#[derive(Debug, Clone)]
pub enum DensityArg {
    Parametric(Density),
    Csv(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOverride {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum Command {
    Certify {
        phi: PhiArg,
        alpha: f64,
        grid: GridOverride,
    },
    Divergence {
        phi: PhiArg,
        alphas: Vec<f64>,
        g: Vec<DensityArg>,
        f: Vec<DensityArg>,
    },
    Counterexample {
        phi: PhiArg,
        alpha: f64,
    },
    Estimate {
        phi: PhiArg,
        alpha: f64,
        model: Model,
        data: PathBuf,
        bracket: (f64, f64),
        full_divergence: bool,
    },
    Bench {
        phis: Vec<String>,
        alphas: Vec<f64>,
        model: Model,
        true_theta: f64,
        eps: Vec<f64>,
        outlier: f64,
        n: usize,
        reps: usize,
        bracket: (f64, f64),
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Certify { .. } => "certify",
            Command::Divergence { .. } => "divergence",
            Command::Counterexample { .. } => "counterexample",
            Command::Estimate { .. } => "estimate",
            Command::Bench { .. } => "bench",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

#[derive(Debug)]
pub enum ParseError {
    /// `--help` or `--version`; the text goes to stdout with exit code 0.
    Display(String),
    Usage(String),
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseError::Display(s) | ParseError::Usage(s) => f.write_str(s),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fdpd", version, about = "Functional density power divergences")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args, Debug)]
struct PhiFlags {
    /// Built-in generator name or path to a CSV with header `x,phi`.
    #[arg(long)]
    phi: String,
    /// Value of phi at 0 for tabulated generators (`-inf` allowed).
    #[arg(long, allow_hyphen_values = true)]
    phi_at_zero: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Decide whether a generator yields a divergence at the given alpha.
    Certify {
        #[command(flatten)]
        phi: PhiFlags,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        grid_lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        grid_hi: Option<f64>,
        #[arg(long)]
        grid_points: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the divergence for density pairs; `--alpha` takes a comma list.
    Divergence {
        #[command(flatten)]
        phi: PhiFlags,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Target density; repeat to pair with each `--f` in order.
        #[arg(long, required = true, allow_hyphen_values = true)]
        g: Vec<String>,
        /// Model density.
        #[arg(long, required = true, allow_hyphen_values = true)]
        f: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Search for densities on which the generator fails to give a divergence.
    Counterexample {
        #[command(flatten)]
        phi: PhiFlags,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[command(flatten)]
        common: Common,
    },
    /// Minimum-divergence estimate of a one-parameter model from data.
    Estimate {
        #[command(flatten)]
        phi: PhiFlags,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// `normal:sd=<s>`, `exponential` or `uniform`.
        #[arg(long)]
        model: String,
        /// CSV file whose first column holds the observations.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        bracket: String,
        /// Also report a display-only estimate of the full divergence.
        #[arg(long)]
        full_divergence: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Contamination study; emits the bias table.
    Bench {
        /// Comma-separated built-in generators.
        #[arg(long, default_value = "identity")]
        phi: String,
        #[arg(long, default_value = "0.01,0.5")]
        alpha: String,
        #[arg(long, default_value = "normal:sd=1")]
        model: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        true_theta: f64,
        #[arg(long, default_value = "0,0.1,0.2")]
        eps: String,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        outlier: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value = "-10,20", allow_hyphen_values = true)]
        bracket: String,
        #[command(flatten)]
        common: Common,
    },
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> ParseError {
    ParseError::Usage(format!("invalid value for {flag}: {msg}"))
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, ParseError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| usage(flag, format!("{t:?}: {e}"))))
        .collect()
}

fn parse_alpha(s: &str, allow_zero: bool) -> Result<f64, ParseError> {
    let a: f64 = s.trim().parse().map_err(|e| usage("--alpha", format!("{s:?}: {e}")))?;
    check_alpha(a, allow_zero)
}

fn check_alpha(a: f64, allow_zero: bool) -> Result<f64, ParseError> {
    if !a.is_finite() || a < 0.0 {
        return Err(usage("--alpha", format!("{a} must be a non-negative number")));
    }
    if a == 0.0 && !allow_zero {
        return Err(usage("--alpha", "alpha = 0 is only supported by the divergence subcommand"));
    }
    Ok(a)
}

fn parse_bracket(s: &str) -> Result<(f64, f64), ParseError> {
    match parse_list("--bracket", s)?.as_slice() {
        &[lo, hi] if lo.is_finite() && hi.is_finite() && lo < hi => Ok((lo, hi)),
        _ => Err(usage("--bracket", format!("{s:?} must be lo,hi with lo < hi"))),
    }
}

fn parse_phi(flags: &PhiFlags) -> Result<PhiArg, ParseError> {
    let value_at_zero = flags
        .phi_at_zero
        .as_deref()
        .map(|s| s.parse::<ExtReal>().map_err(|e| usage("--phi-at-zero", e)))
        .transpose()?;
    let source = if builtin_phi(&flags.phi).is_ok() {
        PhiSource::Builtin(flags.phi.clone())
    } else if flags.phi.ends_with(".csv") || Path::new(&flags.phi).exists() {
        PhiSource::File(PathBuf::from(&flags.phi))
    } else {
        return Err(usage("--phi", builtin_phi(&flags.phi).unwrap_err()));
    };
    if value_at_zero.is_some() && matches!(source, PhiSource::Builtin(_)) {
        return Err(usage("--phi-at-zero", "only applies to tabulated generators"));
    }
    Ok(PhiArg { source, value_at_zero })
}

/// Parses `family:p1,p2`, `power:gamma,theta` or `csv:path`.
pub fn parse_density(flag: &str, s: &str) -> Result<DensityArg, ParseError> {
    if let Some(path) = s.strip_prefix("csv:") {
        if path.is_empty() {
            return Err(usage(flag, "csv: needs a path"));
        }
        return Ok(DensityArg::Csv(PathBuf::from(path)));
    }
    let (family, params) = s
        .split_once(':')
        .ok_or_else(|| usage(flag, format!("{s:?} is not of the form family:p1,p2")))?;
    let params = parse_list(flag, params)?;
    parametric_density(family, &params)
        .map(|d| DensityArg::Parametric(d.with_label(s)))
        .map_err(|e| usage(flag, e))
}

/// Parses `normal:sd=<s>`, `exponential` or `uniform`.
pub fn parse_model(s: &str) -> Result<Model, ParseError> {
    match s.split_once(':') {
        None if s == "exponential" => Ok(Model::ExponentialRate),
        None if s == "uniform" => Ok(Model::UniformScale),
        None if s == "normal" => Ok(Model::NormalLocation { sd: 1.0 }),
        Some(("normal", rest)) => {
            let sd = rest
                .strip_prefix("sd=")
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| usage("--model", format!("{s:?}: expected normal:sd=<positive number>")))?;
            Ok(Model::NormalLocation { sd })
        }
        _ => Err(usage("--model", format!("{s:?}: expected normal:sd=<s>, exponential or uniform"))),
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, ParseError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            ParseError::Display(e.to_string())
        }
        _ => ParseError::Usage(e.to_string()),
    })?;

    let (command, common) = match cli.command {
        Sub::Certify {
            phi,
            alpha,
            grid_lo,
            grid_hi,
            grid_points,
            common,
        } => (
            Command::Certify {
                phi: parse_phi(&phi)?,
                alpha: parse_alpha(&alpha, false)?,
                grid: GridOverride {
                    lo: grid_lo,
                    hi: grid_hi,
                    points: grid_points,
                },
            },
            common,
        ),
        Sub::Divergence { phi, alpha, g, f, common } => {
            if g.len() != f.len() {
                return Err(usage("--g", format!("{} --g values but {} --f values", g.len(), f.len())));
            }
            let alphas = parse_list("--alpha", &alpha)?
                .into_iter()
                .map(|a| check_alpha(a, true))
                .collect::<Result<_, _>>()?;
            (
                Command::Divergence {
                    phi: parse_phi(&phi)?,
                    alphas,
                    g: g.iter().map(|s| parse_density("--g", s)).collect::<Result<_, _>>()?,
                    f: f.iter().map(|s| parse_density("--f", s)).collect::<Result<_, _>>()?,
                },
                common,
            )
        }
        Sub::Counterexample { phi, alpha, common } => (
            Command::Counterexample {
                phi: parse_phi(&phi)?,
                alpha: parse_alpha(&alpha, false)?,
            },
            common,
        ),
        Sub::Estimate {
            phi,
            alpha,
            model,
            data,
            bracket,
            full_divergence,
            common,
        } => (
            Command::Estimate {
                phi: parse_phi(&phi)?,
                alpha: parse_alpha(&alpha, false)?,
                model: parse_model(&model)?,
                data,
                bracket: parse_bracket(&bracket)?,
                full_divergence,
            },
            common,
        ),
        Sub::Bench {
            phi,
            alpha,
            model,
            true_theta,
            eps,
            outlier,
            n,
            reps,
            bracket,
            common,
        } => {
            let phis: Vec<String> = phi.split(',').map(|s| s.trim().to_string()).collect();
            for p in &phis {
                builtin_phi(p).map_err(|e| usage("--phi", e))?;
            }
            let alphas = parse_list("--alpha", &alpha)?
                .into_iter()
                .map(|a| check_alpha(a, false))
                .collect::<Result<_, _>>()?;
            let eps = parse_list("--eps", &eps)?;
            if let Some(e) = eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
                return Err(usage("--eps", format!("{e} is outside [0, 1]")));
            }
            if n == 0 {
                return Err(usage("--n", "must be at least 1"));
            }
            if reps == 0 {
                return Err(usage("--reps", "must be at least 1"));
            }
            (
                Command::Bench {
                    phis,
                    alphas,
                    model: parse_model(&model)?,
                    true_theta,
                    eps,
                    outlier,
                    n,
                    reps,
                    bracket: parse_bracket(&bracket)?,
                },
                common,
            )
        }
    };
    let default_format = if matches!(command, Command::Bench { .. }) {
        Format::Csv
    } else {
        Format::Json
    };
    Ok(RunConfig {
        command,
        format: common.format.unwrap_or(default_format),
        out: common.out,
        seed: common.seed,
    })
}

/// The emitted report and the outcome it reflects.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub outcome: Outcome,
    pub artifact: String,
    /// Non-fatal notices for the error stream.
    pub warnings: Vec<String>,
}

fn open(path: &Path) -> anyhow::Result<File> {
    File::open(path).with_context(|| format!("cannot open {}", path.display()))
}

fn load_phi(arg: &PhiArg) -> anyhow::Result<PhiSpec> {
    match &arg.source {
        PhiSource::Builtin(name) => Ok(builtin_phi(name)?),
        PhiSource::File(path) => {
            let name = path.display().to_string();
            Ok(PhiSpec::from_csv(&name, open(path)?, arg.value_at_zero)
                .with_context(|| format!("reading generator table {name}"))?)
        }
    }
}

fn load_density(arg: &DensityArg, warnings: &mut Vec<String>) -> anyhow::Result<Density> {
    match arg {
        DensityArg::Parametric(d) => Ok(d.clone()),
        DensityArg::Csv(path) => {
            let label = format!("csv:{}", path.display());
            let (d, warning) =
                Density::from_csv(&label, open(path)?).with_context(|| format!("reading density table {label}"))?;
            warnings.extend(warning);
            Ok(d)
        }
    }
}

fn load_sample(path: &Path) -> anyhow::Result<Sample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(open(path)?);
    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        let Some(field) = record.get(0).filter(|s| !s.is_empty()) else {
            continue;
        };
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => bail!("{}: row {} has non-numeric value {field:?}", path.display(), i + 1),
        }
    }
    Ok(Sample::new(values, &path.display().to_string())?)
}

fn certifier_config(phi: &PhiSpec, alpha: f64, grid: GridOverride) -> anyhow::Result<CertifierConfig> {
    let mut cfg = CertifierConfig::for_alpha(alpha);
    let untouched = grid.lo.is_none() && grid.hi.is_none() && grid.points.is_none();
    if let (true, Some((x_min, x_max))) = (untouched, phi.tabulated_range()) {
        // A table is only known between its knots, so `psi` is checked on the
        // matching log range.
        if x_min > 0.0 {
            cfg.grid_lo = cfg.grid_lo.max(x_min.ln());
        }
        cfg.grid_hi = cfg.grid_hi.min(x_max.ln());
    }
    cfg.grid_lo = grid.lo.unwrap_or(cfg.grid_lo);
    cfg.grid_hi = grid.hi.unwrap_or(cfg.grid_hi);
    cfg.grid_points = grid.points.unwrap_or(cfg.grid_points);
    cfg.validate()?;
    Ok(cfg)
}

fn json_artifact(subcommand: &str, body: serde_json::Value) -> anyhow::Result<String> {
    let mut doc = json!({ "schema_version": SCHEMA_VERSION, "subcommand": subcommand });
    if let (Some(map), serde_json::Value::Object(extra)) = (doc.as_object_mut(), body) {
        map.extend(extra);
    }
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn csv_artifact<const N: usize>(header: &[&str; N], rows: &[[String; N]]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

fn combined_text(v: Combined) -> String {
    v.to_string()
}

#[derive(Serialize)]
struct DivergenceRow {
    g: String,
    f: String,
    alpha: f64,
    value: Combined,
    terms: Option<[ExtReal; 3]>,
    integrals: Option<[f64; 3]>,
    method: &'static str,
}

fn run_divergence(
    phi: &PhiSpec,
    alphas: &[f64],
    gs: &[Density],
    fs: &[Density],
) -> anyhow::Result<Vec<DivergenceRow>> {
    let mut rows = Vec::new();
    for (g, f) in gs.iter().zip(fs) {
        for &alpha in alphas {
            let row = if alpha == 0.0 {
                DivergenceRow {
                    g: g.label().to_string(),
                    f: f.label().to_string(),
                    alpha,
                    value: Combined::Defined(fdpd_alpha_zero(phi, g, f)?),
                    terms: None,
                    integrals: None,
                    method: "alpha_zero_limit",
                }
            } else {
                let spec = DivergenceSpec::new(phi.clone(), alpha)?;
                let d = fdpd(&spec, g, f)?;
                DivergenceRow {
                    g: g.label().to_string(),
                    f: f.label().to_string(),
                    alpha,
                    value: d.value,
                    terms: Some(d.terms),
                    integrals: Some(d.integrals),
                    method: d.method.as_str(),
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

fn execute(cfg: &RunConfig) -> anyhow::Result<RunOutput> {
    let mut warnings = Vec::new();
    let name = cfg.command.name();
    let (outcome, artifact) = match &cfg.command {
        Command::Certify { phi, alpha, grid } => {
            let phi = load_phi(phi)?;
            let ccfg = certifier_config(&phi, *alpha, *grid)?;
            let report = certify(&phi, *alpha, &ccfg)?;
            let outcome = match report.verdict {
                Verdict::Valid => Outcome::Success,
                Verdict::Invalid => Outcome::Invalid,
                Verdict::Inconclusive => Outcome::Inconclusive,
            };
            let artifact = match cfg.format {
                Format::Json => json_artifact(name, serde_json::to_value(&report)?)?,
                Format::Csv => csv_artifact(
                    &["phi", "alpha", "verdict", "monotone_ok", "convex_ok", "finite_ok", "total_violations"],
                    &[[
                        report.phi.clone(),
                        report.alpha.to_string(),
                        serde_json::to_value(report.verdict)?.as_str().unwrap_or_default().to_string(),
                        report.monotone_ok.to_string(),
                        report.convex_ok.to_string(),
                        report.finite_ok.to_string(),
                        report.total_violations.to_string(),
                    ]],
                )?,
            };
            (outcome, artifact)
        }
        Command::Divergence { phi, alphas, g, f } => {
            let phi = load_phi(phi)?;
            let gs = g.iter().map(|d| load_density(d, &mut warnings)).collect::<anyhow::Result<Vec<_>>>()?;
            let fs = f.iter().map(|d| load_density(d, &mut warnings)).collect::<anyhow::Result<Vec<_>>>()?;
            let rows = run_divergence(&phi, alphas, &gs, &fs)?;
            let artifact = match cfg.format {
                Format::Json => json_artifact(name, json!({ "phi": phi.name(), "results": rows }))?,
                Format::Csv => {
                    let text = |t: &Option<[ExtReal; 3]>, i: usize| t.map(|t| t[i].to_string()).unwrap_or_default();
                    let body: Vec<[String; 8]> = rows
                        .iter()
                        .map(|r| {
                            [
                                r.g.clone(),
                                r.f.clone(),
                                r.alpha.to_string(),
                                combined_text(r.value),
                                text(&r.terms, 0),
                                text(&r.terms, 1),
                                text(&r.terms, 2),
                                r.method.to_string(),
                            ]
                        })
                        .collect();
                    csv_artifact(&["g", "f", "alpha", "value", "term_ff", "term_fg", "term_gg", "method"], &body)?
                }
            };
            (Outcome::Success, artifact)
        }
        Command::Counterexample { phi, alpha } => {
            let phi = load_phi(phi)?;
            let record = search_counterexample(&phi, *alpha, &SearchGrid::default_for(*alpha))?;
            let outcome = if record.is_some() {
                Outcome::Invalid
            } else {
                Outcome::Success
            };
            let artifact = match cfg.format {
                Format::Json => json_artifact(
                    name,
                    json!({ "phi": phi.name(), "alpha": alpha, "found": record.is_some(), "record": record }),
                )?,
                Format::Csv => {
                    let body: Vec<[String; 5]> = record
                        .iter()
                        .map(|r| -> anyhow::Result<[String; 5]> {
                            Ok([
                                r.phi_name.clone(),
                                r.alpha.to_string(),
                                serde_json::to_string(&r.construction)?,
                                combined_text(r.fdpd_value),
                                serde_json::to_value(r.failure)?.as_str().unwrap_or_default().to_string(),
                            ])
                        })
                        .collect::<anyhow::Result<_>>()?;
                    csv_artifact(&["phi", "alpha", "construction", "fdpd_value", "failure"], &body)?
                }
            };
            (outcome, artifact)
        }
        Command::Estimate {
            phi,
            alpha,
            model,
            data,
            bracket,
            full_divergence,
        } => {
            let phi = load_phi(phi)?;
            let sample = load_sample(data)?;
            let spec = DivergenceSpec::new(phi, *alpha)?;
            let res = estimate(&spec, model, &sample, *bracket, DEFAULT_TOL)?;
            let full = if *full_divergence {
                Some(full_divergence_estimate(&spec, model, res.theta_hat, &sample)?)
            } else {
                None
            };
            let artifact = match cfg.format {
                Format::Json => json_artifact(
                    name,
                    json!({
                        "phi": spec.phi().name(),
                        "alpha": alpha,
                        "model": model,
                        "n": sample.len(),
                        "bracket": [bracket.0, bracket.1],
                        "theta_hat": res.theta_hat,
                        "objective_at_min": res.objective_at_min,
                        "objective_omits_target_term": true,
                        "iterations": res.iterations,
                        "converged": res.converged,
                        "full_divergence_estimate": full,
                    }),
                )?,
                Format::Csv => csv_artifact(
                    &["phi", "alpha", "model", "n", "theta_hat", "objective_at_min", "iterations", "converged"],
                    &[[
                        spec.phi().name().to_string(),
                        alpha.to_string(),
                        model.name(),
                        sample.len().to_string(),
                        res.theta_hat.to_string(),
                        res.objective_at_min.to_string(),
                        res.iterations.to_string(),
                        res.converged.to_string(),
                    ]],
                )?,
            };
            (Outcome::Success, artifact)
        }
        Command::Bench {
            phis,
            alphas,
            model,
            true_theta,
            eps,
            outlier,
            n,
            reps,
            bracket,
        } => {
            let mut specs = Vec::new();
            for p in phis {
                for &a in alphas {
                    specs.push(DivergenceSpec::new(builtin_phi(p)?, a)?);
                }
            }
            let rows = bias_experiment(&BiasConfig {
                specs,
                model: *model,
                true_theta: *true_theta,
                eps_grid: eps.clone(),
                outlier_value: *outlier,
                n: *n,
                replications: *reps,
                seed: cfg.seed,
                bracket: *bracket,
                tol: DEFAULT_TOL,
            })?;
            let artifact = match cfg.format {
                Format::Csv => {
                    let header: Vec<&str> = BIAS_CSV_HEADER.split(',').collect();
                    let header: [&str; 7] = header.try_into().map_err(|_| anyhow!("bias header arity"))?;
                    csv_artifact(&header, &rows.iter().map(|r| r.csv_fields()).collect::<Vec<_>>())?
                }
                Format::Json => json_artifact(
                    name,
                    json!({ "model": model, "n": n, "replications": reps, "seed": cfg.seed, "rows": rows }),
                )?,
            };
            (Outcome::Success, artifact)
        }
    };
    Ok(RunOutput {
        outcome,
        artifact,
        warnings,
    })
}

/// Executes the subcommand. Operational failures yield [`Outcome::Error`]
/// with the message in `warnings` and an empty artifact.
pub fn run(cfg: &RunConfig) -> RunOutput {
    match execute(cfg) {
        Ok(out) => out,
        Err(e) => RunOutput {
            outcome: Outcome::Error,
            artifact: String::new(),
            warnings: vec![format!("error: {e:#}")],
        },
    }
}

/// Writes the artifact to `--out` or stdout and returns the exit code.
pub fn emit(cfg: &RunConfig, output: &RunOutput) -> i32 {
    for w in &output.warnings {
        eprintln!("{w}");
    }
    if output.outcome == Outcome::Error {
        return Outcome::Error.exit_code();
    }
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &output.artifact).with_context(|| format!("writing {}", path.display())),
        None => io::stdout()
            .lock()
            .write_all(output.artifact.as_bytes())
            .context("writing to stdout"),
    };
    match written {
        Ok(()) => output.outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            Outcome::Error.exit_code()
        }
    }
}
