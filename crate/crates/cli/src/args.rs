use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use ratioci::ratio::Method;

#[derive(Debug, Parser)]
#[command(name = "ratioci", version, about = "Confidence sets for ratios of means of paired measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Confidence sets for the ratio of means of an `x,y` CSV file
    Ci(CiArgs),
    /// Coverage grid over (cv_x, cv_y) at a fixed sample size
    Simulate(SimulateArgs),
    /// Per-run estimates and sets for an error-bar plot
    Errorbars(ErrorbarArgs),
    /// The confidence ellipse and its tangent wedge
    Ellipse(EllipseArgs),
    /// Linear, deflated and allometric regression on a CSV file
    Regress(RegressArgs),
    /// Built-in worked examples
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
    Text,
}

/// A method name, or `all` / `closed-form`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodGroup(pub Vec<Method>);

fn parse_method_group(s: &str) -> Result<MethodGroup, String> {
    match s {
        "all" => Ok(MethodGroup(Method::ALL.to_vec())),
        "closed-form" => Ok(MethodGroup(Method::CLOSED_FORM.to_vec())),
        _ => s.parse::<Method>().map(|m| MethodGroup(vec![m])).map_err(|_| {
            let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
            format!("unknown method `{s}` (expected all, closed-form, {})", names.join(", "))
        }),
    }
}

pub fn flatten_methods(groups: &[MethodGroup]) -> Vec<Method> {
    let mut out = Vec::new();
    for m in groups.iter().flat_map(|g| g.0.iter().copied()) {
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

fn parse_level(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("level must lie strictly between 0 and 1, got {v}"))
    }
}

fn parse_replications(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if v >= ratioci::bootstrap::MIN_REPLICATES {
        Ok(v)
    } else {
        Err(format!("at least {} replications required, got {v}", ratioci::bootstrap::MIN_REPLICATES))
    }
}

fn parse_trim(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..0.5).contains(&v) {
        Ok(v)
    } else {
        Err(format!("trim fraction must lie in [0, 0.5), got {v}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {v}"))
    }
}

fn parse_corr(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (-1.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("correlation must lie in [-1, 1], got {v}"))
    }
}

fn parse_sample_size(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if v >= 2 {
        Ok(v)
    } else {
        Err(format!("sample size must be at least 2, got {v}"))
    }
}

/// Settings shared by every command that computes intervals.
#[derive(Debug, Clone, Args)]
pub struct IntervalArgs {
    /// Confidence level
    #[arg(long, default_value_t = 0.95, value_parser = parse_level)]
    pub level: f64,
    /// Comma-separated methods, or `all` / `closed-form`
    #[arg(long, value_delimiter = ',', default_value = "closed-form", value_parser = parse_method_group)]
    pub methods: Vec<MethodGroup>,
    /// Bootstrap replications
    #[arg(long, default_value_t = 2000, value_parser = parse_replications)]
    pub replications: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction trimmed from each tail by the trimmed-index method
    #[arg(long, default_value_t = 0.25, value_parser = parse_trim)]
    pub trim: f64,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub interval: IntervalArgs,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Sample size per run
    #[arg(short, long, default_value_t = 20, value_parser = parse_sample_size)]
    pub n: usize,
    /// Runs per cell
    #[arg(long, default_value_t = 500)]
    pub runs: usize,
    /// Explicit cv_x axis (overrides the log-spaced default)
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    pub cv_x: Vec<f64>,
    /// Explicit cv_y axis (overrides the log-spaced default)
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    pub cv_y: Vec<f64>,
    #[arg(long, default_value_t = 0.01, value_parser = parse_positive)]
    pub cv_min: f64,
    #[arg(long, default_value_t = 10.0, value_parser = parse_positive)]
    pub cv_max: f64,
    /// Points per log-spaced axis
    #[arg(long, default_value_t = 8)]
    pub points: usize,
    #[arg(long, default_value_t = 0.0, value_parser = parse_corr, allow_hyphen_values = true)]
    pub corr: f64,
    #[command(flatten)]
    pub interval: IntervalArgs,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Point {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("where").args(["point", "cv_x"]).required(true)))]
pub struct ErrorbarArgs {
    /// A named point of the (cv_x, cv_y) plane at n = 500
    #[arg(long, value_enum, ignore_case = true)]
    pub point: Option<Point>,
    #[arg(long, value_parser = parse_positive, requires = "cv_y")]
    pub cv_x: Option<f64>,
    #[arg(long, value_parser = parse_positive)]
    pub cv_y: Option<f64>,
    /// Sample size; defaults to 500
    #[arg(short, long, value_parser = parse_sample_size)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.0, value_parser = parse_corr, allow_hyphen_values = true)]
    pub corr: f64,
    #[arg(long, default_value_t = 40)]
    pub runs: usize,
    #[arg(long, default_value = "fieller")]
    pub method: Method,
    #[arg(long, default_value_t = 0.95, value_parser = parse_level)]
    pub level: f64,
    #[arg(long, default_value_t = 2000, value_parser = parse_replications)]
    pub replications: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.25, value_parser = parse_trim)]
    pub trim: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    PangP1,
    PangP2,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").args(["input", "stats", "preset"]).required(true)))]
pub struct EllipseArgs {
    /// `x,y` CSV file
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    /// Summary statistics as `n,mean_x,mean_y,sd_x,sd_y[,corr]`
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    pub stats: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, default_value_t = 0.95, value_parser = parse_level)]
    pub level: f64,
    /// Boundary points on the ellipse outline
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// `y = a + b1 x1 + ...`
    Ols,
    /// `y/x = alpha/x + beta + ...` with the listed regressors also divided by `x`
    Deflated,
    /// `log y = log beta + gamma1 log x1 + ...`
    Allometric,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Response column
    #[arg(short = 'y', long)]
    pub response: String,
    /// Regressor columns
    #[arg(long, value_delimiter = ',')]
    pub regressors: Vec<String>,
    #[arg(long, value_enum, default_value = "ols")]
    pub model: Model,
    /// Denominator column of the deflated model
    #[arg(long, required_if_eq("model", "deflated"))]
    pub denominator: Option<String>,
    /// Fit the linear model through the origin
    #[arg(long)]
    pub no_intercept: bool,
    /// Also test the listed term with an F test against the model without it
    #[arg(long)]
    pub drop: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    /// Babies, women and storks in four counties
    Stork,
    /// The three-subject example with all closed-form methods
    Pang,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(value_enum)]
    pub example: Example,
    #[arg(long, default_value_t = 0.95, value_parser = parse_level)]
    pub level: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
