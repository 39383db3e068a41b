use std::fmt::Write as _;
use std::path::Path;

use ratioci::bootstrap::Interval;
use ratioci::geometry::{plot_elements, to_svg};
use ratioci::linear::{
    allometric_fit, compare_models, deflated_fit_with, ols_fit, spurious_demo, ModelComparison, RegressionFit,
    StorkData,
};
use ratioci::montecarlo::{apply_methods, error_bar_experiment, log_spaced, points, run_grid, GridSpec};
use ratioci::{
    construct_wedge, summarize, BootstrapConfig, ConfidenceSet, ConfidenceSpec, Method, MethodResult, PairedSample,
    SimCell, SimOptions, SummaryStats,
};
use serde::Serialize;

use crate::args::{
    flatten_methods, CiArgs, DemoArgs, EllipseArgs, ErrorbarArgs, Example, Format, IntervalArgs, Model, Point,
    Preset, RegressArgs, SimulateArgs,
};
use crate::error::CliError;
use crate::io::{emit, read_pairs, read_table, to_csv, to_json};

fn pick_format(requested: Option<Format>, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
    let f = requested.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let names: Vec<String> = allowed.iter().map(|a| format!("{a:?}").to_lowercase()).collect();
        Err(CliError::Usage(format!(
            "format `{}` is not available here (choose {})",
            format!("{f:?}").to_lowercase(),
            names.join(", ")
        )))
    }
}

fn sim_options(level: f64, trim: f64, replications: usize, seed: u64) -> SimOptions {
    SimOptions { level, trim, bootstrap: BootstrapConfig::new(replications, seed, Interval::BCa) }
}

fn warn_bootstrap(methods: &[Method], options: &SimOptions) {
    if methods.iter().any(Method::is_bootstrap) {
        if let Some(w) = options.bootstrap.warning() {
            eprintln!("warning: {w}");
        }
    }
}

#[derive(Serialize)]
struct CiRow<'a> {
    method: &'a str,
    estimate: f64,
    case: &'a str,
    lower: Option<f64>,
    upper: Option<f64>,
    excluded_lower: Option<f64>,
    excluded_upper: Option<f64>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn describe_set(set: &ConfidenceSet) -> String {
    match *set {
        ConfidenceSet::Bounded { lower, upper } => format!("[{lower:.4}, {upper:.4}]"),
        ConfidenceSet::UnboundedExclusive { excluded_lower, excluded_upper } => {
            let mut parts = Vec::new();
            if excluded_lower.is_finite() {
                parts.push(format!("(-inf, {excluded_lower:.4}]"));
            }
            if excluded_upper.is_finite() {
                parts.push(format!("[{excluded_upper:.4}, inf)"));
            }
            parts.join(" U ")
        }
        ConfidenceSet::WholeLine => "(-inf, inf)".into(),
    }
}

fn render_results(results: &[MethodResult], format: Format, level: f64) -> Result<String, CliError> {
    match format {
        Format::Json => to_json(results),
        Format::Csv => {
            let rows: Vec<CiRow> = results
                .iter()
                .map(|r| {
                    let (lower, upper, excluded_lower, excluded_upper) = match r.set {
                        ConfidenceSet::Bounded { lower, upper } => (Some(lower), Some(upper), None, None),
                        ConfidenceSet::UnboundedExclusive { excluded_lower, excluded_upper } => {
                            (None, None, finite(excluded_lower), finite(excluded_upper))
                        }
                        ConfidenceSet::WholeLine => (None, None, None, None),
                    };
                    CiRow {
                        method: r.method.name(),
                        estimate: r.estimate,
                        case: r.set.case().as_str(),
                        lower,
                        upper,
                        excluded_lower,
                        excluded_upper,
                    }
                })
                .collect();
            to_csv(&rows)
        }
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "{:.0}% confidence sets", 100.0 * level);
            let _ = writeln!(s, "{:<22} {:>10}  {:<20} set", "method", "estimate", "case");
            for r in results {
                let _ = writeln!(
                    s,
                    "{:<22} {:>10.4}  {:<20} {}",
                    r.method.name(),
                    r.estimate,
                    r.set.case().as_str(),
                    describe_set(&r.set)
                );
            }
            Ok(s)
        }
    }
}

fn compute_sets(sample: &PairedSample, methods: &[Method], args: &IntervalArgs) -> (Vec<MethodResult>, Vec<CliError>) {
    let options = sim_options(args.level, args.trim, args.replications, args.seed);
    warn_bootstrap(methods, &options);
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (&method, r) in methods.iter().zip(apply_methods(sample, methods, &options, args.seed)) {
        match r {
            Ok(r) => ok.push(r),
            Err(source) => failed.push(CliError::Method { method, source }),
        }
    }
    (ok, failed)
}

// Writes what succeeded, then reports every failure; the first decides the exit code.
fn finish(text: &str, output: Option<&Path>, mut failed: Vec<CliError>) -> Result<(), CliError> {
    emit(text, output)?;
    if failed.is_empty() {
        return Ok(());
    }
    let first = failed.remove(0);
    for e in failed {
        eprintln!("error: {e}");
    }
    Err(first)
}

pub fn ci(args: &CiArgs) -> Result<(), CliError> {
    let format = pick_format(args.format, Format::Csv, &[Format::Csv, Format::Json, Format::Text])?;
    let sample = read_pairs(&args.input)?;
    let methods = flatten_methods(&args.interval.methods);
    let (results, failed) = compute_sets(&sample, &methods, &args.interval);
    let text = render_results(&results, format, args.interval.level)?;
    finish(&text, args.output.as_deref(), failed)
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let format = pick_format(args.format, Format::Csv, &[Format::Csv, Format::Json])?;
    if args.runs == 0 {
        return Err(CliError::Usage("runs must be positive".into()));
    }
    let axis = |given: &[f64]| -> Result<Vec<f64>, CliError> {
        if given.is_empty() {
            Ok(log_spaced(args.cv_min, args.cv_max, args.points)?)
        } else {
            Ok(given.to_vec())
        }
    };
    let spec = GridSpec { cv_x: axis(&args.cv_x)?, cv_y: axis(&args.cv_y)?, n: args.n, corr: args.corr };
    let methods = flatten_methods(&args.interval.methods);
    let iv = &args.interval;
    let options = sim_options(iv.level, iv.trim, iv.replications, iv.seed);
    warn_bootstrap(&methods, &options);
    let grid = run_grid(&spec, &methods, args.runs, iv.seed, &options)?;
    eprintln!("reference line (cv of the mean of x = 0.5): cv_x = {:.4}", grid.reference_cv_x);
    let text = match format {
        Format::Json => to_json(&grid)?,
        _ => to_csv(&grid.rows())?,
    };
    emit(&text, args.output.as_deref())
}

#[derive(Serialize)]
struct ErrorBarRow<'a> {
    run: usize,
    estimate: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    case: &'a str,
    covers_true: bool,
}

pub fn errorbars(args: &ErrorbarArgs) -> Result<(), CliError> {
    let format = pick_format(args.format, Format::Csv, &[Format::Csv, Format::Json])?;
    let mut cell = match (args.point, args.cv_x, args.cv_y) {
        (Some(Point::A), ..) => points::A,
        (Some(Point::B), ..) => points::B,
        (Some(Point::C), ..) => points::C,
        (Some(Point::D), ..) => points::D,
        (None, Some(cx), Some(cy)) => SimCell::new(cx, cy, 500),
        _ => return Err(CliError::Usage("give --point or both --cv-x and --cv-y".into())),
    };
    if let Some(n) = args.n {
        cell.n = n;
    }
    cell = cell.with_corr(args.corr);
    let options = sim_options(args.level, args.trim, args.replications, args.seed);
    warn_bootstrap(&[args.method], &options);
    let series = error_bar_experiment(&cell, &[args.method], args.runs, args.seed, &options)?;
    let s = &series[0];
    eprintln!(
        "{}: {} of {} runs deviate significantly from rho = {}",
        s.method,
        s.significant_deviations(),
        args.runs,
        cell.true_rho()
    );
    if s.failures > 0 {
        eprintln!("{}: method failed in {} runs (counted as deviations)", s.method, s.failures);
    }
    let rows: Vec<ErrorBarRow> = s
        .bars
        .iter()
        .map(|b| {
            let (lower, upper) = b.set.bounds().map_or((None, None), |(l, u)| (Some(l), Some(u)));
            ErrorBarRow { run: b.run, estimate: b.estimate, lower, upper, case: b.set.case().as_str(), covers_true: b.covers_true }
        })
        .collect();
    let text = match format {
        Format::Json => to_json(&rows)?,
        _ => to_csv(&rows)?,
    };
    emit(&text, args.output.as_deref())
}

/// Raw data of the three-subject example.
pub fn pang_p1() -> PairedSample {
    PairedSample::new(vec![6.34, 4.02, 2.88], vec![4.87, 8.30, 11.66]).expect("valid data")
}

/// Published moments of the five-subject example.
pub fn pang_p2_stats() -> SummaryStats {
    SummaryStats::from_individual(5, 3.228, 8.162, 0.623, 2.31, 0.0).expect("valid moments")
}

fn stats_from_list(v: &[f64]) -> Result<SummaryStats, CliError> {
    if !(v.len() == 5 || v.len() == 6) {
        return Err(CliError::Usage(format!("--stats takes n,mean_x,mean_y,sd_x,sd_y[,corr], got {} values", v.len())));
    }
    if v[0].fract() != 0.0 || v[0] < 2.0 {
        return Err(CliError::Usage(format!("n must be an integer of at least 2, got {}", v[0])));
    }
    if !(v[3] >= 0.0 && v[4] >= 0.0) {
        return Err(CliError::Usage("standard deviations must be non-negative".into()));
    }
    Ok(SummaryStats::from_individual(v[0] as usize, v[1], v[2], v[3], v[4], v.get(5).copied().unwrap_or(0.0))?)
}

pub fn ellipse(args: &EllipseArgs) -> Result<(), CliError> {
    let format = pick_format(args.format, Format::Csv, &[Format::Csv, Format::Json, Format::Svg])?;
    if args.points < 4 {
        return Err(CliError::Usage(format!("need at least 4 boundary points, got {}", args.points)));
    }
    let stats = match (&args.input, &args.stats, args.preset) {
        (Some(path), ..) => summarize(&read_pairs(path)?),
        (None, Some(v), _) => stats_from_list(v)?,
        (None, None, Some(Preset::PangP1)) => summarize(&pang_p1()),
        (None, None, Some(Preset::PangP2)) => pang_p2_stats(),
        (None, None, None) => return Err(CliError::Usage("give --input, --stats or --preset".into())),
    };
    let spec = ConfidenceSpec::for_stats(args.level, &stats)?;
    let e = construct_wedge(&stats, &spec)?;
    let text = match format {
        Format::Svg => to_svg(&e, args.points)?,
        Format::Json => to_json(&e)?,
        _ => to_csv(&plot_elements(&e, args.points)?)?,
    };
    emit(&text, args.output.as_deref())
}

#[derive(Serialize)]
struct RegressOutput<'a> {
    model: &'a str,
    fit: &'a RegressionFit,
    comparison: Option<&'a ModelComparison>,
}

fn write_fit(s: &mut String, fit: &RegressionFit) {
    let _ = writeln!(s, "n = {}, df = {}, rss = {:.6}, r^2 = {:.4}", fit.n, fit.df, fit.rss, fit.r_squared);
    let _ = writeln!(s, "{:<14} {:>12} {:>12} {:>10} {:>10}", "term", "estimate", "std.error", "t", "p");
    for c in &fit.coefficients {
        let _ = writeln!(
            s,
            "{:<14} {:>12.6} {:>12.6} {:>10.4} {:>10.4}",
            c.name, c.estimate, c.std_error, c.t_value, c.p_value
        );
    }
}

pub fn regress(args: &RegressArgs) -> Result<(), CliError> {
    let format = pick_format(args.format, Format::Text, &[Format::Text, Format::Json])?;
    if args.no_intercept && args.model != Model::Ols {
        return Err(CliError::Usage("--no-intercept applies to the ols model only".into()));
    }
    let table = read_table(&args.input)?;
    if table.rows() == 0 {
        return Err(CliError::input(&args.input, "no data rows"));
    }
    let y = table.column(&args.response, &args.input)?;
    let mut regs: Vec<(&str, &[f64])> = Vec::new();
    for name in &args.regressors {
        regs.push((name.as_str(), table.column(name, &args.input)?));
    }
    let denominator = match &args.denominator {
        Some(d) => Some(table.column(d, &args.input)?),
        None => None,
    };
    let fit_with = |regs: &[(&str, &[f64])]| -> Result<RegressionFit, CliError> {
        Ok(match args.model {
            Model::Ols => ols_fit(y, regs, !args.no_intercept)?,
            Model::Deflated => deflated_fit_with(denominator.expect("required by the parser"), y, regs)?,
            Model::Allometric => allometric_fit(y, regs)?.fit,
        })
    };
    let fit = fit_with(&regs)?;
    let comparison = match &args.drop {
        Some(term) => {
            if !args.regressors.contains(term) {
                return Err(CliError::Usage(format!("--drop `{term}` is not among the regressors")));
            }
            let kept: Vec<(&str, &[f64])> = regs.iter().copied().filter(|(n, _)| n != term).collect();
            Some(compare_models(fit_with(&kept)?, fit.clone())?)
        }
        None => None,
    };
    let model = match args.model {
        Model::Ols => "ols",
        Model::Deflated => "deflated",
        Model::Allometric => "allometric",
    };
    let text = match format {
        Format::Json => to_json(&RegressOutput { model, fit: &fit, comparison: comparison.as_ref() })?,
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "model: {model}");
            write_fit(&mut s, &fit);
            if let (Some(m), Some(term)) = (&comparison, &args.drop) {
                let _ = writeln!(
                    s,
                    "drop {term}: F({}, {}) = {:.4}, p = {:.4}",
                    m.df_numerator, m.df_denominator, m.f_statistic, m.p_value
                );
            }
            s
        }
    };
    emit(&text, args.output.as_deref())
}

pub fn demo(args: &DemoArgs) -> Result<(), CliError> {
    match args.example {
        Example::Stork => {
            let format = pick_format(args.format, Format::Text, &[Format::Text, Format::Json])?;
            let report = spurious_demo(&StorkData::example())?;
            let text = match format {
                Format::Json => to_json(&report)?,
                _ => report.to_string(),
            };
            emit(&text, args.output.as_deref())
        }
        Example::Pang => {
            let format = pick_format(args.format, Format::Text, &[Format::Text, Format::Csv, Format::Json])?;
            let interval = IntervalArgs {
                level: args.level,
                methods: Vec::new(),
                replications: ratioci::bootstrap::MIN_REPLICATES,
                seed: 0,
                trim: 0.25,
            };
            let (results, failed) = compute_sets(&pang_p1(), &Method::CLOSED_FORM, &interval);
            let text = render_results(&results, format, args.level)?;
            finish(&text, args.output.as_deref(), failed)
        }
    }
}
