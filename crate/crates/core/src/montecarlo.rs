//! Monte Carlo coverage of the interval methods on bivariate normal data.
//!
//! Every run of every cell draws from its own random substream keyed by
//! (master seed, cell index, run index), so grids are reproducible and do
//! not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{hwang_from_band, hwang_quantiles, ratio_intervals, BootstrapConfig};
use crate::error::{Error, Result};
use crate::ratio::{
    fieller_set, index_limits, taylor_limits, trimmed_index_limits, zero_variance_limits, ConfidenceSet, Method,
    MethodResult,
};
use crate::rng::derive_seed;
use crate::stats::{sample_bivariate_normal, summarize, BivariateNormalParams, ConfidenceSpec, PairedSample};

const MAX_REDRAWS: u64 = 1000;
// substream offsets within a run
const BOOTSTRAP_STREAM: u64 = 1 << 40;
const HWANG_STREAM: u64 = 1 << 41;

/// One point of the simulation design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimCell {
    /// Individual-level CV of the denominator, `sd_x / E(X)`.
    pub cv_x: f64,
    pub cv_y: f64,
    pub n: usize,
    pub corr: f64,
    pub mean_x: f64,
    pub mean_y: f64,
}

impl SimCell {
    /// Cell with unit means (so the true ratio is 1) and no correlation.
    pub fn new(cv_x: f64, cv_y: f64, n: usize) -> Self {
        SimCell { cv_x, cv_y, n, corr: 0.0, mean_x: 1.0, mean_y: 1.0 }
    }

    pub fn with_corr(self, corr: f64) -> Self {
        SimCell { corr, ..self }
    }

    pub fn with_means(self, mean_x: f64, mean_y: f64) -> Self {
        SimCell { mean_x, mean_y, ..self }
    }

    pub fn true_rho(&self) -> f64 {
        self.mean_y / self.mean_x
    }

    /// CV of the denominator's sample mean, `cv_x / sqrt(n)`.
    pub fn cv_mean_x(&self) -> f64 {
        self.cv_x / (self.n as f64).sqrt()
    }

    pub fn params(&self) -> Result<BivariateNormalParams> {
        if !(self.cv_x > 0.0 && self.cv_y > 0.0) {
            return Err(Error::InvalidParameter("coefficients of variation must be positive".into()));
        }
        if self.n < 2 {
            return Err(Error::TooFewObservations { needed: 2, got: self.n });
        }
        if !self.true_rho().is_finite() {
            return Err(Error::InvalidParameter("true ratio is not finite".into()));
        }
        BivariateNormalParams::new(
            self.mean_x,
            self.mean_y,
            self.cv_x * self.mean_x.abs(),
            self.cv_y * self.mean_y.abs(),
            self.corr,
        )
    }
}

/// Named points of the design used for the error-bar figures.
pub mod points {
    use super::SimCell;

    pub const A: SimCell = SimCell { cv_x: 0.15, cv_y: 0.10, n: 500, corr: 0.0, mean_x: 1.0, mean_y: 1.0 };
    pub const B: SimCell = SimCell { cv_x: 0.75, cv_y: 0.10, n: 500, corr: 0.0, mean_x: 1.0, mean_y: 1.0 };
    pub const C: SimCell = SimCell { cv_x: 3.0, cv_y: 0.10, n: 500, corr: 0.0, mean_x: 1.0, mean_y: 1.0 };
    pub const D: SimCell = SimCell { cv_x: 3.0, cv_y: 1.5, n: 500, corr: 0.0, mean_x: 1.0, mean_y: 1.0 };
}

/// Individual-level `cv_x` at which `cv_x / sqrt(n) = 0.5`; to the left of
/// this line the denominator is typically significantly different from zero.
pub fn reference_cv_x(n: usize) -> f64 {
    0.5 * (n as f64).sqrt()
}

/// Settings shared by all runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub level: f64,
    pub trim: f64,
    /// Replications and interval type for the bootstrap methods. The seed
    /// field is ignored; each run derives its own.
    pub bootstrap: BootstrapConfig,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { level: 0.95, trim: 0.25, bootstrap: BootstrapConfig::default() }
    }
}

/// Coverage tally of one method in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCoverage {
    pub method: Method,
    pub runs: usize,
    pub covered: usize,
    /// Runs whose set was unbounded (these always count as covering, except
    /// an unbounded-exclusive set whose gap contains the true ratio).
    pub unbounded_sets: usize,
    /// Runs where the method failed; they count as not covering.
    pub failures: usize,
    pub coverage: f64,
    /// Mean and median of the point estimates over the successful runs.
    pub mean_estimate: f64,
    pub median_estimate: f64,
    pub estimate_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub cell: SimCell,
    pub seed: u64,
    /// Samples redrawn because some `x_i` was exactly zero.
    pub redraws: usize,
    pub methods: Vec<MethodCoverage>,
}

impl CoverageResult {
    pub fn method(&self, method: Method) -> Option<&MethodCoverage> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn rows(&self) -> Vec<GridRow> {
        self.methods
            .iter()
            .map(|m| GridRow {
                cv_x: self.cell.cv_x,
                cv_y: self.cell.cv_y,
                n: self.cell.n,
                corr: self.cell.corr,
                method: m.method.name().to_string(),
                runs: m.runs,
                covered: m.covered,
                coverage: m.coverage,
                unbounded_sets: m.unbounded_sets,
                redraws: self.redraws,
            })
            .collect()
    }
}

/// One line of the grid CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub cv_x: f64,
    pub cv_y: f64,
    pub n: usize,
    pub corr: f64,
    pub method: String,
    pub runs: usize,
    pub covered: usize,
    pub coverage: f64,
    pub unbounded_sets: usize,
    pub redraws: usize,
}

/// Draws the sample for one run, redrawing while any `x_i` is exactly zero.
pub fn draw_run_sample(cell: &SimCell, run_seed: u64) -> Result<(PairedSample, usize)> {
    let params = cell.params()?;
    for attempt in 0..MAX_REDRAWS {
        let seed = if attempt == 0 { run_seed } else { derive_seed(run_seed, attempt) };
        let sample = sample_bivariate_normal(&params, cell.n, seed)?;
        if sample.xs().iter().all(|&x| x != 0.0) {
            return Ok((sample, attempt as usize));
        }
    }
    Err(Error::NonFiniteResult("could not draw a sample without zero denominators".into()))
}

/// Applies each requested method to one sample.
///
/// Percentile and BCa share one set of bootstrap resamples.
pub fn apply_methods(
    sample: &PairedSample,
    methods: &[Method],
    options: &SimOptions,
    boot_seed: u64,
) -> Vec<Result<MethodResult>> {
    let stats = summarize(sample);
    let spec = ConfidenceSpec::for_stats(options.level, &stats);
    let wants = |m: Method| methods.contains(&m);
    let ratio_boot = if wants(Method::BootstrapPercentile) || wants(Method::BootstrapBCa) {
        let cfg = BootstrapConfig { seed: derive_seed(boot_seed, BOOTSTRAP_STREAM), ..options.bootstrap };
        Some(ratio_intervals(sample, &cfg, options.level))
    } else {
        None
    };
    methods
        .iter()
        .map(|&m| {
            let spec = spec.clone()?;
            match m {
                Method::Fieller => fieller_set(&stats, &spec),
                Method::Taylor => taylor_limits(&stats, &spec),
                Method::Index => index_limits(sample, &spec),
                Method::TrimmedIndex => trimmed_index_limits(sample, &spec, options.trim),
                Method::ZeroVariance => zero_variance_limits(sample, &spec),
                Method::BootstrapPercentile => ratio_boot.clone().expect("computed above").map(|r| r.0),
                Method::BootstrapBCa => ratio_boot.clone().expect("computed above").map(|r| r.1),
                Method::HwangBootstrap => {
                    let cfg = BootstrapConfig { seed: derive_seed(boot_seed, HWANG_STREAM), ..options.bootstrap };
                    hwang_quantiles(sample, &cfg, options.level)
                        .and_then(|(lo, hi, diag)| hwang_from_band(&stats, lo, hi, Some(diag)))
                }
            }
        })
        .collect()
}

struct RunOutcome {
    redraws: usize,
    results: Vec<Result<MethodResult>>,
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

/// Coverage of `methods` over `runs` simulated samples of `cell`.
pub fn run_cell(
    cell: &SimCell,
    methods: &[Method],
    runs: usize,
    seed: u64,
    options: &SimOptions,
) -> Result<CoverageResult> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be positive".into()));
    }
    cell.params()?;
    let outcomes: Vec<RunOutcome> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let run_seed = derive_seed(seed, run as u64);
            match draw_run_sample(cell, run_seed) {
                Ok((sample, redraws)) => {
                    RunOutcome { redraws, results: apply_methods(&sample, methods, options, run_seed) }
                }
                Err(e) => RunOutcome { redraws: 0, results: methods.iter().map(|_| Err(e.clone())).collect() },
            }
        })
        .collect();

    let truth = cell.true_rho();
    let redraws = outcomes.iter().map(|o| o.redraws).sum();
    let tallies = methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let (mut covered, mut unbounded, mut failures) = (0, 0, 0);
            let mut estimates = Vec::with_capacity(runs);
            for o in &outcomes {
                match &o.results[j] {
                    Ok(r) => {
                        let inside = r.set.contains(truth);
                        covered += inside as usize;
                        unbounded += (!r.set.is_bounded() && inside) as usize;
                        if r.estimate.is_finite() {
                            estimates.push(r.estimate);
                        }
                    }
                    Err(_) => failures += 1,
                }
            }
            let m = estimates.len() as f64;
            let mean = estimates.iter().sum::<f64>() / m;
            let var = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (m - 1.0);
            estimates.sort_by(f64::total_cmp);
            MethodCoverage {
                method,
                runs,
                covered,
                unbounded_sets: unbounded,
                failures,
                coverage: covered as f64 / runs as f64,
                mean_estimate: mean,
                median_estimate: median(&estimates),
                estimate_variance: var,
            }
        })
        .collect();
    Ok(CoverageResult { cell: *cell, seed, redraws, methods: tallies })
}

/// Rectangular design over `cv_x` x `cv_y` at fixed `n` and correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cv_x: Vec<f64>,
    pub cv_y: Vec<f64>,
    pub n: usize,
    pub corr: f64,
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && count >= 1) || (count == 1 && hi != lo) {
        return Err(Error::InvalidParameter(format!("bad log axis {lo}..{hi} with {count} points")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| match i {
            0 => lo,
            _ if i == count - 1 => hi,
            _ => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect())
}

impl GridSpec {
    /// Log-spaced axes from 0.01 to 10.
    pub fn default_axes(n: usize, points_per_axis: usize) -> Result<Self> {
        let axis = log_spaced(0.01, 10.0, points_per_axis)?;
        Ok(GridSpec { cv_x: axis.clone(), cv_y: axis, n, corr: 0.0 })
    }

    /// Cells in output order (`cv_x` outer, `cv_y` inner).
    pub fn cells(&self) -> Vec<SimCell> {
        self.cv_x
            .iter()
            .flat_map(|&cx| self.cv_y.iter().map(move |&cy| SimCell::new(cx, cy, self.n).with_corr(self.corr)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageGrid {
    pub spec: GridSpec,
    pub runs: usize,
    pub master_seed: u64,
    pub reference_cv_x: f64,
    pub cells: Vec<CoverageResult>,
}

impl CoverageGrid {
    pub fn rows(&self) -> Vec<GridRow> {
        self.cells.iter().flat_map(CoverageResult::rows).collect()
    }
}

pub fn run_grid(
    spec: &GridSpec,
    methods: &[Method],
    runs: usize,
    master_seed: u64,
    options: &SimOptions,
) -> Result<CoverageGrid> {
    if spec.cv_x.is_empty() || spec.cv_y.is_empty() {
        return Err(Error::InvalidParameter("empty grid axis".into()));
    }
    let cells = spec
        .cells()
        .par_iter()
        .enumerate()
        .map(|(i, cell)| run_cell(cell, methods, runs, derive_seed(master_seed, i as u64), options))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageGrid {
        spec: spec.clone(),
        runs,
        master_seed,
        reference_cv_x: reference_cv_x(spec.n),
        cells,
    })
}

/// One run of the error-bar experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBar {
    pub run: usize,
    pub estimate: f64,
    pub set: ConfidenceSet,
    pub covers_true: bool,
}

impl ErrorBar {
    /// The true ratio lies outside the set.
    pub fn significant_deviation(&self) -> bool {
        !self.covers_true
    }
}

/// Per-method runs of the error-bar experiment, sorted by estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBarSeries {
    pub method: Method,
    pub bars: Vec<ErrorBar>,
    /// Runs in which the method failed.
    pub failures: usize,
}

impl ErrorBarSeries {
    pub fn significant_deviations(&self) -> usize {
        self.bars.iter().filter(|b| b.significant_deviation()).count() + self.failures
    }

    pub fn mean_estimate(&self) -> f64 {
        self.bars.iter().map(|b| b.estimate).sum::<f64>() / self.bars.len() as f64
    }
}

/// Runs `runs` samples of `cell` through each method and orders the results
/// by the magnitude of the estimate, as for an error-bar plot.
pub fn error_bar_experiment(
    cell: &SimCell,
    methods: &[Method],
    runs: usize,
    seed: u64,
    options: &SimOptions,
) -> Result<Vec<ErrorBarSeries>> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be positive".into()));
    }
    let truth = cell.true_rho();
    let per_run: Vec<Vec<Result<MethodResult>>> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let run_seed = derive_seed(seed, run as u64);
            match draw_run_sample(cell, run_seed) {
                Ok((sample, _)) => apply_methods(&sample, methods, options, run_seed),
                Err(e) => methods.iter().map(|_| Err(e.clone())).collect(),
            }
        })
        .collect();
    Ok(methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let mut failures = 0;
            let mut bars: Vec<ErrorBar> = Vec::with_capacity(runs);
            for (run, results) in per_run.iter().enumerate() {
                match &results[j] {
                    Ok(r) => bars.push(ErrorBar {
                        run,
                        estimate: r.estimate,
                        set: r.set,
                        covers_true: r.set.contains(truth),
                    }),
                    Err(_) => failures += 1,
                }
            }
            bars.sort_by(|p, q| p.estimate.total_cmp(&q.estimate).then(p.run.cmp(&q.run)));
            ErrorBarSeries { method, bars, failures }
        })
        .collect())
}
