//! Nonparametric pairs bootstrap: percentile and BCa intervals for the
//! ratio of means, and the Hwang bootstrap of the Fieller pivot `T0`.
//!
//! Replication `k` draws its indices from substream `k` of the configured
//! seed, so the empirical distributions are identical for any thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::dist::{normal_cdf, normal_quantile};
use crate::error::{Error, Result};
use crate::ratio::{invert_t0_band, BootstrapDiagnostics, ConfidenceSet, Diagnostics, Method, MethodResult};
use crate::rng;
use crate::stats::{summarize, ConfidenceSpec, PairedSample, SummaryStats};

/// Smallest number of usable replicates accepted by the interval routines.
pub const MIN_REPLICATES: usize = 100;
/// Below this many replicates BCa endpoints are noisy.
pub const RECOMMENDED_BCA_REPLICATES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Interval {
    Percentile,
    BCa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BootstrapConfig {
    pub replications: usize,
    pub seed: u64,
    pub method: Interval,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { replications: 2000, seed: 0, method: Interval::BCa }
    }
}

impl BootstrapConfig {
    pub fn new(replications: usize, seed: u64, method: Interval) -> Self {
        BootstrapConfig { replications, seed, method }
    }

    pub fn with_method(self, method: Interval) -> Self {
        BootstrapConfig { method, ..self }
    }

    /// A human-readable note when the configuration is usable but weak.
    pub fn warning(&self) -> Option<String> {
        (self.method == Interval::BCa && self.replications < RECOMMENDED_BCA_REPLICATES).then(|| {
            format!(
                "{} bootstrap replications is below the {} recommended for BCa",
                self.replications, RECOMMENDED_BCA_REPLICATES
            )
        })
    }
}

/// Sorted finite bootstrap replicates of a statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
    dropped: usize,
}

impl EmpiricalDistribution {
    /// Builds a distribution from raw draws, discarding non-finite ones.
    pub fn from_draws(mut draws: Vec<f64>) -> Result<Self> {
        let total = draws.len();
        draws.retain(|v| v.is_finite());
        let dropped = total - draws.len();
        if draws.is_empty() || 2 * dropped > total {
            return Err(Error::AllResamplesDegenerate { dropped, total });
        }
        draws.sort_by(f64::total_cmp);
        Ok(EmpiricalDistribution { values: draws, dropped })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// Number of non-finite draws that were discarded.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.count() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.values.iter().map(|v| (v - m) * (v - m)).sum();
        (ss / (self.count() as f64 - 1.0)).sqrt()
    }

    /// Linearly interpolated quantile, `h = (count - 1) p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let h = (self.count() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let frac = h - lo as f64;
        if lo + 1 >= self.count() {
            return self.values[self.count() - 1];
        }
        self.values[lo] + frac * (self.values[lo + 1] - self.values[lo])
    }

    /// Fraction of replicates strictly below `x`.
    pub fn proportion_below(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v < x) as f64 / self.count() as f64
    }
}

/// A bootstrap resample, held as indices into the original sample.
#[derive(Debug, Clone, Copy)]
pub struct Resample<'a> {
    sample: &'a PairedSample,
    indices: &'a [usize],
}

impl<'a> Resample<'a> {
    pub fn new(sample: &'a PairedSample, indices: &'a [usize]) -> Self {
        Resample { sample, indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        self.indices
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (xs, ys) = (self.sample.xs(), self.sample.ys());
        self.indices.iter().map(move |&i| (xs[i], ys[i]))
    }

    /// `(mean_x, mean_y)` of the resample.
    pub fn means(&self) -> (f64, f64) {
        let (sx, sy) = self.pairs().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let n = self.len() as f64;
        (sx / n, sy / n)
    }

    pub fn summary(&self) -> SummaryStats {
        summarize(&self.to_sample())
    }

    pub fn to_sample(&self) -> PairedSample {
        let (xs, ys) = self.pairs().unzip();
        PairedSample::from_parts_unchecked(xs, ys)
    }
}

/// A real-valued statistic of a paired sample.
///
/// Closures `Fn(&PairedSample) -> f64` implement this trait. The built-in
/// statistics override the resample and jackknife hooks with allocation-free
/// versions.
pub trait PairStatistic: Sync {
    fn on_sample(&self, sample: &PairedSample) -> f64;

    fn on_resample(&self, resample: &Resample<'_>) -> f64 {
        self.on_sample(&resample.to_sample())
    }

    /// Leave-one-out values.
    fn jackknife(&self, sample: &PairedSample) -> Vec<f64> {
        let (xs, ys) = (sample.xs(), sample.ys());
        (0..sample.len())
            .map(|i| {
                let keep = |v: &[f64]| v.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                self.on_sample(&PairedSample::from_parts_unchecked(keep(xs), keep(ys)))
            })
            .collect()
    }
}

impl<F> PairStatistic for F
where
    F: Fn(&PairedSample) -> f64 + Sync,
{
    fn on_sample(&self, sample: &PairedSample) -> f64 {
        self(sample)
    }
}

/// `mean_y / mean_x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RatioOfMeans;

impl PairStatistic for RatioOfMeans {
    fn on_sample(&self, sample: &PairedSample) -> f64 {
        let s = summarize(sample);
        s.mean_y / s.mean_x
    }

    fn on_resample(&self, resample: &Resample<'_>) -> f64 {
        let (mx, my) = resample.means();
        my / mx
    }

    fn jackknife(&self, sample: &PairedSample) -> Vec<f64> {
        let sx: f64 = sample.xs().iter().sum();
        let sy: f64 = sample.ys().iter().sum();
        sample.pairs().map(|(x, y)| (sy - y) / (sx - x)).collect()
    }
}

/// Mean of the denominator variable.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanX;

impl PairStatistic for MeanX {
    fn on_sample(&self, sample: &PairedSample) -> f64 {
        summarize(sample).mean_x
    }

    fn on_resample(&self, resample: &Resample<'_>) -> f64 {
        resample.means().0
    }
}

/// Mean of the numerator variable.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanY;

impl PairStatistic for MeanY {
    fn on_sample(&self, sample: &PairedSample) -> f64 {
        summarize(sample).mean_y
    }

    fn on_resample(&self, resample: &Resample<'_>) -> f64 {
        resample.means().1
    }
}

/// The pivot `T0` at a fixed ratio, using the sample's own variance estimates.
///
/// `T0(rho)` is the one-sample t statistic of `z_i = y_i - rho x_i`.
#[derive(Debug, Clone, Copy)]
pub struct T0AtRho {
    pub rho: f64,
}

impl PairStatistic for T0AtRho {
    fn on_sample(&self, sample: &PairedSample) -> f64 {
        let idx: Vec<usize> = (0..sample.len()).collect();
        self.on_resample(&Resample::new(sample, &idx))
    }

    fn on_resample(&self, resample: &Resample<'_>) -> f64 {
        // shift by one resampled value to limit cancellation
        let (x0, y0) = resample.pairs().next().unwrap_or((0.0, 0.0));
        let k = y0 - self.rho * x0;
        let (sum, sum_sq) = resample.pairs().fold((0.0, 0.0), |(s, q), (x, y)| {
            let d = y - self.rho * x - k;
            (s + d, q + d * d)
        });
        let n = resample.len() as f64;
        let ss = sum_sq - sum * sum / n;
        if !(ss > 0.0) {
            return f64::NAN;
        }
        (k + sum / n) / (ss / (n * (n - 1.0))).sqrt()
    }

    fn jackknife(&self, sample: &PairedSample) -> Vec<f64> {
        let n = sample.len() as f64;
        let z: Vec<f64> = sample.pairs().map(|(x, y)| y - self.rho * x).collect();
        let mean = z.iter().sum::<f64>() / n;
        let ss: f64 = z.iter().map(|v| (v - mean) * (v - mean)).sum();
        z.iter()
            .map(|&zi| {
                let m = (n * mean - zi) / (n - 1.0);
                let q = ss - n / (n - 1.0) * (zi - mean) * (zi - mean);
                if !(q > 0.0) {
                    return f64::NAN;
                }
                m / (q / ((n - 1.0) * (n - 2.0))).sqrt()
            })
            .collect()
    }
}

/// Evaluates several statistics on the same `replications` resamples.
pub fn resample_joint(
    sample: &PairedSample,
    config: &BootstrapConfig,
    statistics: &[&dyn PairStatistic],
) -> Result<Vec<EmpiricalDistribution>> {
    let k = statistics.len();
    let b = config.replications;
    let n = sample.len();
    if k == 0 || b == 0 {
        return Err(Error::TooFewReplicates { needed: 1, got: b });
    }
    let mut draws = vec![0.0; b * k];
    draws.par_chunks_mut(k).enumerate().for_each_init(
        || vec![0usize; n],
        |buf, (rep, out)| {
            let mut rng = rng::stream(config.seed, rep as u64);
            if let Ok(n32) = u32::try_from(n) {
                for slot in buf.iter_mut() {
                    *slot = rng.random_range(0..n32) as usize;
                }
            } else {
                for slot in buf.iter_mut() {
                    *slot = rng.random_range(0..n);
                }
            }
            let resample = Resample::new(sample, buf);
            for (o, stat) in out.iter_mut().zip(statistics) {
                *o = stat.on_resample(&resample);
            }
        },
    );
    (0..k)
        .map(|j| EmpiricalDistribution::from_draws(draws.iter().skip(j).step_by(k).copied().collect()))
        .collect()
}

/// Bootstrap distribution of one statistic.
pub fn resample_pairs<S: PairStatistic>(
    sample: &PairedSample,
    config: &BootstrapConfig,
    statistic: &S,
) -> Result<EmpiricalDistribution> {
    Ok(resample_joint(sample, config, &[statistic])?.remove(0))
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("confidence level {level} not in (0, 1)")))
    }
}

fn check_count(dist: &EmpiricalDistribution) -> Result<()> {
    if dist.count() < MIN_REPLICATES {
        return Err(Error::TooFewReplicates { needed: MIN_REPLICATES, got: dist.count() });
    }
    Ok(())
}

/// Equal-tailed percentile interval.
pub fn percentile_ci(dist: &EmpiricalDistribution, level: f64) -> Result<ConfidenceSet> {
    check_level(level)?;
    check_count(dist)?;
    let alpha = 1.0 - level;
    Ok(ConfidenceSet::Bounded { lower: dist.quantile(alpha / 2.0), upper: dist.quantile(1.0 - alpha / 2.0) })
}

/// Result of the BCa adjustment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcaInterval {
    pub lower: f64,
    pub upper: f64,
    /// Adjusted tail probabilities used for the two quantiles.
    pub lower_prob: f64,
    pub upper_prob: f64,
    pub z0: f64,
    pub acceleration: f64,
}

/// Jackknife acceleration `sum d^3 / (6 (sum d^2)^1.5)` with `d_i = mean - theta_(i)`.
pub fn acceleration(jackknife: &[f64]) -> Result<f64> {
    let finite: Vec<f64> = jackknife.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return Err(Error::DegenerateJackknife);
    }
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    let (s2, s3) = finite.iter().fold((0.0, 0.0), |(s2, s3), v| {
        let d = mean - v;
        (s2 + d * d, s3 + d * d * d)
    });
    if !(s2 > 0.0) {
        return Err(Error::DegenerateJackknife);
    }
    Ok(s3 / (6.0 * s2.powf(1.5)))
}

/// BCa endpoints from an existing distribution, the full-sample estimate and
/// its jackknife values.
pub fn bca_from_distribution(
    dist: &EmpiricalDistribution,
    theta_hat: f64,
    jackknife: &[f64],
    level: f64,
) -> Result<BcaInterval> {
    check_level(level)?;
    check_count(dist)?;
    let a = acceleration(jackknife)?;
    let m = dist.count() as f64;
    let prop = dist.proportion_below(theta_hat).clamp(0.5 / m, 1.0 - 0.5 / m);
    let z0 = normal_quantile(prop)?;
    let alpha = 1.0 - level;
    let adjust = |p: f64| -> Result<f64> {
        let z = normal_quantile(p)?;
        let w = z0 + z;
        let denom = 1.0 - a * w;
        if denom <= 0.0 {
            return Ok(if w > 0.0 { 1.0 } else { 0.0 });
        }
        Ok(normal_cdf(z0 + w / denom))
    };
    let lower_prob = adjust(alpha / 2.0)?;
    let upper_prob = adjust(1.0 - alpha / 2.0)?;
    Ok(BcaInterval {
        lower: dist.quantile(lower_prob),
        upper: dist.quantile(upper_prob),
        lower_prob,
        upper_prob,
        z0,
        acceleration: a,
    })
}

/// BCa interval for an arbitrary statistic.
///
/// Falls back to the percentile interval when the jackknife values are all
/// equal.
pub fn bca_ci<S: PairStatistic>(
    sample: &PairedSample,
    statistic: &S,
    config: &BootstrapConfig,
    level: f64,
) -> Result<ConfidenceSet> {
    if sample.len() < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: sample.len() });
    }
    check_level(level)?;
    let dist = resample_pairs(sample, config, statistic)?;
    let theta = statistic.on_sample(sample);
    match bca_from_distribution(&dist, theta, &statistic.jackknife(sample), level) {
        Ok(b) => Ok(ConfidenceSet::Bounded { lower: b.lower, upper: b.upper }),
        Err(Error::DegenerateJackknife) => percentile_ci(&dist, level),
        Err(e) => Err(e),
    }
}

fn interval_result(
    dist: &EmpiricalDistribution,
    theta_hat: f64,
    jackknife: &[f64],
    level: f64,
    bca: bool,
) -> Result<(f64, f64, BootstrapDiagnostics)> {
    let alpha = 1.0 - level;
    let percentile = |fallback: bool| -> Result<(f64, f64, BootstrapDiagnostics)> {
        let (lo, hi) = percentile_ci(dist, level)?.bounds().expect("percentile sets are bounded");
        Ok((
            lo,
            hi,
            BootstrapDiagnostics {
                replications: dist.count() + dist.dropped(),
                dropped: dist.dropped(),
                lower_quantile: alpha / 2.0,
                upper_quantile: 1.0 - alpha / 2.0,
                z0: None,
                acceleration: None,
                fallback_to_percentile: fallback,
            },
        ))
    };
    if !bca {
        return percentile(false);
    }
    match bca_from_distribution(dist, theta_hat, jackknife, level) {
        Ok(b) => Ok((
            b.lower,
            b.upper,
            BootstrapDiagnostics {
                replications: dist.count() + dist.dropped(),
                dropped: dist.dropped(),
                lower_quantile: b.lower_prob,
                upper_quantile: b.upper_prob,
                z0: Some(b.z0),
                acceleration: Some(b.acceleration),
                fallback_to_percentile: false,
            },
        )),
        Err(Error::DegenerateJackknife) => percentile(true),
        Err(e) => Err(e),
    }
}

/// Percentile and BCa intervals for the ratio of means from one set of resamples.
pub fn ratio_intervals(
    sample: &PairedSample,
    config: &BootstrapConfig,
    level: f64,
) -> Result<(MethodResult, MethodResult)> {
    check_level(level)?;
    let stats = summarize(sample);
    if stats.mean_x == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let rho = stats.mean_y / stats.mean_x;
    let dist = resample_pairs(sample, config, &RatioOfMeans)?;
    let jack = RatioOfMeans.jackknife(sample);
    let build = |method: Method, bca: bool| -> Result<MethodResult> {
        let (lower, upper, diag) = interval_result(&dist, rho, &jack, level, bca)?;
        Ok(MethodResult {
            method,
            estimate: rho,
            set: ConfidenceSet::Bounded { lower, upper },
            diagnostics: Some(Diagnostics::Bootstrap(diag)),
        })
    };
    Ok((build(Method::BootstrapPercentile, false)?, build(Method::BootstrapBCa, true)?))
}

/// Percentile or BCa interval (per `config.method`) for the ratio of means.
pub fn bootstrap_ratio(sample: &PairedSample, config: &BootstrapConfig, level: f64) -> Result<MethodResult> {
    let (p, b) = ratio_intervals(sample, config, level)?;
    Ok(match config.method {
        Interval::Percentile => p,
        Interval::BCa => b,
    })
}

/// Quantiles `(t_lo, t_hi)` of the bootstrap distribution of `T0*` at the
/// sample ratio, together with their diagnostics.
pub fn hwang_quantiles(
    sample: &PairedSample,
    config: &BootstrapConfig,
    level: f64,
) -> Result<(f64, f64, BootstrapDiagnostics)> {
    check_level(level)?;
    let stats = summarize(sample);
    if stats.mean_x == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let pivot = T0AtRho { rho: stats.mean_y / stats.mean_x };
    let dist = resample_pairs(sample, config, &pivot)?;
    let jack = if config.method == Interval::BCa { pivot.jackknife(sample) } else { Vec::new() };
    interval_result(&dist, 0.0, &jack, level, config.method == Interval::BCa)
}

/// Hwang bootstrap confidence set: bootstrap `T0` instead of the ratio and
/// invert the resulting band as Fieller does.
pub fn hwang_set(sample: &PairedSample, config: &BootstrapConfig, spec: &ConfidenceSpec) -> Result<MethodResult> {
    if sample.len() < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: sample.len() });
    }
    let stats = summarize(sample);
    if stats.mean_x == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let (t_lo, t_hi, diag) = hwang_quantiles(sample, config, spec.level)?;
    hwang_from_band(&stats, t_lo, t_hi, Some(diag))
}

/// Hwang set for given pivot quantiles.
pub fn hwang_from_band(
    stats: &SummaryStats,
    t_lo: f64,
    t_hi: f64,
    diagnostics: Option<BootstrapDiagnostics>,
) -> Result<MethodResult> {
    let set = invert_t0_band(stats, t_lo, t_hi)?;
    Ok(MethodResult {
        method: Method::HwangBootstrap,
        estimate: stats.mean_y / stats.mean_x,
        set,
        diagnostics: diagnostics.map(Diagnostics::Bootstrap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{fieller_set, t0_statistic};
    use crate::stats::{sample_bivariate_normal, BivariateNormalParams};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn config(b: usize, seed: u64) -> BootstrapConfig {
        BootstrapConfig::new(b, seed, Interval::Percentile)
    }

    fn standardized(v: [f64; 5]) -> [f64; 5] {
        let m = v.iter().sum::<f64>() / 5.0;
        let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 4.0).sqrt();
        v.map(|x| (x - m) / sd)
    }

    // Five pairs with the published P2 moments (means, sds, zero correlation).
    fn pang_p2_like() -> PairedSample {
        let u = standardized([-2.0, -1.0, 0.0, 1.0, 2.0]);
        let v = standardized([2.0, -1.0, -2.0, -1.0, 2.0]);
        PairedSample::new(u.iter().map(|z| 3.228 + 0.623 * z).collect(), v.iter().map(|z| 8.162 + 2.31 * z).collect())
            .unwrap()
    }

    fn normal_sample(n: usize, seed: u64) -> PairedSample {
        let p = BivariateNormalParams::new(2.0, 3.0, 0.5, 0.8, 0.3).unwrap();
        sample_bivariate_normal(&p, n, seed).unwrap()
    }

    #[test]
    fn constant_sample_gives_constant_distribution() {
        let s = PairedSample::new(vec![2.0; 6], vec![5.0; 6]).unwrap();
        let d = resample_pairs(&s, &config(200, 1), &RatioOfMeans).unwrap();
        assert!(d.values().iter().all(|&v| v == 2.5));
        assert_eq!(percentile_ci(&d, 0.95).unwrap(), ConfidenceSet::Bounded { lower: 2.5, upper: 2.5 });
    }

    #[test]
    fn bootstrap_sd_of_mean() {
        let s = normal_sample(30, 11);
        let st = summarize(&s);
        let d = resample_pairs(&s, &config(4000, 2), &MeanX).unwrap();
        let expect = st.var_mean_x.sqrt() * (29.0f64 / 30.0).sqrt();
        assert!((d.std_dev() / expect - 1.0).abs() < 0.1, "{} vs {expect}", d.std_dev());
    }

    #[test]
    fn same_seed_same_distribution() {
        let s = normal_sample(25, 3);
        let a = resample_pairs(&s, &config(500, 9), &RatioOfMeans).unwrap();
        let b = resample_pairs(&s, &config(500, 9), &RatioOfMeans).unwrap();
        assert_eq!(a, b);
        let c = resample_pairs(&s, &config(500, 10), &RatioOfMeans).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let s = normal_sample(40, 4);
        let cfg = BootstrapConfig::new(600, 5, Interval::BCa);
        let spec = ConfidenceSpec::for_stats(0.95, &summarize(&s)).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| (ratio_intervals(&s, &cfg, 0.95).unwrap(), hwang_set(&s, &cfg, &spec).unwrap()))
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn generic_closure_matches_builtin() {
        let s = normal_sample(15, 6);
        let closure = |p: &PairedSample| {
            let st = summarize(p);
            st.mean_y / st.mean_x
        };
        let a = resample_pairs(&s, &config(300, 1), &closure).unwrap();
        let b = resample_pairs(&s, &config(300, 1), &RatioOfMeans).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
        let ja = closure.jackknife(&s);
        let jb = RatioOfMeans.jackknife(&s);
        for (x, y) in ja.iter().zip(&jb) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
    }

    #[test]
    fn t0_statistic_fast_paths() {
        let s = normal_sample(12, 8);
        let st = summarize(&s);
        let pivot = T0AtRho { rho: 1.3 };
        assert_relative_eq!(pivot.on_sample(&s), t0_statistic(&st, 1.3).unwrap(), max_relative = 1e-10);
        let slow = |p: &PairedSample| t0_statistic(&summarize(p), 1.3).unwrap();
        for (x, y) in pivot.jackknife(&s).iter().zip(slow.jackknife(&s)) {
            assert_relative_eq!(*x, y, max_relative = 1e-10);
        }
        let idx = [3usize, 3, 0, 7, 11, 2, 2, 9, 1, 5, 5, 4];
        let r = Resample::new(&s, &idx);
        assert_relative_eq!(pivot.on_resample(&r), slow(&r.to_sample()), max_relative = 1e-10);
    }

    #[test]
    fn percentile_on_integers() {
        let d = EmpiricalDistribution::from_draws((1..=1000).map(f64::from).collect()).unwrap();
        let (lo, hi) = percentile_ci(&d, 0.95).unwrap().bounds().unwrap();
        assert_relative_eq!(lo, 25.975, max_relative = 1e-12);
        assert_relative_eq!(hi, 975.025, max_relative = 1e-12);
        assert!((lo - 25.5).abs() <= 0.5 && (hi - 975.5).abs() <= 0.5);
        assert!(matches!(percentile_ci(&d, 0.0), Err(Error::DomainError(_))));
        let few = EmpiricalDistribution::from_draws(vec![1.0; 50]).unwrap();
        assert!(matches!(percentile_ci(&few, 0.95), Err(Error::TooFewReplicates { .. })));
        let flat = EmpiricalDistribution::from_draws(vec![3.0; 150]).unwrap();
        assert_eq!(percentile_ci(&flat, 0.9).unwrap(), ConfidenceSet::Bounded { lower: 3.0, upper: 3.0 });
    }

    #[test]
    fn non_finite_draws_are_dropped() {
        let mut v: Vec<f64> = (0..300).map(f64::from).collect();
        v.extend([f64::NAN; 100]);
        let d = EmpiricalDistribution::from_draws(v).unwrap();
        assert_eq!((d.count(), d.dropped()), (300, 100));
        let mut bad = vec![f64::INFINITY; 60];
        bad.extend([1.0; 40]);
        assert!(matches!(EmpiricalDistribution::from_draws(bad), Err(Error::AllResamplesDegenerate { .. })));
    }

    #[test]
    fn bca_reduces_to_percentile_when_unbiased_and_unaccelerated() {
        let d = EmpiricalDistribution::from_draws((1..=1000).map(f64::from).collect()).unwrap();
        let b = bca_from_distribution(&d, 500.5, &[-1.0, 0.0, 1.0], 0.95).unwrap();
        assert_eq!(b.z0, 0.0);
        assert_eq!(b.acceleration, 0.0);
        let (lo, hi) = percentile_ci(&d, 0.95).unwrap().bounds().unwrap();
        assert_relative_eq!(b.lower, lo, max_relative = 1e-12);
        assert_relative_eq!(b.upper, hi, max_relative = 1e-12);
        assert_eq!(acceleration(&[2.0, 2.0, 2.0]), Err(Error::DegenerateJackknife));
    }

    #[test]
    fn bca_within_distribution_range() {
        let s = pang_p2_like();
        let st = summarize(&s);
        assert_relative_eq!(st.mean_x, 3.228, max_relative = 1e-12);
        assert_relative_eq!((st.var_mean_y * 5.0).sqrt(), 2.31, max_relative = 1e-12);
        let cfg = BootstrapConfig::new(2000, 21, Interval::BCa);
        let dist = resample_pairs(&s, &cfg, &RatioOfMeans).unwrap();
        let (p, b) = ratio_intervals(&s, &cfg, 0.95).unwrap();
        for r in [p, b] {
            let (lo, hi) = r.set.bounds().unwrap();
            assert!(dist.min() <= lo && lo <= hi && hi <= dist.max());
        }
        let generic = bca_ci(&s, &RatioOfMeans, &cfg, 0.95).unwrap();
        assert_eq!(generic, b.set);
    }

    // Independent BCa: own resampling loop, explicit leave-one-out means and
    // statrs for the normal functions.
    fn oracle_bca_mean_y(sample: &PairedSample, b: usize, level: f64) -> (f64, f64) {
        let ys = sample.ys();
        let n = ys.len();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let theta = mean(ys);
        let mut rng = rand::rngs::StdRng::seed_from_u64(12345);
        let mut boot: Vec<f64> = (0..b).map(|_| (0..n).map(|_| ys[rng.random_range(0..n)]).sum::<f64>() / n as f64).collect();
        boot.sort_by(f64::total_cmp);
        let below = boot.iter().filter(|&&v| v < theta).count() as f64 / b as f64;
        let norm = Normal::new(0.0, 1.0).unwrap();
        let z0 = norm.inverse_cdf(below);
        let jack: Vec<f64> = (0..n)
            .map(|i| mean(&ys.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect::<Vec<_>>()))
            .collect();
        let jm = mean(&jack);
        let num: f64 = jack.iter().map(|j| (jm - j).powi(3)).sum();
        let den: f64 = jack.iter().map(|j| (jm - j).powi(2)).sum::<f64>().powf(1.5) * 6.0;
        let a = num / den;
        let alpha = 1.0 - level;
        let adj = |p: f64| {
            let z = norm.inverse_cdf(p);
            norm.cdf(z0 + (z0 + z) / (1.0 - a * (z0 + z)))
        };
        let q = |p: f64| boot[((b as f64 - 1.0) * p).round() as usize];
        (q(adj(alpha / 2.0)), q(adj(1.0 - alpha / 2.0)))
    }

    #[test]
    fn bca_matches_independent_oracle_for_a_mean() {
        let s = normal_sample(40, 17);
        let cfg = BootstrapConfig::new(4000, 3, Interval::BCa);
        let (lo, hi) = bca_ci(&s, &MeanY, &cfg, 0.95).unwrap().bounds().unwrap();
        let (olo, ohi) = oracle_bca_mean_y(&s, 4000, 0.95);
        assert!((lo / olo - 1.0).abs() < 0.1 && (hi / ohi - 1.0).abs() < 0.1, "{lo} {hi} vs {olo} {ohi}");
        // same comparison on the interval half-widths, which is the stricter check
        let m = summarize(&s).mean_y;
        assert!(((m - lo) / (m - olo) - 1.0).abs() < 0.1 && ((hi - m) / (ohi - m) - 1.0).abs() < 0.1);
    }

    #[test]
    fn hwang_with_symmetric_quantiles_is_fieller() {
        let s = pang_p2_like();
        let st = summarize(&s);
        let spec = ConfidenceSpec::for_stats(0.95, &st).unwrap();
        let h = hwang_from_band(&st, -spec.quantile, spec.quantile, None).unwrap();
        assert_eq!(h.set, fieller_set(&st, &spec).unwrap().set);
    }

    #[test]
    fn hwang_close_to_fieller_for_large_samples() {
        let s = normal_sample(500, 23);
        let st = summarize(&s);
        let spec = ConfidenceSpec::for_stats(0.95, &st).unwrap();
        let h = hwang_set(&s, &BootstrapConfig::new(2000, 8, Interval::BCa), &spec).unwrap();
        let (hl, hu) = h.set.bounds().unwrap();
        let (fl, fu) = fieller_set(&st, &spec).unwrap().set.bounds().unwrap();
        assert!((hl / fl - 1.0).abs() < 0.05 && (hu / fu - 1.0).abs() < 0.05, "{hl} {hu} vs {fl} {fu}");
        let Some(Diagnostics::Bootstrap(d)) = h.diagnostics else { panic!() };
        assert_eq!(d.replications, 2000);
        assert!(d.z0.is_some());
    }

    #[test]
    fn hwang_membership_matches_grid() {
        let s = normal_sample(8, 31);
        let st = summarize(&s);
        let (t_lo, t_hi, _) = hwang_quantiles(&s, &BootstrapConfig::default(), 0.95).unwrap();
        let h = hwang_from_band(&st, t_lo, t_hi, None).unwrap();
        for k in 0..10_000 {
            let rho = -100.0 + 0.02 * k as f64;
            let t0 = t0_statistic(&st, rho).unwrap();
            let near = [t_lo, t_hi].iter().any(|t| (t0 - t).abs() < 1e-7);
            if !near {
                assert_eq!(h.set.contains(rho), t_lo <= t0 && t0 <= t_hi, "rho={rho}");
            }
        }
    }

    #[test]
    fn hwang_can_be_unbounded() {
        // denominator mean indistinguishable from zero
        let xs = vec![0.3, -0.5, 0.9, -0.2, 0.1, -0.4, 0.6, -0.1];
        let ys = vec![2.1, 1.7, 2.6, 1.9, 2.2, 2.4, 1.8, 2.0];
        let s = PairedSample::new(xs, ys).unwrap();
        let spec = ConfidenceSpec::for_stats(0.95, &summarize(&s)).unwrap();
        let h = hwang_set(&s, &BootstrapConfig::default(), &spec).unwrap();
        assert!(!h.set.is_bounded());
    }
}
