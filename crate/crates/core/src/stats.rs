//! Sample summaries, confidence specifications and bivariate normal sampling.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{Error, Result};
use crate::rng;

/// Paired observations `(x_i, y_i)`; `x` is the denominator, `y` the numerator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PairedSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch { xs: xs.len(), ys: ys.len() });
        }
        if xs.len() < 2 {
            return Err(Error::TooFewObservations { needed: 2, got: xs.len() });
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(PairedSample { xs, ys })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys) = pairs.iter().copied().unzip();
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// Individual ratios `y_i / x_i`.
    pub fn ratios(&self) -> Result<Vec<f64>> {
        let zeros: Vec<usize> = self
            .xs
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == 0.0)
            .map(|(i, _)| i)
            .collect();
        if !zeros.is_empty() {
            return Err(Error::ZeroIndividualDenominator { indices: zeros });
        }
        Ok(self.pairs().map(|(x, y)| y / x).collect())
    }

    pub(crate) fn from_parts_unchecked(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        PairedSample { xs, ys }
    }
}

/// Means, variances and covariance of the sample means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_mean_x: f64,
    pub var_mean_y: f64,
    pub cov_mean_xy: f64,
    pub df: usize,
}

impl SummaryStats {
    /// Builds summary statistics directly, e.g. from published means and SDs.
    ///
    /// `df` is set to `n - 1`.
    pub fn from_moments(
        n: usize,
        mean_x: f64,
        mean_y: f64,
        var_mean_x: f64,
        var_mean_y: f64,
        cov_mean_xy: f64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewObservations { needed: 2, got: n });
        }
        let vals = [mean_x, mean_y, var_mean_x, var_mean_y, cov_mean_xy];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if var_mean_x < 0.0 || var_mean_y < 0.0 {
            return Err(Error::InvalidParameter("variances must be non-negative".into()));
        }
        let bound = var_mean_x * var_mean_y;
        if cov_mean_xy * cov_mean_xy > bound * (1.0 + 1e-12) + f64::MIN_POSITIVE {
            return Err(Error::InvalidParameter(
                "covariance exceeds the Cauchy-Schwarz bound".into(),
            ));
        }
        Ok(SummaryStats { n, mean_x, mean_y, var_mean_x, var_mean_y, cov_mean_xy, df: n - 1 })
    }

    /// Builds summary statistics from per-observation means, SDs and correlation.
    pub fn from_individual(
        n: usize,
        mean_x: f64,
        mean_y: f64,
        sd_x: f64,
        sd_y: f64,
        corr: f64,
    ) -> Result<Self> {
        if !(-1.0..=1.0).contains(&corr) {
            return Err(Error::InvalidParameter(format!("correlation {corr} outside [-1, 1]")));
        }
        let nf = n as f64;
        Self::from_moments(
            n,
            mean_x,
            mean_y,
            sd_x * sd_x / nf,
            sd_y * sd_y / nf,
            corr * sd_x * sd_y / nf,
        )
    }

    pub fn sd_mean_x(&self) -> f64 {
        self.var_mean_x.sqrt()
    }

    pub fn sd_mean_y(&self) -> f64 {
        self.var_mean_y.sqrt()
    }
}

// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Summary statistics of a paired sample (corrected two-pass algorithm).
pub fn summarize(sample: &PairedSample) -> SummaryStats {
    let n = sample.len();
    let nf = n as f64;
    let mean_x = compensated_sum(sample.xs.iter().copied()) / nf;
    let mean_y = compensated_sum(sample.ys.iter().copied()) / nf;
    let dx_sum = compensated_sum(sample.xs.iter().map(|x| x - mean_x));
    let dy_sum = compensated_sum(sample.ys.iter().map(|y| y - mean_y));
    let sxx = compensated_sum(sample.xs.iter().map(|x| (x - mean_x) * (x - mean_x))) - dx_sum * dx_sum / nf;
    let syy = compensated_sum(sample.ys.iter().map(|y| (y - mean_y) * (y - mean_y))) - dy_sum * dy_sum / nf;
    let sxy = compensated_sum(sample.pairs().map(|(x, y)| (x - mean_x) * (y - mean_y))) - dx_sum * dy_sum / nf;
    let scale = 1.0 / (nf * (nf - 1.0));
    SummaryStats {
        n,
        mean_x,
        mean_y,
        var_mean_x: (sxx * scale).max(0.0),
        var_mean_y: (syy * scale).max(0.0),
        cov_mean_xy: sxy * scale,
        df: n - 1,
    }
}

/// Signed coefficients of variation of the two sample means.
pub fn coefficient_of_variation(stats: &SummaryStats) -> Result<(f64, f64)> {
    if stats.mean_x == 0.0 || stats.mean_y == 0.0 {
        return Err(Error::ZeroMean);
    }
    Ok((stats.sd_mean_x() / stats.mean_x, stats.sd_mean_y() / stats.mean_y))
}

/// Student-t inverse CDF; `df = f64::INFINITY` selects the normal distribution.
pub fn t_quantile(p: f64, df: f64) -> Result<f64> {
    dist::t_quantile(p, df)
}

/// Confidence level together with the two-sided t quantile it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSpec {
    pub level: f64,
    pub df: f64,
    pub quantile: f64,
}

impl ConfidenceSpec {
    pub fn new(level: f64, df: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::DomainError(format!("confidence level {level} not in (0, 1)")));
        }
        let alpha = 1.0 - level;
        let quantile = t_quantile(1.0 - alpha / 2.0, df)?;
        Ok(ConfidenceSpec { level, df, quantile })
    }

    /// Spec for the usual paired-sample policy `df = n - 1`.
    pub fn for_stats(level: f64, stats: &SummaryStats) -> Result<Self> {
        Self::new(level, stats.df as f64)
    }

    pub fn alpha(&self) -> f64 {
        1.0 - self.level
    }
}

/// Parameters of a bivariate normal population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateNormalParams {
    pub mean_x: f64,
    pub mean_y: f64,
    pub sd_x: f64,
    pub sd_y: f64,
    pub corr: f64,
}

impl BivariateNormalParams {
    pub fn new(mean_x: f64, mean_y: f64, sd_x: f64, sd_y: f64, corr: f64) -> Result<Self> {
        if ![mean_x, mean_y, sd_x, sd_y, corr].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if sd_x <= 0.0 || sd_y <= 0.0 {
            return Err(Error::InvalidParameter("standard deviations must be positive".into()));
        }
        if !(-1.0..=1.0).contains(&corr) {
            return Err(Error::InvalidParameter(format!("correlation {corr} outside [-1, 1]")));
        }
        Ok(BivariateNormalParams { mean_x, mean_y, sd_x, sd_y, corr })
    }
}

/// Draws `n` pairs from a bivariate normal distribution.
///
/// Standard normals come from the ziggurat sampler of `rand_distr` driven by
/// a ChaCha8 stream derived from `seed`; the pair is formed as
/// `x = mx + sx z1`, `y = my + sy (r z1 + sqrt(1 - r^2) z2)`.
pub fn sample_bivariate_normal(params: &BivariateNormalParams, n: usize, seed: u64) -> Result<PairedSample> {
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let mut rng = rng::stream(seed, 0);
    let ortho = (1.0 - params.corr * params.corr).max(0.0).sqrt();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        xs.push(params.mean_x + params.sd_x * z1);
        ys.push(params.mean_y + params.sd_y * (params.corr * z1 + ortho * z2));
    }
    Ok(PairedSample::from_parts_unchecked(xs, ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    pub(crate) fn pang_p1() -> PairedSample {
        PairedSample::new(vec![6.34, 4.02, 2.88], vec![4.87, 8.30, 11.66]).unwrap()
    }

    // Straightforward two-pass evaluation of the textbook formulas.
    fn oracle(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64, f64) {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        let mut sxy = 0.0;
        for i in 0..xs.len() {
            sxx += (xs[i] - mx).powi(2);
            syy += (ys[i] - my).powi(2);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        let k = 1.0 / (n * (n - 1.0));
        (mx, my, sxx * k, syy * k, sxy * k)
    }

    #[test]
    fn pang_p1_summary() {
        let s = summarize(&pang_p1());
        assert_eq!(s.n, 3);
        assert_eq!(s.df, 2);
        assert!((s.mean_x - 4.413).abs() < 5e-4);
        assert!((s.mean_y - 8.2767).abs() < 5e-4);
        assert!(((s.var_mean_x * 3.0).sqrt() - 1.763).abs() < 5e-4);
        assert!(((s.var_mean_y * 3.0).sqrt() - 3.396).abs() < 1e-3);
        assert!((s.var_mean_x - 1.0363).abs() < 5e-4);
        assert!((s.var_mean_y - 3.8421).abs() < 5e-4);
        assert!((s.cov_mean_xy + 1.9601).abs() < 5e-4);
    }

    #[test]
    fn constant_data_has_zero_variances() {
        let s = summarize(&PairedSample::new(vec![1.0; 4], vec![2.0; 4]).unwrap());
        assert_eq!(s.var_mean_x, 0.0);
        assert_eq!(s.var_mean_y, 0.0);
        assert_eq!(s.cov_mean_xy, 0.0);
    }

    #[test]
    fn six_point_sample_matches_oracle() {
        let xs = [3.1, -0.4, 2.2, 5.9, 1.05, 4.4];
        let ys = [1.0, 2.5, -3.3, 0.7, 8.25, 2.0];
        let s = summarize(&PairedSample::new(xs.to_vec(), ys.to_vec()).unwrap());
        let (mx, my, vx, vy, c) = oracle(&xs, &ys);
        assert_relative_eq!(s.mean_x, mx, max_relative = 1e-12);
        assert_relative_eq!(s.mean_y, my, max_relative = 1e-12);
        assert_relative_eq!(s.var_mean_x, vx, max_relative = 1e-12);
        assert_relative_eq!(s.var_mean_y, vy, max_relative = 1e-12);
        assert_relative_eq!(s.cov_mean_xy, c, max_relative = 1e-12);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            PairedSample::new(vec![1.0], vec![1.0]),
            Err(Error::TooFewObservations { needed: 2, got: 1 })
        );
        assert_eq!(PairedSample::new(vec![1.0, f64::NAN], vec![1.0, 2.0]), Err(Error::NonFiniteInput));
        assert!(matches!(PairedSample::new(vec![1.0, 2.0], vec![1.0]), Err(Error::LengthMismatch { .. })));
        let r = PairedSample::new(vec![0.0, 1.0, 0.0], vec![1.0; 3]).unwrap().ratios();
        assert_eq!(r, Err(Error::ZeroIndividualDenominator { indices: vec![0, 2] }));
    }

    #[test]
    fn cv_of_pang_p1() {
        let (cx, cy) = coefficient_of_variation(&summarize(&pang_p1())).unwrap();
        assert!((cx - 0.2307).abs() < 5e-4);
        assert!(cy > 0.0);
        let zero = SummaryStats::from_moments(3, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(coefficient_of_variation(&zero).unwrap().0, 0.0);
        let bad = SummaryStats::from_moments(3, 0.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(coefficient_of_variation(&bad), Err(Error::ZeroMean));
    }

    #[test]
    fn t_quantile_anchor_values() {
        assert!((t_quantile(0.975, 2.0).unwrap() - 4.3027).abs() < 5e-4);
        assert_eq!(t_quantile(0.5, 7.0).unwrap(), 0.0);
        assert!((t_quantile(0.975, f64::INFINITY).unwrap() - 1.95996).abs() < 1e-4);
        assert!(matches!(t_quantile(1.5, 3.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn spec_rejects_bad_level() {
        assert!(ConfidenceSpec::new(1.5, 3.0).is_err());
        assert!(ConfidenceSpec::new(0.0, 3.0).is_err());
        let s = ConfidenceSpec::new(0.95, 2.0).unwrap();
        assert!((s.quantile - 4.3027).abs() < 5e-4);
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = BivariateNormalParams::new(1.0, 2.0, 0.5, 0.3, 0.4).unwrap();
        let a = sample_bivariate_normal(&p, 50, 11).unwrap();
        let b = sample_bivariate_normal(&p, 50, 11).unwrap();
        let c = sample_bivariate_normal(&p, 50, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sampler_large_sample_moments() {
        let p = BivariateNormalParams::new(0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        let s = sample_bivariate_normal(&p, 200_000, 3).unwrap();
        let st = summarize(&s);
        let corr = st.cov_mean_xy / (st.var_mean_x * st.var_mean_y).sqrt();
        assert!(corr.abs() < 0.01, "corr {corr}");

        let p = BivariateNormalParams::new(1.0, 1.0, 0.1, 0.1, 0.0).unwrap();
        let st = summarize(&sample_bivariate_normal(&p, 200_000, 4).unwrap());
        assert!((st.mean_x - 1.0).abs() < 0.002);
        assert!((st.mean_y - 1.0).abs() < 0.002);

        let p = BivariateNormalParams::new(0.0, 0.0, 2.0, 1.0, -0.7).unwrap();
        let st = summarize(&sample_bivariate_normal(&p, 200_000, 5).unwrap());
        let corr = st.cov_mean_xy / (st.var_mean_x * st.var_mean_y).sqrt();
        assert!((corr + 0.7).abs() < 0.01, "corr {corr}");
    }

    proptest! {
        #[test]
        fn location_and_scale_covariance(
            pairs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30),
            shift in -100.0f64..100.0,
            scale in 0.01f64..100.0,
        ) {
            let sample = PairedSample::from_pairs(&pairs).unwrap();
            let base = summarize(&sample);
            let shifted = summarize(&PairedSample::new(
                sample.xs().iter().map(|x| x + shift).collect(),
                sample.ys().to_vec(),
            ).unwrap());
            prop_assert!((shifted.mean_x - base.mean_x - shift).abs() < 1e-10 * (1.0 + shift.abs()));
            prop_assert!((shifted.var_mean_x - base.var_mean_x).abs() < 1e-10);
            prop_assert!((shifted.var_mean_y - base.var_mean_y).abs() < 1e-10);
            prop_assert!((shifted.cov_mean_xy - base.cov_mean_xy).abs() < 1e-10);

            let scaled = summarize(&PairedSample::new(
                sample.xs().iter().map(|x| x * scale).collect(),
                sample.ys().to_vec(),
            ).unwrap());
            prop_assert!((scaled.mean_x - base.mean_x * scale).abs() <= 1e-12 * scale * (1.0 + base.mean_x.abs()));
            prop_assert!((scaled.var_mean_x - base.var_mean_x * scale * scale).abs() <= 1e-10 * scale * scale * (1.0 + base.var_mean_x));
            prop_assert!((scaled.cov_mean_xy - base.cov_mean_xy * scale).abs() <= 1e-10 * scale * (1.0 + base.cov_mean_xy.abs()));
            prop_assert!(base.cov_mean_xy.powi(2) <= base.var_mean_x * base.var_mean_y * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn t_quantile_monotone_and_antisymmetric(p in 0.501f64..0.999, df in 1u32..200) {
            let df = df as f64;
            let q = t_quantile(p, df).unwrap();
            prop_assert!(t_quantile(p + 0.0005, df).unwrap() > q);
            prop_assert!(t_quantile(p, df + 1.0).unwrap() < q);
            prop_assert!((t_quantile(1.0 - p, df).unwrap() + q).abs() < 1e-9 * q.max(1.0));
        }
    }
}
