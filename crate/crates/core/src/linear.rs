//! Least-squares models for ratio-type questions: zero-intercept slopes and
//! their comparison across groups, regression on deflated variables,
//! allometric (log-linear) fits, and the partial-regression analysis that
//! exposes spurious correlations between ratios sharing a denominator.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dist::{f_upper_tail, t_two_sided_p};
use crate::error::{Error, Result};
use crate::stats::PairedSample;

pub const INTERCEPT: &str = "intercept";

const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub coefficients: Vec<Coefficient>,
    pub n: usize,
    pub df: usize,
    pub rss: f64,
    /// `rss / df`.
    pub residual_variance: f64,
    /// Centered when the model has an intercept, uncentered otherwise.
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

impl RegressionFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    /// Estimate of a named coefficient; panics if the name is unknown.
    pub fn estimate(&self, name: &str) -> f64 {
        self.coefficient(name).unwrap_or_else(|| panic!("no coefficient named `{name}`")).estimate
    }

    fn rename(mut self, from: &str, to: &str) -> Self {
        if let Some(c) = self.coefficients.iter_mut().find(|c| c.name == from) {
            c.name = to.to_string();
        }
        self
    }
}

/// Ordinary least squares via a QR decomposition of the design matrix.
pub fn ols_fit(y: &[f64], regressors: &[(&str, &[f64])], intercept: bool) -> Result<RegressionFit> {
    let n = y.len();
    let p = regressors.len() + intercept as usize;
    if p == 0 {
        return Err(Error::InvalidParameter("model has no coefficients".into()));
    }
    if n < p + 1 {
        return Err(Error::TooFewObservations { needed: p + 1, got: n });
    }
    if let Some((_, col)) = regressors.iter().find(|(_, col)| col.len() != n) {
        return Err(Error::LengthMismatch { xs: col.len(), ys: n });
    }
    if y.iter().chain(regressors.iter().flat_map(|(_, c)| c.iter())).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }

    let mut names: Vec<String> = Vec::with_capacity(p);
    if intercept {
        names.push(INTERCEPT.to_string());
    }
    names.extend(regressors.iter().map(|(name, _)| name.to_string()));
    let x = DMatrix::from_fn(n, p, |i, j| {
        if intercept && j == 0 {
            1.0
        } else {
            regressors[j - intercept as usize].1[i]
        }
    });
    let yv = DVector::from_column_slice(y);

    let qr = x.clone().qr();
    let r = qr.r();
    let diag_max = (0..p).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if diag_max == 0.0 || (0..p).any(|j| r[(j, j)].abs() <= RANK_TOL * diag_max) {
        return Err(Error::RankDeficient);
    }
    let qty = qr.q().transpose() * &yv;
    let beta = r.solve_upper_triangular(&qty).ok_or(Error::RankDeficient)?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::RankDeficient)?;

    let residuals: Vec<f64> = (&yv - &x * &beta).iter().copied().collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let df = n - p;
    let s2 = rss / df as f64;
    let tss = if intercept {
        let m = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
    } else {
        y.iter().map(|v| v * v).sum::<f64>()
    };
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };

    let coefficients = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let var = s2 * r_inv.row(j).iter().map(|v| v * v).sum::<f64>();
            let se = var.sqrt();
            let t = if se > 0.0 { beta[j] / se } else if beta[j] == 0.0 { 0.0 } else { f64::INFINITY.copysign(beta[j]) };
            Coefficient { name, estimate: beta[j], std_error: se, t_value: t, p_value: t_two_sided_p(t, df as f64) }
        })
        .collect();
    Ok(RegressionFit { coefficients, n, df, rss, residual_variance: s2, r_squared, residuals })
}

/// Nested-model F test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub restricted: RegressionFit,
    pub full: RegressionFit,
    pub f_statistic: f64,
    pub df_numerator: usize,
    pub df_denominator: usize,
    pub p_value: f64,
}

/// `F = ((RSS_r - RSS_f) / (df_r - df_f)) / (RSS_f / df_f)`.
pub fn compare_models(restricted: RegressionFit, full: RegressionFit) -> Result<ModelComparison> {
    if restricted.n != full.n || restricted.df <= full.df {
        return Err(Error::InvalidParameter("models are not nested".into()));
    }
    let d1 = restricted.df - full.df;
    let d2 = full.df;
    let mut diff = restricted.rss - full.rss;
    // both fits of the same data: differences at rounding level are zero
    if diff <= 1e-12 * restricted.rss.max(f64::MIN_POSITIVE) {
        diff = 0.0;
    }
    let (f, p) = if diff == 0.0 {
        (0.0, 1.0)
    } else if full.rss == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (diff / d1 as f64) / (full.rss / d2 as f64);
        (f, f_upper_tail(f, d1 as f64, d2 as f64))
    };
    Ok(ModelComparison { restricted, full, f_statistic: f, df_numerator: d1, df_denominator: d2, p_value: p })
}

/// Tests whether zero-intercept slopes `y = beta_g x` differ between groups.
///
/// The full model has one slope per group (`beta_1`, `beta_2`, ...), the
/// restricted model a common `beta`.
pub fn ancova_ratio_compare(groups: &[PairedSample]) -> Result<ModelComparison> {
    if groups.len() < 2 {
        return Err(Error::InvalidParameter("need at least two groups".into()));
    }
    let y: Vec<f64> = groups.iter().flat_map(|g| g.ys().iter().copied()).collect();
    let x: Vec<f64> = groups.iter().flat_map(|g| g.xs().iter().copied()).collect();
    let n = y.len();
    let names: Vec<String> = (1..=groups.len()).map(|g| format!("beta_{g}")).collect();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(groups.len());
    let mut offset = 0;
    for g in groups {
        let mut col = vec![0.0; n];
        col[offset..offset + g.len()].copy_from_slice(g.xs());
        offset += g.len();
        columns.push(col);
    }
    let per_group: Vec<(&str, &[f64])> = names.iter().map(String::as_str).zip(columns.iter().map(Vec::as_slice)).collect();
    let full = ols_fit(&y, &per_group, false)?;
    let restricted = ols_fit(&y, &[("beta", &x)], false)?;
    compare_models(restricted, full)
}

fn deflate(x: &[f64], v: &[f64]) -> Vec<f64> {
    v.iter().zip(x).map(|(v, x)| v / x).collect()
}

fn check_denominators(x: &[f64]) -> Result<()> {
    let zeros: Vec<usize> = x.iter().enumerate().filter(|(_, &v)| v == 0.0).map(|(i, _)| i).collect();
    if zeros.is_empty() {
        Ok(())
    } else {
        Err(Error::ZeroIndividualDenominator { indices: zeros })
    }
}

/// Fits `y / x = alpha (1 / x) + beta + sum_k gamma_k (z_k / x)`.
///
/// This is `y = alpha + beta x + sum_k gamma_k z_k` divided through by `x`;
/// the coefficients are named `alpha`, `beta` and the names of the extra
/// regressors.
pub fn deflated_fit_with(x: &[f64], y: &[f64], extra: &[(&str, &[f64])]) -> Result<RegressionFit> {
    check_denominators(x)?;
    let inv: Vec<f64> = x.iter().map(|v| 1.0 / v).collect();
    let deflated: Vec<Vec<f64>> = extra.iter().map(|(_, z)| deflate(x, z)).collect();
    let mut regs: Vec<(&str, &[f64])> = vec![("alpha", &inv)];
    regs.extend(extra.iter().zip(&deflated).map(|((name, _), z)| (*name, z.as_slice())));
    Ok(ols_fit(&deflate(x, y), &regs, true)?.rename(INTERCEPT, "beta"))
}

/// Regression of `y_i / x_i` on `1 / x_i`: estimates `alpha` and `beta` of
/// `y = alpha + beta x` when the errors scale with `x`.
pub fn deflated_fit(sample: &PairedSample) -> Result<RegressionFit> {
    deflated_fit_with(sample.xs(), sample.ys(), &[])
}

/// Log-linear fit of `y = beta prod_k x_k^gamma_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllometricFit {
    /// Coefficients `log_beta` and one exponent per regressor.
    pub fit: RegressionFit,
    pub beta: f64,
}

/// `log y = log_beta + sum_k gamma_k log x_k`, exponents named after the regressors.
pub fn allometric_fit(y: &[f64], regressors: &[(&str, &[f64])]) -> Result<AllometricFit> {
    if y.iter().chain(regressors.iter().flat_map(|(_, c)| c.iter())).any(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveData);
    }
    let ln = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<f64>>();
    let logs: Vec<Vec<f64>> = regressors.iter().map(|(_, c)| ln(c)).collect();
    let regs: Vec<(&str, &[f64])> = regressors.iter().zip(&logs).map(|((name, _), c)| (*name, c.as_slice())).collect();
    let fit = ols_fit(&ln(y), &regs, true)?.rename(INTERCEPT, "log_beta");
    let beta = fit.estimate("log_beta").exp();
    Ok(AllometricFit { fit, beta })
}

/// `y = beta x^gamma` on a paired sample.
pub fn allometric_fit_pair(sample: &PairedSample) -> Result<AllometricFit> {
    allometric_fit(sample.ys(), &[("gamma", sample.xs())])
}

/// Counts of women (`x`), babies (`y`) and storks (`z`) per county.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorkData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl StorkData {
    /// The four-county example (women in units of 10000).
    pub fn example() -> Self {
        StorkData {
            x: vec![1.0, 2.0, 3.0, 4.0],
            y: vec![15.8, 20.2, 25.4, 30.1],
            z: vec![3.2, 4.1, 5.6, 6.3],
        }
    }
}

/// Three ways of asking whether storks matter once women are accounted for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpuriousReport {
    pub data: StorkData,
    /// `y = a + b x` vs `y = a + b x + gamma z`.
    pub partial: ModelComparison,
    /// The same models divided through by `x`.
    pub deflated_partial: ModelComparison,
    /// `y/x = b` vs `y/x = b + gamma z/x`: the rate-based analysis.
    pub rate_based: ModelComparison,
}

pub fn spurious_demo(data: &StorkData) -> Result<SpuriousReport> {
    let n = data.x.len();
    if n < 4 {
        return Err(Error::TooFewObservations { needed: 4, got: n });
    }
    if data.y.len() != n || data.z.len() != n {
        return Err(Error::LengthMismatch { xs: n, ys: data.y.len().min(data.z.len()) });
    }
    if data.x.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveData);
    }
    let (x, y, z) = (&data.x[..], &data.y[..], &data.z[..]);

    let partial = compare_models(
        ols_fit(y, &[("x", x)], true)?,
        ols_fit(y, &[("x", x), ("gamma", z)], true)?,
    )?;
    let deflated_partial = compare_models(deflated_fit_with(x, y, &[])?, deflated_fit_with(x, y, &[("gamma", z)])?)?;
    let birth_rate = deflate(x, y);
    let stork_rate = deflate(x, z);
    let rate_based = compare_models(
        ols_fit(&birth_rate, &[], true)?,
        ols_fit(&birth_rate, &[("gamma", &stork_rate)], true)?,
    )?;
    Ok(SpuriousReport { data: data.clone(), partial, deflated_partial, rate_based })
}

fn write_fit(f: &mut fmt::Formatter<'_>, label: &str, fit: &RegressionFit) -> fmt::Result {
    writeln!(f, "  {label} (rss {:.4}, df {})", fit.rss, fit.df)?;
    for c in &fit.coefficients {
        writeln!(
            f,
            "    {:<10} {:>10.4}  se {:>8.4}  t {:>8.3}  p {:.4}",
            c.name, c.estimate, c.std_error, c.t_value, c.p_value
        )?;
    }
    Ok(())
}

fn write_comparison(f: &mut fmt::Formatter<'_>, title: &str, m: &ModelComparison) -> fmt::Result {
    writeln!(f, "{title}")?;
    write_fit(f, "restricted", &m.restricted)?;
    write_fit(f, "full", &m.full)?;
    let verdict = if m.p_value < 0.05 { "significant" } else { "not significant" };
    writeln!(
        f,
        "  F({}, {}) = {:.4}, p = {:.4}: stork term {verdict} at 5%",
        m.df_numerator, m.df_denominator, m.f_statistic, m.p_value
    )
}

impl fmt::Display for SpuriousReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "county  women(x)  babies(y)  storks(z)  birth-rate  stork-rate")?;
        for i in 0..self.data.x.len() {
            let (x, y, z) = (self.data.x[i], self.data.y[i], self.data.z[i]);
            writeln!(f, "{:>6}  {:>8.1}  {:>9.1}  {:>9.1}  {:>10.2}  {:>10.2}", i + 1, x, y, z, y / x, z / x)?;
        }
        writeln!(f)?;
        write_comparison(f, "Partial regression: y = a + b x [+ gamma z]", &self.partial)?;
        writeln!(f)?;
        write_comparison(f, "Deflated partial regression: y/x = a/x + b [+ gamma z/x]", &self.deflated_partial)?;
        writeln!(f)?;
        write_comparison(f, "Rate-based regression: y/x = b [+ gamma z/x]", &self.rate_based)?;
        writeln!(f)?;
        writeln!(f, "With n = 4 the p-values are fragile; the example is illustrative.")
    }
}
