//! Closed-form confidence sets for the ratio of means `E(Y) / E(X)`.
//!
//! The Fieller set inverts the pivot
//!
//! ```text
//! T0(rho) = (mean_y - rho * mean_x) / sqrt(var_y - 2 rho cov + rho^2 var_x)
//! ```
//!
//! and may be a bounded interval, the complement of an interval, or the
//! whole real line. The Taylor, index, trimmed-index and zero-variance
//! methods always return bounded intervals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{summarize, t_quantile, ConfidenceSpec, PairedSample, SummaryStats};

/// Relative size below which a negative discriminant is treated as rounding noise.
const DISCRIMINANT_TOL: f64 = 1e-12;

/// A confidence set for a ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConfidenceSet {
    /// The closed interval `[lower, upper]`.
    Bounded { lower: f64, upper: f64 },
    /// The real line minus the open interval `(excluded_lower, excluded_upper)`.
    /// One end may be infinite, in which case the set is a half-line.
    UnboundedExclusive { excluded_lower: f64, excluded_upper: f64 },
    /// Every value is included.
    WholeLine,
}

impl ConfidenceSet {
    pub fn contains(&self, rho: f64) -> bool {
        match *self {
            ConfidenceSet::Bounded { lower, upper } => lower <= rho && rho <= upper,
            ConfidenceSet::UnboundedExclusive { excluded_lower, excluded_upper } => {
                !(excluded_lower < rho && rho < excluded_upper)
            }
            ConfidenceSet::WholeLine => true,
        }
    }

    pub fn case(&self) -> SetCase {
        match self {
            ConfidenceSet::Bounded { .. } => SetCase::Bounded,
            ConfidenceSet::UnboundedExclusive { .. } => SetCase::UnboundedExclusive,
            ConfidenceSet::WholeLine => SetCase::WholeLine,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, ConfidenceSet::Bounded { .. })
    }

    /// `(lower, upper)` of a bounded set.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            ConfidenceSet::Bounded { lower, upper } => Some((lower, upper)),
            _ => None,
        }
    }

    pub(crate) fn point(value: f64) -> Self {
        ConfidenceSet::Bounded { lower: value, upper: value }
    }
}

/// The three shapes a Fieller-type set can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetCase {
    Bounded,
    UnboundedExclusive,
    WholeLine,
}

impl SetCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            SetCase::Bounded => "bounded",
            SetCase::UnboundedExclusive => "unbounded_exclusive",
            SetCase::WholeLine => "whole_line",
        }
    }
}

impl fmt::Display for SetCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SetCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded" => Ok(SetCase::Bounded),
            "unbounded_exclusive" => Ok(SetCase::UnboundedExclusive),
            "whole_line" => Ok(SetCase::WholeLine),
            other => Err(Error::InvalidParameter(format!("unknown set case `{other}`"))),
        }
    }
}

/// Interval construction methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Fieller,
    Taylor,
    Index,
    TrimmedIndex,
    ZeroVariance,
    BootstrapPercentile,
    BootstrapBCa,
    HwangBootstrap,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Fieller,
        Method::Taylor,
        Method::Index,
        Method::TrimmedIndex,
        Method::ZeroVariance,
        Method::BootstrapPercentile,
        Method::BootstrapBCa,
        Method::HwangBootstrap,
    ];

    pub const CLOSED_FORM: [Method; 5] = [
        Method::Fieller,
        Method::Taylor,
        Method::Index,
        Method::TrimmedIndex,
        Method::ZeroVariance,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Fieller => "fieller",
            Method::Taylor => "taylor",
            Method::Index => "index",
            Method::TrimmedIndex => "trimmed-index",
            Method::ZeroVariance => "zero-variance",
            Method::BootstrapPercentile => "bootstrap-percentile",
            Method::BootstrapBCa => "bootstrap-bca",
            Method::HwangBootstrap => "hwang-bootstrap",
        }
    }

    pub fn is_bootstrap(&self) -> bool {
        matches!(self, Method::BootstrapPercentile | Method::BootstrapBCa | Method::HwangBootstrap)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

/// Quantities that decide which Fieller case applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiellerDiagnostics {
    /// `mean_x^2 / var_mean_x`; infinite when the denominator has no variance.
    #[serde(with = "inf_as_null")]
    pub denom_t_squared: f64,
    /// Threshold separating the unbounded-exclusive and whole-line cases.
    #[serde(with = "inf_as_null")]
    pub t_unbounded_squared: f64,
    pub case: SetCase,
}

/// Bookkeeping from a bootstrap-based interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDiagnostics {
    pub replications: usize,
    pub dropped: usize,
    /// Lower and upper empirical quantiles that were used.
    pub lower_quantile: f64,
    pub upper_quantile: f64,
    pub z0: Option<f64>,
    pub acceleration: Option<f64>,
    /// BCa could not be computed (constant jackknife) and percentile was used.
    pub fallback_to_percentile: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostics {
    Fieller(FiellerDiagnostics),
    Bootstrap(BootstrapDiagnostics),
}

/// Output of one interval method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "MethodRecord", try_from = "MethodRecord")]
pub struct MethodResult {
    pub method: Method,
    pub estimate: f64,
    pub set: ConfidenceSet,
    pub diagnostics: Option<Diagnostics>,
}

/// Flat wire form of [`MethodResult`].
///
/// Unused bound fields are `null`; in the unbounded-exclusive case a `null`
/// excluded bound stands for an infinite one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub method: String,
    pub estimate: f64,
    pub case: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub excluded_lower: Option<f64>,
    pub excluded_upper: Option<f64>,
    pub diagnostics: Option<Diagnostics>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl From<MethodResult> for MethodRecord {
    fn from(r: MethodResult) -> Self {
        let (lower, upper, excluded_lower, excluded_upper) = match r.set {
            ConfidenceSet::Bounded { lower, upper } => (Some(lower), Some(upper), None, None),
            ConfidenceSet::UnboundedExclusive { excluded_lower, excluded_upper } => {
                (None, None, finite(excluded_lower), finite(excluded_upper))
            }
            ConfidenceSet::WholeLine => (None, None, None, None),
        };
        MethodRecord {
            method: r.method.name().to_string(),
            estimate: r.estimate,
            case: r.set.case().as_str().to_string(),
            lower,
            upper,
            excluded_lower,
            excluded_upper,
            diagnostics: r.diagnostics,
        }
    }
}

impl TryFrom<MethodRecord> for MethodResult {
    type Error = Error;

    fn try_from(rec: MethodRecord) -> Result<Self> {
        let method: Method = rec.method.parse()?;
        let missing = |what: &str| Error::InvalidParameter(format!("bounded record without `{what}`"));
        let set = match rec.case.parse::<SetCase>()? {
            SetCase::Bounded => ConfidenceSet::Bounded {
                lower: rec.lower.ok_or_else(|| missing("lower"))?,
                upper: rec.upper.ok_or_else(|| missing("upper"))?,
            },
            SetCase::UnboundedExclusive => ConfidenceSet::UnboundedExclusive {
                excluded_lower: rec.excluded_lower.unwrap_or(f64::NEG_INFINITY),
                excluded_upper: rec.excluded_upper.unwrap_or(f64::INFINITY),
            },
            SetCase::WholeLine => ConfidenceSet::WholeLine,
        };
        Ok(MethodResult { method, estimate: rec.estimate, set, diagnostics: rec.diagnostics })
    }
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Ratio of the sample means.
pub fn point_estimate(stats: &SummaryStats) -> Result<f64> {
    if stats.mean_x == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(stats.mean_y / stats.mean_x)
}

/// Variance estimate of `mean_y - rho * mean_x`.
pub fn contrast_variance(stats: &SummaryStats, rho: f64) -> f64 {
    stats.var_mean_y - 2.0 * rho * stats.cov_mean_xy + rho * rho * stats.var_mean_x
}

/// The Fieller pivot `T0` evaluated at a candidate ratio.
pub fn t0_statistic(stats: &SummaryStats, rho: f64) -> Result<f64> {
    let v = contrast_variance(stats, rho);
    if !(v > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    Ok((stats.mean_y - rho * stats.mean_x) / v.sqrt())
}

// Coefficients of (mean_y - rho mean_x)^2 - t^2 V(rho) = A rho^2 - 2 B rho + C.
fn pivot_quadratic(stats: &SummaryStats, t2: f64) -> (f64, f64, f64) {
    let (a, b) = (stats.mean_x, stats.mean_y);
    (
        a * a - t2 * stats.var_mean_x,
        a * b - t2 * stats.cov_mean_xy,
        b * b - t2 * stats.var_mean_y,
    )
}

// Real roots of A r^2 - 2 B r + C, ascending, with tiny negative
// discriminants clamped to zero.
fn quadratic_roots(qa: f64, qb: f64, qc: f64) -> Option<(f64, f64)> {
    let disc = qb * qb - qa * qc;
    let scale = qb * qb + (qa * qc).abs();
    let disc = if disc < 0.0 {
        if disc >= -DISCRIMINANT_TOL * scale {
            0.0
        } else {
            return None;
        }
    } else {
        disc
    };
    let root = disc.sqrt();
    // avoid cancellation: q = B + sign(B) sqrt(disc)
    let q = if qb >= 0.0 { qb + root } else { qb - root };
    let (r1, r2) = if q != 0.0 { (q / qa, qc / q) } else { (qb / qa, qb / qa) };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

fn t_unbounded_squared(stats: &SummaryStats) -> f64 {
    let (a, b) = (stats.mean_x, stats.mean_y);
    let (vx, vy, c) = (stats.var_mean_x, stats.var_mean_y, stats.cov_mean_xy);
    let num = a * a * vy + b * b * vx - 2.0 * a * b * c;
    let det = vx * vy - c * c;
    if det > 0.0 {
        num / det
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Symmetric-band inversion `{rho : |T0(rho)| <= t}` with Fieller's case analysis.
fn fieller_inversion(stats: &SummaryStats, t: f64) -> Result<(ConfidenceSet, FiellerDiagnostics)> {
    let (a, b) = (stats.mean_x, stats.mean_y);
    let (vx, vy) = (stats.var_mean_x, stats.var_mean_y);
    let t2 = t * t;

    if vx == 0.0 && vy == 0.0 {
        let rho = point_estimate(stats)?;
        let diag = FiellerDiagnostics {
            denom_t_squared: f64::INFINITY,
            t_unbounded_squared: f64::INFINITY,
            case: SetCase::Bounded,
        };
        return Ok((ConfidenceSet::point(rho), diag));
    }
    if vx == 0.0 && a == 0.0 {
        // T0 is the constant b / sd_y
        let diag = FiellerDiagnostics {
            denom_t_squared: 0.0,
            t_unbounded_squared: 0.0,
            case: SetCase::WholeLine,
        };
        return if b * b <= t2 * vy { Ok((ConfidenceSet::WholeLine, diag)) } else { Err(Error::EmptyConfidenceSet) };
    }

    let denom_t_squared = if vx > 0.0 { a * a / vx } else { f64::INFINITY };
    let t_unb2 = t_unbounded_squared(stats);
    let (qa, qb, qc) = pivot_quadratic(stats, t2);

    let set = if denom_t_squared > t2 {
        let (lower, upper) = quadratic_roots(qa, qb, qc)
            .ok_or_else(|| Error::NonFiniteResult("negative discriminant in the bounded case".into()))?;
        ConfidenceSet::Bounded { lower, upper }
    } else if t_unb2 > t2 {
        if qa == 0.0 {
            // boundary case: the set is a half-line
            if qb == 0.0 {
                ConfidenceSet::WholeLine
            } else {
                let root = qc / (2.0 * qb);
                if qb > 0.0 {
                    ConfidenceSet::UnboundedExclusive { excluded_lower: f64::NEG_INFINITY, excluded_upper: root }
                } else {
                    ConfidenceSet::UnboundedExclusive { excluded_lower: root, excluded_upper: f64::INFINITY }
                }
            }
        } else {
            let (lo, hi) = quadratic_roots(qa, qb, qc).unwrap_or((qb / qa, qb / qa));
            ConfidenceSet::UnboundedExclusive { excluded_lower: lo, excluded_upper: hi }
        }
    } else {
        ConfidenceSet::WholeLine
    };
    let diag = FiellerDiagnostics { denom_t_squared, t_unbounded_squared: t_unb2, case: set.case() };
    Ok((set, diag))
}

/// Solutions of `T0(rho) = t`.
fn level_crossings(stats: &SummaryStats, t: f64, out: &mut Vec<f64>) {
    let (a, b) = (stats.mean_x, stats.mean_y);
    if t == 0.0 {
        if a != 0.0 {
            out.push(b / a);
        }
        return;
    }
    let (qa, qb, qc) = pivot_quadratic(stats, t * t);
    let candidates: Vec<f64> = if qa == 0.0 {
        if qb != 0.0 {
            vec![qc / (2.0 * qb)]
        } else {
            vec![]
        }
    } else {
        match quadratic_roots(qa, qb, qc) {
            Some((r1, r2)) => vec![r1, r2],
            None => vec![],
        }
    };
    for r in candidates {
        if r.is_finite() && (b - r * a).signum() == t.signum() {
            out.push(r);
        }
    }
}

/// `{rho : t_lo <= T0(rho) <= t_hi}` expressed as a [`ConfidenceSet`].
///
/// A symmetric band goes through the classical Fieller case analysis. For an
/// asymmetric band the crossing points of both levels are located
/// analytically and every segment between them is classified. `T0` has at
/// most one stationary point (the numerator of its derivative is linear in
/// `rho`), so there are at most four crossings. Shapes that are not
/// representable (two disjoint pieces) are replaced by their smallest
/// representable superset.
pub fn invert_t0_band(stats: &SummaryStats, t_lo: f64, t_hi: f64) -> Result<ConfidenceSet> {
    if !(t_lo <= t_hi) || !t_lo.is_finite() || !t_hi.is_finite() {
        return Err(Error::DomainError(format!("invalid band [{t_lo}, {t_hi}]")));
    }
    if t_lo == -t_hi {
        return fieller_inversion(stats, t_hi).map(|(set, _)| set);
    }
    set_from_pieces(&t0_band_pieces(stats, t_lo, t_hi)?)
}

/// Maximal closed intervals making up `{rho : t_lo <= T0(rho) <= t_hi}`.
pub(crate) fn t0_band_pieces(stats: &SummaryStats, t_lo: f64, t_hi: f64) -> Result<Vec<(f64, f64)>> {
    let (a, b) = (stats.mean_x, stats.mean_y);
    let (vx, vy, c) = (stats.var_mean_x, stats.var_mean_y, stats.cov_mean_xy);
    if vx == 0.0 && vy == 0.0 {
        let rho = point_estimate(stats)?;
        return if t_lo <= 0.0 && 0.0 <= t_hi { Ok(vec![(rho, rho)]) } else { Err(Error::EmptyConfidenceSet) };
    }

    let mut breaks = Vec::with_capacity(5);
    level_crossings(stats, t_lo, &mut breaks);
    level_crossings(stats, t_hi, &mut breaks);
    if vx > 0.0 && vx * vy - c * c <= 0.0 {
        // the contrast variance vanishes at one point
        breaks.push(c / vx);
    }
    breaks.sort_by(|p, q| p.total_cmp(q));
    breaks.dedup();

    let inside = |rho: f64| match t0_statistic(stats, rho) {
        Ok(t0) => t_lo <= t0 && t0 <= t_hi,
        Err(_) => false,
    };
    // limits of T0 at -inf and +inf
    let (lim_left, lim_right) = if vx > 0.0 {
        (a / vx.sqrt(), -a / vx.sqrt())
    } else {
        (a.signum() * f64::INFINITY, -a.signum() * f64::INFINITY)
    };
    let in_band = |v: f64| t_lo <= v && v <= t_hi;

    if breaks.is_empty() {
        let probe = if a != 0.0 { b / a } else { 0.0 };
        return if inside(probe) { Ok(vec![(f64::NEG_INFINITY, f64::INFINITY)]) } else { Err(Error::EmptyConfidenceSet) };
    }

    // Included pieces as (lo, hi), possibly infinite.
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    let push = |lo: f64, hi: f64, pieces: &mut Vec<(f64, f64)>| match pieces.last_mut() {
        Some(last) if last.1 >= lo => last.1 = last.1.max(hi),
        _ => pieces.push((lo, hi)),
    };
    if in_band(lim_left) {
        push(f64::NEG_INFINITY, breaks[0], &mut pieces);
    }
    for w in breaks.windows(2) {
        if inside(0.5 * (w[0] + w[1])) {
            push(w[0], w[1], &mut pieces);
        }
    }
    if in_band(lim_right) {
        push(breaks[breaks.len() - 1], f64::INFINITY, &mut pieces);
    }
    // isolated crossing points (e.g. tangency) count as included
    if pieces.is_empty() {
        if let Some(&p) = breaks.iter().find(|&&p| inside(p)) {
            return Ok(vec![(p, p)]);
        }
        return Err(Error::EmptyConfidenceSet);
    }
    Ok(pieces)
}

fn set_from_pieces(pieces: &[(f64, f64)]) -> Result<ConfidenceSet> {
    if pieces.is_empty() {
        return Err(Error::EmptyConfidenceSet);
    }
    let first = pieces[0];
    let last = pieces[pieces.len() - 1];
    let set = match (first.0.is_infinite(), last.1.is_infinite()) {
        (true, true) if pieces.len() == 1 => ConfidenceSet::WholeLine,
        (true, true) => {
            // keep the widest gap as the excluded interval
            let (lo, hi) = pieces
                .windows(2)
                .map(|w| (w[0].1, w[1].0))
                .max_by(|g, h| (g.1 - g.0).total_cmp(&(h.1 - h.0)))
                .expect("at least two pieces");
            ConfidenceSet::UnboundedExclusive { excluded_lower: lo, excluded_upper: hi }
        }
        (true, false) => ConfidenceSet::UnboundedExclusive { excluded_lower: last.1, excluded_upper: f64::INFINITY },
        (false, true) => {
            ConfidenceSet::UnboundedExclusive { excluded_lower: f64::NEG_INFINITY, excluded_upper: first.0 }
        }
        (false, false) => ConfidenceSet::Bounded { lower: first.0, upper: last.1 },
    };
    Ok(set)
}

/// Fieller confidence set.
pub fn fieller_set(stats: &SummaryStats, spec: &ConfidenceSpec) -> Result<MethodResult> {
    if stats.var_mean_x == 0.0 && stats.var_mean_y == 0.0 && stats.mean_x == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let (set, diag) = fieller_inversion(stats, spec.quantile)?;
    let estimate = if stats.mean_x != 0.0 { stats.mean_y / stats.mean_x } else { f64::NAN };
    Ok(MethodResult { method: Method::Fieller, estimate, set, diagnostics: Some(Diagnostics::Fieller(diag)) })
}

/// Taylor (delta-method) interval, symmetric about the ratio of means.
pub fn taylor_limits(stats: &SummaryStats, spec: &ConfidenceSpec) -> Result<MethodResult> {
    let (a, b) = (stats.mean_x, stats.mean_y);
    if a == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    if b == 0.0 {
        return Err(Error::ZeroNumerator);
    }
    let rho = b / a;
    let rel = stats.var_mean_x / (a * a) + stats.var_mean_y / (b * b) - 2.0 * stats.cov_mean_xy / (a * b);
    let half = spec.quantile * rho.abs() * rel.max(0.0).sqrt();
    Ok(MethodResult {
        method: Method::Taylor,
        estimate: rho,
        set: ConfidenceSet::Bounded { lower: rho - half, upper: rho + half },
        diagnostics: None,
    })
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Index method: t interval on the individual ratios `y_i / x_i`.
pub fn index_limits(sample: &PairedSample, spec: &ConfidenceSpec) -> Result<MethodResult> {
    let ratios = sample.ratios()?;
    let (mean, sd) = mean_and_sd(&ratios);
    let half = spec.quantile * sd / (ratios.len() as f64).sqrt();
    Ok(MethodResult {
        method: Method::Index,
        estimate: mean,
        set: ConfidenceSet::Bounded { lower: mean - half, upper: mean + half },
        diagnostics: None,
    })
}

/// Trimmed mean and winsorized standard deviation of `values` (sorted in place).
///
/// Returns `(trimmed_mean, winsorized_sd, g)` with `g = floor(trim * n)`.
pub fn trimmed_stats(values: &mut [f64], trim: f64) -> Result<(f64, f64, usize)> {
    if !(0.0..0.5).contains(&trim) {
        return Err(Error::InvalidParameter(format!("trim {trim} not in [0, 0.5)")));
    }
    let n = values.len();
    let g = (trim * n as f64).floor() as usize;
    let remaining = n.saturating_sub(2 * g);
    if remaining < 2 {
        return Err(Error::TooFewAfterTrim { remaining });
    }
    values.sort_by(|p, q| p.total_cmp(q));
    let core = &values[g..n - g];
    let trimmed_mean = core.iter().sum::<f64>() / remaining as f64;
    let (lo, hi) = (values[g], values[n - g - 1]);
    let wins_mean = values.iter().map(|v| v.clamp(lo, hi)).sum::<f64>() / n as f64;
    let ss = values.iter().map(|v| (v.clamp(lo, hi) - wins_mean).powi(2)).sum::<f64>();
    Ok((trimmed_mean, (ss / (n as f64 - 1.0)).sqrt(), g))
}

/// Tukey-McLaughlin trimmed-mean interval on the individual ratios.
pub fn trimmed_index_limits(sample: &PairedSample, spec: &ConfidenceSpec, trim: f64) -> Result<MethodResult> {
    let mut ratios = sample.ratios()?;
    let n = ratios.len();
    let (mean, sw, g) = trimmed_stats(&mut ratios, trim)?;
    let nf = n as f64;
    let se = sw / ((1.0 - 2.0 * g as f64 / nf) * nf.sqrt());
    let df = (n - 2 * g - 1) as f64;
    let q = t_quantile(1.0 - spec.alpha() / 2.0, df)?;
    Ok(MethodResult {
        method: Method::TrimmedIndex,
        estimate: mean,
        set: ConfidenceSet::Bounded { lower: mean - q * se, upper: mean + q * se },
        diagnostics: None,
    })
}

pub(crate) fn zero_variance_from_stats(stats: &SummaryStats, spec: &ConfidenceSpec) -> Result<MethodResult> {
    let rho = point_estimate(stats)?;
    let half = spec.quantile * stats.sd_mean_y() / stats.mean_x.abs();
    Ok(MethodResult {
        method: Method::ZeroVariance,
        estimate: rho,
        set: ConfidenceSet::Bounded { lower: rho - half, upper: rho + half },
        diagnostics: None,
    })
}

/// Zero-variance method: the numerator's standard error divided by `|mean_x|`.
pub fn zero_variance_limits(sample: &PairedSample, spec: &ConfidenceSpec) -> Result<MethodResult> {
    zero_variance_from_stats(&summarize(sample), spec)
}
