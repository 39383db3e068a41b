//! The confidence ellipse of `(mean_x, mean_y)` and the wedge of lines
//! through the origin tangent to it.
//!
//! The slopes of the two tangents are the Fieller limits. When the ellipse
//! reaches the y-axis the wedge opens up and the Fieller set is unbounded;
//! when it contains the origin there are no tangents at all.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{ConfidenceSpec, SummaryStats};

/// Relative determinant below which the covariance is treated as singular.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseConstruction {
    pub center: (f64, f64),
    /// `t * sd(mean_x)`: half-width of the ellipse's projection on the x-axis.
    pub half_axis_x: f64,
    pub half_axis_y: f64,
    pub covariance_of_means: f64,
    pub quantile: f64,
    /// Slopes of the finite tangents through the origin, ascending.
    pub tangent_slopes: Vec<f64>,
    pub touches_y_axis: bool,
    pub origin_inside: bool,
    /// Covariance was singular and the ellipse collapsed to a segment.
    pub degenerate: bool,
}

impl EllipseConstruction {
    // Cholesky factor of t^2 * Sigma, as (l11, l21, l22).
    fn scaled_cholesky(&self) -> (f64, f64, f64) {
        let t = self.quantile;
        let l11 = self.half_axis_x / t;
        let l21 = if l11 > 0.0 { self.covariance_of_means / l11 } else { 0.0 };
        let vy = (self.half_axis_y / t).powi(2);
        let l22 = (vy - l21 * l21).max(0.0).sqrt();
        (t * l11, t * l21, t * l22)
    }

    /// Value of `(p - c)' Sigma^-1 (p - c) / t^2`; 1 on the boundary.
    pub fn normalized_form(&self, p: (f64, f64)) -> f64 {
        let (l11, l21, l22) = self.scaled_cholesky();
        let dx = p.0 - self.center.0;
        let dy = p.1 - self.center.1;
        let u = dx / l11;
        let v = (dy - l21 * u) / l22;
        u * u + v * v
    }
}

/// Builds the ellipse `(p - c)' Sigma^-1 (p - c) = t^2` and its origin tangents.
pub fn construct_wedge(stats: &SummaryStats, spec: &ConfidenceSpec) -> Result<EllipseConstruction> {
    let (vx, vy, c) = (stats.var_mean_x, stats.var_mean_y, stats.cov_mean_xy);
    if vx <= 0.0 && vy <= 0.0 {
        return Err(Error::SingularCovariance);
    }
    let t = spec.quantile;
    let (a, b) = (stats.mean_x, stats.mean_y);
    let half_axis_x = t * vx.sqrt();
    let touches_y_axis = a.abs() <= half_axis_x;
    let det = vx * vy - c * c;
    let degenerate = det <= SINGULAR_TOL * vx * vy;

    let (slopes, origin_inside) = if degenerate {
        segment_tangents(stats, t)
    } else {
        whitened_tangents(stats, t)
    };
    Ok(EllipseConstruction {
        center: (a, b),
        half_axis_x,
        half_axis_y: t * vy.sqrt(),
        covariance_of_means: c,
        quantile: t,
        tangent_slopes: slopes,
        touches_y_axis,
        origin_inside,
        degenerate,
    })
}

// Map the ellipse to a circle of radius t, find the tangent points from the
// image of the origin, and map them back.
fn whitened_tangents(stats: &SummaryStats, t: f64) -> (Vec<f64>, bool) {
    let (vx, vy, c) = (stats.var_mean_x, stats.var_mean_y, stats.cov_mean_xy);
    let l11 = vx.sqrt();
    let l21 = c / l11;
    let l22 = (vy - l21 * l21).sqrt();
    let (cx, cy) = (stats.mean_x, stats.mean_y);
    // image of the origin: q = L^-1 (0 - c)
    let q1 = -cx / l11;
    let q2 = (-cy - l21 * q1) / l22;
    let q_sq = q1 * q1 + q2 * q2;
    let t_sq = t * t;
    if q_sq <= t_sq {
        return (Vec::new(), true);
    }
    let along = t_sq / q_sq;
    let across = t * (q_sq - t_sq).sqrt() / q_sq;
    let mut slopes: Vec<f64> = [1.0, -1.0]
        .iter()
        .filter_map(|&sign| {
            let u1 = along * q1 - sign * across * q2;
            let u2 = along * q2 + sign * across * q1;
            let px = cx + l11 * u1;
            let py = cy + l21 * u1 + l22 * u2;
            let slope = py / px;
            slope.is_finite().then_some(slope)
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    (slopes, false)
}

// Singular covariance: the ellipse is the segment c + s (l11, l21), |s| <= t.
fn segment_tangents(stats: &SummaryStats, t: f64) -> (Vec<f64>, bool) {
    let (vx, vy) = (stats.var_mean_x, stats.var_mean_y);
    let (dx, dy) = if vx > 0.0 {
        let l11 = vx.sqrt();
        (l11, stats.cov_mean_xy / l11)
    } else {
        (0.0, vy.sqrt())
    };
    let (cx, cy) = (stats.mean_x, stats.mean_y);
    // origin on the segment's line and within its extent
    let cross = cx * dy - cy * dx;
    let len_sq = dx * dx + dy * dy;
    if cross.abs() <= 1e-14 * (cx.abs() + cy.abs()) * len_sq.sqrt() {
        let s = -(cx * dx + cy * dy) / len_sq;
        if s.abs() <= t {
            return (Vec::new(), true);
        }
    }
    let mut slopes: Vec<f64> = [-t, t]
        .iter()
        .filter_map(|&s| {
            let slope = (cy + s * dy) / (cx + s * dx);
            slope.is_finite().then_some(slope)
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    (slopes, false)
}

/// `k` points on the ellipse boundary, counterclockwise, starting at the
/// point `center + t L (1, 0)`.
pub fn ellipse_boundary_points(e: &EllipseConstruction, k: usize) -> Result<Vec<(f64, f64)>> {
    if k < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 boundary points, got {k}")));
    }
    let (l11, l21, l22) = e.scaled_cholesky();
    Ok((0..k)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / k as f64;
            let (s, c) = theta.sin_cos();
            (e.center.0 + l11 * c, e.center.1 + l21 * c + l22 * s)
        })
        .collect())
}

/// A labelled point of the construction plot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlotPoint {
    pub element: &'static str,
    pub x: f64,
    pub y: f64,
}

/// Plot data: the ellipse outline, the tangent lines (origin to past the
/// ellipse), the vertical reading line at `X = 1`, and the marginal
/// intervals on both axes.
pub fn plot_elements(e: &EllipseConstruction, k: usize) -> Result<Vec<PlotPoint>> {
    let mut out = Vec::new();
    let boundary = ellipse_boundary_points(e, k)?;
    for &(x, y) in boundary.iter().chain(boundary.first()) {
        out.push(PlotPoint { element: "ellipse", x, y });
    }
    let x_far = (e.center.0.abs() + e.half_axis_x).max(1.0) * 1.25 * if e.center.0 < 0.0 { -1.0 } else { 1.0 };
    for (i, &m) in e.tangent_slopes.iter().enumerate() {
        let element = if i == 0 { "tangent_lower" } else { "tangent_upper" };
        out.push(PlotPoint { element, x: 0.0, y: 0.0 });
        out.push(PlotPoint { element, x: x_far, y: m * x_far });
    }
    let (y_lo, y_hi) = plot_y_range(e);
    out.push(PlotPoint { element: "x_equals_1", x: 1.0, y: y_lo });
    out.push(PlotPoint { element: "x_equals_1", x: 1.0, y: y_hi });
    out.push(PlotPoint { element: "interval_x", x: e.center.0 - e.half_axis_x, y: 0.0 });
    out.push(PlotPoint { element: "interval_x", x: e.center.0 + e.half_axis_x, y: 0.0 });
    out.push(PlotPoint { element: "interval_y", x: 0.0, y: e.center.1 - e.half_axis_y });
    out.push(PlotPoint { element: "interval_y", x: 0.0, y: e.center.1 + e.half_axis_y });
    Ok(out)
}

fn plot_y_range(e: &EllipseConstruction) -> (f64, f64) {
    let lo = (e.center.1 - e.half_axis_y).min(0.0);
    let hi = (e.center.1 + e.half_axis_y).max(0.0);
    let pad = 0.1 * (hi - lo).max(1e-9);
    (lo - pad, hi + pad)
}

/// A minimal standalone SVG of the construction.
pub fn to_svg(e: &EllipseConstruction, k: usize) -> Result<String> {
    let points = plot_elements(e, k)?;
    let x_lo = points.iter().map(|p| p.x).fold(0.0, f64::min);
    let x_hi = points.iter().map(|p| p.x).fold(1.0, f64::max);
    let (y_lo, y_hi) = plot_y_range(e);
    let (w, h) = (600.0, 450.0);
    let sx = |x: f64| 20.0 + (x - x_lo) / (x_hi - x_lo) * (w - 40.0);
    let sy = |y: f64| h - 20.0 - (y - y_lo) / (y_hi - y_lo) * (h - 40.0);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let (ox, oy) = (sx(0.0), sy(0.0));
    let _ = writeln!(svg, r##"<line x1="{:.3}" y1="{oy:.3}" x2="{:.3}" y2="{oy:.3}" stroke="#888888"/>"##, sx(x_lo), sx(x_hi));
    let _ = writeln!(svg, r##"<line x1="{ox:.3}" y1="{:.3}" x2="{ox:.3}" y2="{:.3}" stroke="#888888"/>"##, sy(y_lo), sy(y_hi));

    let mut path = String::new();
    for (i, p) in points.iter().filter(|p| p.element == "ellipse").enumerate() {
        let _ = write!(path, "{}{:.3},{:.3} ", if i == 0 { "M" } else { "L" }, sx(p.x), sy(p.y));
    }
    let _ = writeln!(svg, r##"<path d="{}Z" fill="#cfe2f3" stroke="#1f4e79"/>"##, path);

    let segment = |svg: &mut String, name: &str, colour: &str| {
        let seg: Vec<_> = points.iter().filter(|p| p.element == name).collect();
        if let [a, b] = seg[..] {
            let _ = writeln!(
                svg,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{colour}" stroke-width="2"/>"#,
                sx(a.x),
                sy(a.y),
                sx(b.x),
                sy(b.y)
            );
        }
    };
    segment(&mut svg, "tangent_lower", "#c00000");
    segment(&mut svg, "tangent_upper", "#c00000");
    segment(&mut svg, "x_equals_1", "#555555");
    segment(&mut svg, "interval_x", "#2e7d32");
    segment(&mut svg, "interval_y", "#2e7d32");
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{fieller_set, ConfidenceSet};
    use crate::rng;
    use crate::stats::summarize;
    use crate::PairedSample;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn spec(stats: &SummaryStats) -> ConfidenceSpec {
        ConfidenceSpec::for_stats(0.95, stats).unwrap()
    }

    #[test]
    fn pang_p1_almost_touches() {
        let s = summarize(&PairedSample::new(vec![6.34, 4.02, 2.88], vec![4.87, 8.30, 11.66]).unwrap());
        let sp = spec(&s);
        let e = construct_wedge(&s, &sp).unwrap();
        assert!(!e.touches_y_axis);
        let gap = e.center.0 - e.half_axis_x;
        assert!(gap > 0.0 && gap < 0.05 * e.center.0, "gap {gap}");
        let (lo, hi) = fieller_set(&s, &sp).unwrap().set.bounds().unwrap();
        assert_eq!(e.tangent_slopes.len(), 2);
        assert_relative_eq!(e.tangent_slopes[0], lo, max_relative = 1e-9);
        assert_relative_eq!(e.tangent_slopes[1], hi, max_relative = 1e-9);
    }

    #[test]
    fn circle_tangents() {
        // t = 1 with unit variances: circle of radius 1 around (2, 0)
        let s = SummaryStats::from_moments(50, 2.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        let sp = ConfidenceSpec { level: 0.6827, df: 49.0, quantile: 1.0 };
        let e = construct_wedge(&s, &sp).unwrap();
        let m = 1.0 / 3f64.sqrt();
        assert_relative_eq!(e.tangent_slopes[0], -m, max_relative = 1e-12);
        assert_relative_eq!(e.tangent_slopes[1], m, max_relative = 1e-12);
        let pts = ellipse_boundary_points(&e, 4).unwrap();
        let expect = [(3.0, 0.0), (2.0, 1.0), (1.0, 0.0), (2.0, -1.0)];
        for (p, q) in pts.iter().zip(expect) {
            assert!((p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_covariance_far_from_axes() {
        let s = SummaryStats::from_moments(30, 10.0, 7.0, 0.4, 0.9, 0.0).unwrap();
        let sp = spec(&s);
        let e = construct_wedge(&s, &sp).unwrap();
        let (lo, hi) = fieller_set(&s, &sp).unwrap().set.bounds().unwrap();
        assert_relative_eq!(e.tangent_slopes[0], lo, max_relative = 1e-9);
        assert_relative_eq!(e.tangent_slopes[1], hi, max_relative = 1e-9);
    }

    #[test]
    fn random_instances_agree_with_fieller() {
        let mut rng = rng::stream(3, 3);
        let (mut bounded, mut unbounded) = (0, 0);
        while bounded < 1000 || unbounded < 200 {
            let vx: f64 = rng.random_range(0.01..2.0);
            let vy: f64 = rng.random_range(0.01..2.0);
            let r: f64 = rng.random_range(-0.9..0.9);
            let s = SummaryStats::from_moments(
                rng.random_range(3..40),
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
                vx,
                vy,
                r * (vx * vy).sqrt(),
            )
            .unwrap();
            let sp = spec(&s);
            let e = construct_wedge(&s, &sp).unwrap();
            match fieller_set(&s, &sp).unwrap().set {
                ConfidenceSet::Bounded { lower, upper } => {
                    assert!(!e.touches_y_axis);
                    assert_relative_eq!(e.tangent_slopes[0], lower, max_relative = 1e-9);
                    assert_relative_eq!(e.tangent_slopes[1], upper, max_relative = 1e-9);
                    bounded += 1;
                }
                ConfidenceSet::UnboundedExclusive { excluded_lower, excluded_upper } => {
                    assert!(e.touches_y_axis && !e.origin_inside);
                    assert_relative_eq!(e.tangent_slopes[0], excluded_lower, max_relative = 1e-9);
                    assert_relative_eq!(e.tangent_slopes[1], excluded_upper, max_relative = 1e-9);
                    unbounded += 1;
                }
                ConfidenceSet::WholeLine => {
                    assert!(e.touches_y_axis && e.origin_inside && e.tangent_slopes.is_empty());
                    unbounded += 1;
                }
            }
        }
    }

    #[test]
    fn boundary_points_lie_on_the_ellipse() {
        let s = SummaryStats::from_moments(12, 1.5, -0.7, 0.3, 0.8, 0.35).unwrap();
        let e = construct_wedge(&s, &spec(&s)).unwrap();
        let pts = ellipse_boundary_points(&e, 400).unwrap();
        for &p in &pts {
            assert!((e.normalized_form(p) - 1.0).abs() < 1e-10);
        }
        let xmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let xmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(xmin, e.center.0 - e.half_axis_x, epsilon = 1e-12);
        assert_relative_eq!(xmax, e.center.0 + e.half_axis_x, epsilon = 1e-12);
        let ymin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        assert!((ymin - (e.center.1 - e.half_axis_y)).abs() < e.half_axis_y * 1e-3);
        // counterclockwise: positive signed area
        let area: f64 = (0..pts.len())
            .map(|i| {
                let (p, q) = (pts[i], pts[(i + 1) % pts.len()]);
                p.0 * q.1 - q.0 * p.1
            })
            .sum();
        assert!(area > 0.0);
        assert!(ellipse_boundary_points(&e, 3).is_err());
    }

    #[test]
    fn singular_covariance_falls_back_to_segment() {
        let s = SummaryStats::from_moments(10, 2.0, 3.0, 0.0, 0.25, 0.0).unwrap();
        let sp = spec(&s);
        let e = construct_wedge(&s, &sp).unwrap();
        assert!(e.degenerate);
        let (lo, hi) = fieller_set(&s, &sp).unwrap().set.bounds().unwrap();
        assert_relative_eq!(e.tangent_slopes[0], lo, max_relative = 1e-12);
        assert_relative_eq!(e.tangent_slopes[1], hi, max_relative = 1e-12);
        let flat = SummaryStats::from_moments(10, 2.0, 3.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(construct_wedge(&flat, &sp), Err(Error::SingularCovariance));
    }

    #[test]
    fn svg_and_plot_data() {
        let s = SummaryStats::from_moments(12, 1.5, 2.0, 0.1, 0.2, 0.0).unwrap();
        let e = construct_wedge(&s, &spec(&s)).unwrap();
        let pts = plot_elements(&e, 16).unwrap();
        assert_eq!(pts.iter().filter(|p| p.element == "ellipse").count(), 17);
        assert_eq!(pts.iter().filter(|p| p.element.starts_with("tangent")).count(), 4);
        let svg = to_svg(&e, 64).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<line").count(), 7);
    }
}
