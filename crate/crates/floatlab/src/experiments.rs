//! Convergence harness: the δ → 0 limit of ∫(f − f_δ)/δ^{2/(n+2)} against
//! c_{n+1}·as(f), the matching weighted-difference ratio, pointwise rates,
//! the uniform ratio bound, and the finiteness suite.

use serde::{Deserialize, Serialize};

use crate::convexfn::{self, ConvexFunction};
use crate::epigraph;
use crate::error::{Error, Result};
use crate::floating::{self, FloatParams};
use crate::geom::{self, Point};
use crate::report::{CheckReport, ConvergenceReport, ConvergenceRow};
use crate::surface;

/// c_{n+1} = ½ ((n+2) / vol_n(B₂ⁿ))^{2/(n+2)}.
pub fn constant_c(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * ((nf + 2.0) / geom::unit_ball_volume(n)).powf(2.0 / (nf + 2.0))
}

/// Geometric δ-ladder from `delta_max` down to `delta_min`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DeltaLadder {
    pub delta_max: f64,
    pub delta_min: f64,
    pub count: usize,
}

impl DeltaLadder {
    pub fn new(delta_max: f64, delta_min: f64, count: usize) -> Result<Self> {
        if !(0.0 < delta_min && delta_min < delta_max) || count < 3 {
            return Err(Error::Precondition(format!(
                "ladder needs 0 < delta_min < delta_max and count >= 3, got [{delta_min}, {delta_max}] x{count}"
            )));
        }
        Ok(DeltaLadder { delta_max, delta_min, count })
    }

    pub fn default_for(dim: usize) -> Self {
        match dim {
            1 => DeltaLadder { delta_max: 1e-2, delta_min: 1e-5, count: 8 },
            _ => DeltaLadder { delta_max: 1e-2, delta_min: 1e-4, count: 6 },
        }
    }

    /// Values in descending order.
    pub fn values(&self) -> Vec<f64> {
        let ratio = (self.delta_min / self.delta_max).powf(1.0 / (self.count - 1) as f64);
        (0..self.count).map(|i| self.delta_max * ratio.powi(i as i32)).collect()
    }
}

/// Evaluation grid for the convergence integrals.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum GridSpec {
    Line { lo: f64, hi: f64, count: usize },
    Square { lo: f64, hi: f64, count: usize },
}

impl GridSpec {
    pub fn default_for(dim: usize) -> Self {
        match dim {
            1 => GridSpec::Line { lo: -6.0, hi: 6.0, count: 101 },
            _ => GridSpec::Square { lo: -4.5, hi: 4.5, count: 41 },
        }
    }

    pub fn points(&self) -> Vec<Point> {
        match *self {
            GridSpec::Line { lo, hi, count } => floating::grid_1d(lo, hi, count),
            GridSpec::Square { lo, hi, count } => {
                floating::grid_2d([lo, lo], [hi, hi], [count, count])
            }
        }
    }
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];
const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Monotone (Fritsch–Carlson) cubic Hermite slopes for nodes `ys` on the
/// uniform step `h`.
fn pchip_slopes(ys: &[f64], h: f64) -> Vec<f64> {
    let n = ys.len();
    let secants: Vec<f64> = ys.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut m = vec![0.0; n];
    m[0] = secants[0];
    m[n - 1] = secants[n - 2];
    for i in 1..n - 1 {
        let (s0, s1) = (secants[i - 1], secants[i]);
        if s0 * s1 <= 0.0 {
            m[i] = 0.0;
        } else {
            m[i] = 2.0 * s0 * s1 / (s0 + s1);
        }
    }
    m
}

fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1
}

/// Per-δ grid sweep: returns clamped differences d = ψ_δ − ψ at the grid
/// nodes (flattened in grid order) plus the number of failed nodes, whose
/// values are filled from the nearest earlier success.
fn sweep(psi: &ConvexFunction, grid: &[Point], delta: f64) -> Result<(Vec<f64>, usize)> {
    let params = FloatParams::for_function(psi, delta)?;
    let rows = floating::floating_grid(psi, grid, &params);
    let mut d = Vec::with_capacity(rows.len());
    let mut failed = 0;
    for row in &rows {
        match row {
            Ok(ev) => d.push((ev.psi_delta - ev.psi).max(0.0)),
            Err(_) => {
                failed += 1;
                d.push(d.last().copied().unwrap_or(0.0));
            }
        }
    }
    Ok((d, failed))
}

/// ∫ e^{−ψ} w(d) with d interpolated from its grid values: piecewise-cubic
/// in 1D, bilinear in 2D; ψ itself is evaluated exactly at quadrature nodes.
fn integrate_difference(
    psi: &ConvexFunction,
    grid_spec: &GridSpec,
    d: &[f64],
    weight: impl Fn(f64) -> f64,
) -> f64 {
    match *grid_spec {
        GridSpec::Line { lo, hi, count } => {
            let h = (hi - lo) / (count - 1) as f64;
            let slopes = pchip_slopes(d, h);
            let mut total = 0.0;
            for i in 0..count - 1 {
                let x0 = lo + h * i as f64;
                for (t, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
                    let s = 0.5 * (t + 1.0);
                    let x = x0 + h * s;
                    let dv = hermite(d[i], d[i + 1], slopes[i], slopes[i + 1], h, s).max(0.0);
                    total += 0.5 * h * w * (-psi.value(&[x, 0.0])).exp() * weight(dv);
                }
            }
            total
        }
        GridSpec::Square { lo, hi, count } => {
            let h = (hi - lo) / (count - 1) as f64;
            let at = |i: usize, j: usize| d[i * count + j];
            let mut total = 0.0;
            for i in 0..count - 1 {
                for j in 0..count - 1 {
                    let x0 = lo + h * i as f64;
                    let y0 = lo + h * j as f64;
                    for (ti, wi) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                        let sx = 0.5 * (ti + 1.0);
                        for (tj, wj) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                            let sy = 0.5 * (tj + 1.0);
                            let dv = (1.0 - sx) * (1.0 - sy) * at(i, j)
                                + sx * (1.0 - sy) * at(i + 1, j)
                                + (1.0 - sx) * sy * at(i, j + 1)
                                + sx * sy * at(i + 1, j + 1);
                            let p = [x0 + h * sx, y0 + h * sy];
                            total += 0.25 * h * h * wi * wj * (-psi.value(&p)).exp() * weight(dv.max(0.0));
                        }
                    }
                }
            }
            total
        }
    }
}

fn least_squares_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    // (slope, intercept)
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn convergence_run(
    psi: &ConvexFunction,
    ladder: &DeltaLadder,
    grid_spec: &GridSpec,
    weight: impl Fn(f64) -> f64 + Copy,
    label: &str,
) -> Result<ConvergenceReport> {
    let n = psi.dim() as f64;
    let exponent = 2.0 / (n + 2.0);
    let grid = grid_spec.points();
    let mut rows = Vec::new();
    let mut notes = vec![format!("mode: {label}")];
    for delta in ladder.values() {
        let (d, failed) = sweep(psi, &grid, delta)?;
        if failed > 0 {
            notes.push(format!("delta {delta:.3e}: {failed} grid nodes excluded"));
        }
        let diff = integrate_difference(psi, grid_spec, &d, weight);
        rows.push(ConvergenceRow { delta, difference: diff, ratio: diff / delta.powf(exponent) });
    }

    let ln_d: Vec<f64> = rows.iter().map(|r| r.delta.ln()).collect();
    let ln_diff: Vec<f64> = rows.iter().map(|r| r.difference.max(1e-300).ln()).collect();
    let (log_log_slope, _) = least_squares_fit(&ln_d, &ln_diff);

    let tail: Vec<&ConvergenceRow> = rows.iter().rev().take(4).collect();
    let xs: Vec<f64> = tail.iter().map(|r| r.delta.powf(exponent)).collect();
    let ys: Vec<f64> = tail.iter().map(|r| r.ratio).collect();
    let (_, extrapolated_limit) = least_squares_fit(&xs, &ys);

    let target = constant_c(psi.dim())
        * surface::asa_checked(psi, &convexfn::auto_quadrature_spec(psi, 1e-9, 1e-9))?.value;
    Ok(ConvergenceReport {
        rows,
        log_log_slope,
        extrapolated_limit,
        target,
        relative_deviation: (extrapolated_limit - target).abs() / target.abs().max(1e-300),
        notes,
    })
}

/// Limit ∫ (f − f_δ) / δ^{2/(n+2)} → c_{n+1}·as(f): integrand
/// e^{−ψ}(1 − e^{−d}) with d = ψ_δ − ψ.
pub fn theorem_ratio(
    psi: &ConvexFunction,
    ladder: &DeltaLadder,
    grid_spec: &GridSpec,
) -> Result<ConvergenceReport> {
    convergence_run(psi, ladder, grid_spec, |d| 1.0 - (-d).exp(), "theorem")
}

/// Limit ∫ |ψ_δ − ψ| e^{−ψ} / δ^{2/(n+2)} → c_{n+1}·as(f): integrand
/// e^{−ψ}·d.
pub fn proposition_ratio(
    psi: &ConvexFunction,
    ladder: &DeltaLadder,
    grid_spec: &GridSpec,
) -> Result<ConvergenceReport> {
    convergence_run(psi, ladder, grid_spec, |d| d, "proposition")
}

/// Per-δ pointwise ratio (ψ_δ(x) − ψ(x)) / δ^{2/(n+2)} and its limit value
/// c_{n+1} (det ∇²ψ(x))^{1/(n+2)} where the Hessian is positive definite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointwiseReport {
    pub point: Point,
    pub rows: Vec<(f64, f64)>,
    pub limit_target: f64,
}

pub fn pointwise_rate(psi: &ConvexFunction, x: &Point, ladder: &DeltaLadder) -> Result<PointwiseReport> {
    let n = psi.dim() as f64;
    let exponent = 2.0 / (n + 2.0);
    let det = epigraph::hessian_det_clamped(psi, x)?;
    let limit_target = constant_c(psi.dim()) * det.powf(1.0 / (n + 2.0));
    let mut rows = Vec::new();
    for delta in ladder.values() {
        let params = FloatParams::for_function(psi, delta)?;
        let ev = floating::floating_value(psi, x, &params)?;
        rows.push((delta, (ev.psi_delta - ev.psi).max(0.0) / delta.powf(exponent)));
    }
    Ok(PointwiseReport { point: *x, rows, limit_target })
}

/// The bound constant 2^{(3n+4)/(n+2)} ((n+2)/vol_n(B₂ⁿ))^{2/(n+2)}.
pub fn uniform_bound_constant(n: usize) -> f64 {
    let nf = n as f64;
    2.0f64.powf((3.0 * nf + 4.0) / (nf + 2.0))
        * ((nf + 2.0) / geom::unit_ball_volume(n)).powf(2.0 / (nf + 2.0))
}

const ROLLING_FLOOR: f64 = 1e-4;

/// Verify (ψ_δ − ψ)/δ^{2/(n+2)} ≤ C (1 + ‖∇ψ‖²)^{1/2} / r_ψ^{n/(n+2)} at
/// every grid node whose rolling radius clears the floor.
pub fn uniform_bound_check(psi: &ConvexFunction, grid: &[Point], delta: f64) -> Result<CheckReport> {
    let n = psi.dim() as f64;
    let exponent = 2.0 / (n + 2.0);
    let c = uniform_bound_constant(psi.dim());
    let radii: Vec<f64> = grid.iter().map(|x| epigraph::rolling_function(psi, x, 1e-3)).collect();
    let min_r = radii.iter().copied().filter(|&r| r >= ROLLING_FLOOR).fold(f64::INFINITY, f64::min);
    let delta0 = 1e-3 * min_r.powf((n + 2.0) / 2.0);
    if delta > delta0 {
        return Err(Error::Precondition(format!(
            "delta {delta} above the small-delta heuristic {delta0} (min rolling radius {min_r})"
        )));
    }
    let params = FloatParams::for_function(psi, delta)?;
    let mut worst = 0.0f64;
    let mut worst_node = None;
    let mut skipped = 0usize;
    for (x, &r) in grid.iter().zip(&radii) {
        if r < ROLLING_FLOOR {
            skipped += 1;
            continue;
        }
        let ev = floating::floating_value(psi, x, &params)?;
        let ratio = (ev.psi_delta - ev.psi).max(0.0) / delta.powf(exponent);
        let g = psi.gradient(x);
        let bound = c * (1.0 + geom::dot(psi.dim(), &g, &g)).sqrt() / r.powf(n / (n + 2.0));
        let rel = ratio / bound;
        if rel > worst {
            worst = rel;
            worst_node = Some(*x);
        }
    }
    let mut rep = CheckReport::upper_bound("uniform_bound", worst, 1.0, 0.0)
        .note(format!("bound constant = {c}"))
        .note(format!("delta = {delta}, heuristic delta0 = {delta0}"))
        .note(format!("nodes skipped below rolling floor: {skipped}"));
    if let Some(node) = worst_node {
        rep = rep.note(format!("worst node: ({}, {})", node[0], node[1]));
    }
    Ok(rep)
}

/// Finiteness of the gradient-weighted and rolling-weighted integrals at
/// α = n/(n+2).
pub fn finiteness_suite(psi: &ConvexFunction) -> Result<CheckReport> {
    let n = psi.dim() as f64;
    let alpha = n / (n + 2.0);
    let spec = convexfn::auto_quadrature_spec(psi, 1e-8, 1e-8);
    let gw = convexfn::gradient_weighted_integral(psi, &spec)?;
    let rw = epigraph::rolling_weighted_integral(psi, alpha, &spec)?;
    let pass = gw.value.is_finite() && rw.value.is_finite();
    Ok(CheckReport {
        property: "finiteness".to_string(),
        lhs: gw.value,
        rhs: rw.value,
        abs_gap: (gw.value - rw.value).abs(),
        rel_gap: (gw.value - rw.value).abs() / gw.value.abs().max(1e-300),
        tol: f64::INFINITY,
        pass,
        notes: vec![
            format!("alpha = {alpha}"),
            format!("rolling-weighted skipped contribution = {}", rw.skipped_contribution),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexfn::quadratic_form;
    use crate::geom::Mat;
    use approx::assert_abs_diff_eq;

    fn parabola_half() -> ConvexFunction {
        quadratic_form(Mat::new1(0.5), 0.0).unwrap()
    }

    #[test]
    fn constants() {
        assert_abs_diff_eq!(constant_c(1), 0.655185, epsilon = 1e-6);
        assert_abs_diff_eq!(constant_c(2), 1.0 / std::f64::consts::PI.sqrt(), epsilon = 1e-12);
        for n in 1..=2 {
            let v = constant_c(n) * (geom::unit_ball_volume(n) / (n as f64 + 2.0)).powf(2.0 / (n as f64 + 2.0));
            assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
        }
        // 2^{7/3}(3/2)^{2/3} = 288^{1/3}
        assert_abs_diff_eq!(uniform_bound_constant(1), 288.0f64.powf(1.0 / 3.0), epsilon = 1e-12);
    }

    #[test]
    fn ladder_shape() {
        let l = DeltaLadder::new(1e-2, 1e-4, 5).unwrap();
        let v = l.values();
        assert_eq!(v.len(), 5);
        assert_abs_diff_eq!(v[0], 1e-2, epsilon = 1e-15);
        assert_abs_diff_eq!(v[4], 1e-4, epsilon = 1e-12);
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        assert!(DeltaLadder::new(1e-4, 1e-2, 5).is_err());
    }

    #[test]
    fn theorem_parabola_1d() {
        let psi = parabola_half();
        let ladder = DeltaLadder::new(1e-2, 1e-4, 5).unwrap();
        let grid = GridSpec::default_for(1);
        let rep = theorem_ratio(&psi, &ladder, &grid).unwrap();
        // R(1e-3) oracle: √(2π)(1 − e^{−b(δ)})/δ^{2/3}
        let b = 0.5f64 * (1.5e-3f64).powf(2.0 / 3.0);
        let oracle = (2.0 * std::f64::consts::PI).sqrt() * (1.0 - (-b).exp()) / 1e-2;
        let row = rep.rows.iter().find(|r| (r.delta - 1e-3).abs() < 1e-9).unwrap();
        assert_abs_diff_eq!(row.ratio, oracle, epsilon = 0.005 * oracle);
        assert!((rep.log_log_slope - 2.0 / 3.0).abs() < 0.05, "slope {}", rep.log_log_slope);
        assert!(
            rep.relative_deviation < 0.01,
            "limit {} vs target {}",
            rep.extrapolated_limit,
            rep.target
        );
        // D(δ) nonnegative and nondecreasing
        for w in rep.rows.windows(2) {
            assert!(w[1].difference <= w[0].difference + 1e-12);
            assert!(w[1].difference >= 0.0);
        }
    }

    #[test]
    fn proposition_parabola_constant_ratio() {
        let psi = parabola_half();
        let ladder = DeltaLadder::new(1e-2, 1e-4, 5).unwrap();
        let rep = proposition_ratio(&psi, &ladder, &GridSpec::default_for(1)).unwrap();
        let target = 1.642325;
        for row in &rep.rows {
            assert_abs_diff_eq!(row.ratio, target, epsilon = 0.01 * target);
        }
    }

    #[test]
    fn pointwise_parabola() {
        let psi = parabola_half();
        let ladder = DeltaLadder::new(1e-3, 1e-5, 3).unwrap();
        let rep = pointwise_rate(&psi, &[1.3, 0.0], &ladder).unwrap();
        assert_abs_diff_eq!(rep.limit_target, 0.655185, epsilon = 1e-5);
        let (_, last_ratio) = rep.rows[rep.rows.len() - 1];
        assert_abs_diff_eq!(last_ratio, 0.655185, epsilon = 0.01);
    }

    #[test]
    fn uniform_bound_parabola() {
        let psi = parabola_half();
        let grid = floating::grid_1d(-2.0, 2.0, 81);
        let rep = uniform_bound_check(&psi, &grid, 1e-4).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.lhs < 1.0);
    }

    #[test]
    fn uniform_bound_delta_guard() {
        let psi = parabola_half();
        let grid = floating::grid_1d(-2.0, 2.0, 9);
        assert!(matches!(
            uniform_bound_check(&psi, &grid, 0.5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn finiteness_parabola() {
        let psi = parabola_half();
        let rep = finiteness_suite(&psi).unwrap();
        assert!(rep.pass);
        assert!(rep.lhs > 0.0 && rep.rhs > 0.0);
    }
}
