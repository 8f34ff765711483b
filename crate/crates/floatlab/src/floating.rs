//! Floating functions ψ_δ: the supremum over all affine functions whose cut
//! of epi(ψ) has volume δ, evaluated pointwise and on grids, plus the exact
//! floating body of a disk as a cross-validation oracle.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexfn::{self, ConvexFunction};
use crate::epigraph::{self, HyperplaneCut};
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::numerics::{self, QuadratureSpec, SearchSpec};

/// Parameters of the floating construction.
#[derive(Debug, Clone)]
pub struct FloatParams {
    pub delta: f64,
    /// Absolute tolerance on the achieved cut volume in the offset solver.
    pub cut_volume_tol: f64,
    pub search: SearchSpec,
    pub quad: QuadratureSpec,
}

impl FloatParams {
    /// Defaults scaled to δ and to the truncation radius of ψ.
    pub fn for_function(psi: &ConvexFunction, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
        }
        let mut quad = convexfn::auto_quadrature_spec(psi, 1e-10, 1e-10);
        quad.abs_tol = (delta * 1e-6).min(1e-10);
        quad.rel_tol = 1e-9;
        Ok(FloatParams {
            delta,
            cut_volume_tol: delta * 1e-4,
            search: SearchSpec::default(),
            quad,
        })
    }
}

/// One floating evaluation: the point, ψ and ψ_δ there, the maximizing cut
/// slope, and the volume that cut actually achieves.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FloatingEvaluation {
    pub point: Point,
    pub psi: f64,
    pub psi_delta: f64,
    pub slope: Point,
    pub cut_volume: f64,
}

/// Maximizer of <a, x> − ψ(x) within the truncation region; the offset at
/// which the cut with slope `a` first touches the graph is ψ(c) − <a, c>.
fn touch_point(psi: &ConvexFunction, a: &Point, spec: &QuadratureSpec, hint: Option<Point>) -> Point {
    match psi.dim() {
        1 => {
            let r = spec.truncation_radius;
            let (x, _) = numerics::golden_max(
                |t| a[0] * t - psi.value(&[t, 0.0]),
                -r,
                r,
                1e-10 * r,
            );
            [x, 0.0]
        }
        _ => {
            // The dry cut of slope a touches where ∇ψ = a, the same
            // stationarity condition the cap-volume kernel solves.
            let dry = HyperplaneCut { slope: *a, offset: 0.0 };
            match epigraph::cap_volume_with_center(psi, &dry, spec, hint) {
                Ok((_, c)) => c,
                Err(_) => hint.unwrap_or([0.0, 0.0]),
            }
        }
    }
}

/// Solution of cap_volume(ψ, (a, b)) = δ in the offset b.
#[derive(Debug, Clone, Copy)]
pub struct OffsetSolution {
    pub offset: f64,
    pub achieved_volume: f64,
    pub(crate) center: Point,
}

/// Invert the cap volume in the offset by bracketing plus safeguarded
/// Newton, using the exact derivative (the wet area).
pub fn offset_for_volume(
    psi: &ConvexFunction,
    slope: &Point,
    delta: f64,
    params: &FloatParams,
) -> Result<OffsetSolution> {
    offset_for_volume_hinted(psi, slope, delta, params, None)
}

pub(crate) fn offset_for_volume_hinted(
    psi: &ConvexFunction,
    slope: &Point,
    delta: f64,
    params: &FloatParams,
    warm: Option<(f64, Point)>,
) -> Result<OffsetSolution> {
    let n = psi.dim() as f64;
    let spec = &params.quad;
    let mut center = warm.map(|w| w.1);
    let touch = touch_point(psi, slope, spec, center);
    let b_touch = psi.value(&touch) - geom::dot(psi.dim(), slope, &touch);
    let cap = |b: f64, c: Option<Point>| {
        let cut = HyperplaneCut { slope: *slope, offset: b };
        epigraph::cap_volume_with_center(psi, &cut, spec, c)
    };

    // Bracket: grow the offset above the touch value until the volume
    // reaches δ; the initial step matches the δ^{2/(n+2)} height scale.
    let mut b_hi = match warm {
        Some((b, _)) if b > b_touch => b,
        _ => b_touch + delta.powf(2.0 / (n + 2.0)),
    };
    let mut v_hi;
    loop {
        let (cv, c) = cap(b_hi, center)?;
        center = Some(c);
        v_hi = cv;
        if cv.volume >= delta {
            break;
        }
        b_hi = b_touch + 2.0 * (b_hi - b_touch);
    }

    // Newton from above: V is convex and increasing in b, so iterates stay
    // above the root and decrease monotonically; bisect if a step misbehaves.
    let mut b_lo = b_touch;
    let mut b = b_hi;
    let mut cv = v_hi;
    for _ in 0..80 {
        if (cv.volume - delta).abs() <= params.cut_volume_tol {
            return Ok(OffsetSolution {
                offset: b,
                achieved_volume: cv.volume,
                center: center.unwrap_or(touch),
            });
        }
        if cv.volume > delta {
            b_hi = b_hi.min(b);
        } else {
            b_lo = b_lo.max(b);
        }
        let newton = if cv.derivative > 0.0 { b - (cv.volume - delta) / cv.derivative } else { f64::NAN };
        b = if newton.is_finite() && newton > b_lo && newton < b_hi {
            newton
        } else {
            0.5 * (b_lo + b_hi)
        };
        let (next, c) = cap(b, center)?;
        center = Some(c);
        cv = next;
    }
    Err(Error::Budget { estimate: cv.volume, error: (cv.volume - delta).abs() })
}

/// ψ_δ(x) = sup over slopes a of <a, x> + b(a) where the cut (a, b(a)) has
/// volume δ. The slope search box is centered at ∇ψ(x).
pub fn floating_value(psi: &ConvexFunction, x: &Point, params: &FloatParams) -> Result<FloatingEvaluation> {
    let dim = psi.dim();
    let grad = psi.gradient(x);
    let base_width = params.search.half_width * (1.0 + geom::norm(dim, &grad));
    let mut half_width = base_width;
    for attempt in 0..2 {
        let warm: RefCell<Option<(f64, Point)>> = RefCell::new(None);
        let objective = |a: &Point| -> f64 {
            let hint = *warm.borrow();
            match offset_for_volume_hinted(psi, a, params.delta, params, hint) {
                Ok(sol) => {
                    *warm.borrow_mut() = Some((sol.offset, sol.center));
                    geom::dot(dim, a, x) + sol.offset
                }
                Err(_) => f64::NEG_INFINITY,
            }
        };
        let res = numerics::maximize(&objective, dim, &grad, half_width, &params.search);
        if res.boundary_hit || !res.value.is_finite() {
            half_width *= 2.0;
            if attempt == 1 {
                return Err(Error::SearchBox);
            }
            continue;
        }
        let slope = res.point;
        let hint = *warm.borrow();
        let sol = offset_for_volume_hinted(psi, &slope, params.delta, params, hint)?;
        return Ok(FloatingEvaluation {
            point: *x,
            psi: psi.value(x),
            psi_delta: geom::dot(dim, &slope, x) + sol.offset,
            slope,
            cut_volume: sol.achieved_volume,
        });
    }
    Err(Error::SearchBox)
}

/// f_δ(x) = e^{−ψ_δ(x)}.
pub fn floating_log_concave(psi: &ConvexFunction, x: &Point, params: &FloatParams) -> Result<f64> {
    Ok((-floating_value(psi, x, params)?.psi_delta).exp())
}

/// Batch evaluation over a grid; points evaluate independently (and in
/// parallel), output order follows the grid order.
pub fn floating_grid(
    psi: &ConvexFunction,
    grid: &[Point],
    params: &FloatParams,
) -> Vec<Result<FloatingEvaluation>> {
    grid.par_iter().map(|x| floating_value(psi, x, params)).collect()
}

/// Uniform 1D grid as points.
pub fn grid_1d(lo: f64, hi: f64, count: usize) -> Vec<Point> {
    (0..count)
        .map(|i| {
            let t = if count == 1 { 0.5 } else { i as f64 / (count - 1) as f64 };
            [lo + (hi - lo) * t, 0.0]
        })
        .collect()
}

/// Uniform 2D tensor grid, row-major in the first coordinate.
pub fn grid_2d(lo: Point, hi: Point, count: [usize; 2]) -> Vec<Point> {
    let mut out = Vec::with_capacity(count[0] * count[1]);
    for i in 0..count[0] {
        let tx = if count[0] == 1 { 0.5 } else { i as f64 / (count[0] - 1) as f64 };
        for j in 0..count[1] {
            let ty = if count[1] == 1 { 0.5 } else { j as f64 / (count[1] - 1) as f64 };
            out.push([lo[0] + (hi[0] - lo[0]) * tx, lo[1] + (hi[1] - lo[1]) * ty]);
        }
    }
    out
}

fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// CSV serialization of grid results, skipping failed points.
pub fn grid_to_csv(dim: usize, rows: &[Result<FloatingEvaluation>]) -> String {
    let mut out = String::new();
    out.push_str(if dim == 1 {
        "x1,psi,psi_delta,slope1,cutvol\n"
    } else {
        "x1,x2,psi,psi_delta,slope1,slope2,cutvol\n"
    });
    for row in rows.iter().flatten() {
        let mut cols = vec![sig9(row.point[0])];
        if dim == 2 {
            cols.push(sig9(row.point[1]));
        }
        cols.push(sig9(row.psi));
        cols.push(sig9(row.psi_delta));
        cols.push(sig9(row.slope[0]));
        if dim == 2 {
            cols.push(sig9(row.slope[1]));
        }
        cols.push(sig9(row.cut_volume));
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Floating body of the disk of radius r: by symmetry a concentric disk
/// whose margin h solves segmentarea(h) = δ.
pub fn disk_floating_body(radius: f64, delta: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::Domain("disk radius must be positive".into()));
    }
    let half = 0.5 * std::f64::consts::PI * radius * radius;
    if !(delta > 0.0) || delta >= half {
        return Err(Error::Domain(format!(
            "cut area {delta} must lie in (0, {half}) for the disk oracle"
        )));
    }
    let segment = |h: f64| {
        radius * radius * (1.0 - h / radius).acos() - (radius - h) * (2.0 * radius * h - h * h).sqrt()
    };
    let mut lo = 0.0;
    let mut hi = radius;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if segment(mid) < delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(radius - 0.5 * (lo + hi))
}
