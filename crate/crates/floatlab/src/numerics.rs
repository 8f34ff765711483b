//! Shared numerical kernels: adaptive Gauss–Kronrod quadrature in one and
//! two dimensions, bracketed root finding, low-dimensional maximization and
//! central finite differences.
//!
//! Everything here is deterministic for fixed inputs and free of shared
//! mutable state.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mat, Point};

/// Positive Gauss–Kronrod 7-15 abscissae (QUADPACK).
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// The 15 Kronrod nodes on [-1, 1] in increasing order, with the Kronrod
/// weights and the embedded Gauss-7 weights (zero at Kronrod-only nodes).
pub(crate) fn gk15_nodes() -> ([f64; 15], [f64; 15], [f64; 15]) {
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for i in 0..7 {
        x[i] = -XGK[i];
        x[14 - i] = XGK[i];
        wk[i] = WGK[i];
        wk[14 - i] = WGK[i];
        // Gauss nodes sit at the odd Kronrod indices.
        if i % 2 == 1 {
            wg[i] = WG[i / 2];
            wg[14 - i] = WG[i / 2];
        }
    }
    x[7] = 0.0;
    wk[7] = WGK[7];
    wg[7] = WG[3];
    (x, wk, wg)
}

/// Specification for the adaptive quadrature kernels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub dimension: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// The integration domain is truncated to the ball of this radius.
    pub truncation_radius: f64,
}

impl QuadratureSpec {
    pub fn new(
        dimension: usize,
        abs_tol: f64,
        rel_tol: f64,
        max_subdivisions: usize,
        truncation_radius: f64,
    ) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::Construction(format!(
                "quadrature dimension must be 1 or 2, got {dimension}"
            )));
        }
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
            return Err(Error::Construction(
                "quadrature tolerances must be strictly positive".into(),
            ));
        }
        if max_subdivisions == 0 {
            return Err(Error::Construction("max_subdivisions must be positive".into()));
        }
        if !(truncation_radius > 0.0) || !truncation_radius.is_finite() {
            return Err(Error::Construction(
                "truncation radius must be finite and positive".into(),
            ));
        }
        Ok(QuadratureSpec {
            dimension,
            abs_tol,
            rel_tol,
            max_subdivisions,
            truncation_radius,
        })
    }

    pub fn default_for(dimension: usize) -> Self {
        QuadratureSpec {
            dimension,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_subdivisions: 4000,
            truncation_radius: 16.0,
        }
    }
}

/// Specification for the coarse-grid + refinement maximizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchSpec {
    /// Grid points per slope coordinate for the coarse scan.
    pub coarse_grid_count: usize,
    /// Coordinate-descent sweeps after the coarse scan.
    pub refinement_iterations: usize,
    /// Base half-width of the slope box.
    pub half_width: f64,
}

impl SearchSpec {
    pub fn new(coarse_grid_count: usize, refinement_iterations: usize, half_width: f64) -> Result<Self> {
        if coarse_grid_count < 3 {
            return Err(Error::Construction("coarse grid count must be >= 3".into()));
        }
        if !(half_width > 0.0) {
            return Err(Error::Construction("slope box half-width must be positive".into()));
        }
        Ok(SearchSpec {
            coarse_grid_count,
            refinement_iterations,
            half_width,
        })
    }
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec {
            coarse_grid_count: 5,
            refinement_iterations: 3,
            half_width: 4.0,
        }
    }
}

/// A quadrature estimate together with its error bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Integration regions accepted by [`integrate`].
#[derive(Debug, Clone, Copy)]
pub enum Region {
    Interval { lo: f64, hi: f64 },
    Rect { lo: Point, hi: Point },
    /// Disk in the plane; the integrand is taken to be 0 outside it.
    Ball { center: Point, radius: f64 },
}

/// Single Gauss–Kronrod panel on [a, b].
fn gk15_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (x, wk, wg) = gk15_nodes();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut ik = 0.0;
    let mut ig = 0.0;
    for i in 0..15 {
        let v = f(c + h * x[i]);
        ik += wk[i] * v;
        ig += wg[i] * v;
    }
    (ik * h, (ik - ig).abs() * h.abs())
}

struct Seg {
    err: f64,
    seq: usize,
    a: f64,
    b: f64,
    val: f64,
}

impl PartialEq for Seg {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.seq == other.seq
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Seg {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on error; older segment wins ties for determinism.
        self.err
            .total_cmp(&other.err)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Adaptive 1D Gauss–Kronrod integration of `f` over [lo, hi].
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate> {
    if lo == hi {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let f = &f as &dyn Fn(f64) -> f64;
    let (v, e) = gk15_panel(f, lo, hi);
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Seg { err: e, seq, a: lo, b: hi, val: v });
    let mut total_val = v;
    let mut total_err = e;
    let mut splits = 0usize;
    while total_err > abs_tol.max(rel_tol * total_val.abs()) {
        if splits >= max_subdivisions {
            return Err(Error::Budget { estimate: total_val, error: total_err });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            // Interval cannot be split further in f64.
            heap.push(worst);
            break;
        }
        total_val -= worst.val;
        total_err -= worst.err;
        let (v1, e1) = gk15_panel(f, worst.a, mid);
        let (v2, e2) = gk15_panel(f, mid, worst.b);
        total_val += v1 + v2;
        total_err += e1 + e2;
        seq += 1;
        heap.push(Seg { err: e1, seq, a: worst.a, b: mid, val: v1 });
        seq += 1;
        heap.push(Seg { err: e2, seq, a: mid, b: worst.b, val: v2 });
        splits += 1;
    }
    Ok(Estimate { value: total_val, error: total_err })
}

/// Tensor Gauss–Kronrod panel on a rectangle.
fn gk15_panel_2d(f: &dyn Fn(f64, f64) -> f64, lo: &Point, hi: &Point) -> (f64, f64) {
    let (x, wk, wg) = gk15_nodes();
    let cx = 0.5 * (lo[0] + hi[0]);
    let cy = 0.5 * (lo[1] + hi[1]);
    let hx = 0.5 * (hi[0] - lo[0]);
    let hy = 0.5 * (hi[1] - lo[1]);
    let mut ik = 0.0;
    let mut ig = 0.0;
    for i in 0..15 {
        let xi = cx + hx * x[i];
        let mut row_k = 0.0;
        let mut row_g = 0.0;
        for j in 0..15 {
            let v = f(xi, cy + hy * x[j]);
            row_k += wk[j] * v;
            row_g += wg[j] * v;
        }
        ik += wk[i] * row_k;
        ig += wg[i] * row_g;
    }
    (ik * hx * hy, (ik * hx * hy - ig * hx * hy).abs())
}

struct Panel {
    err: f64,
    seq: usize,
    lo: Point,
    hi: Point,
    val: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.seq == other.seq
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Adaptive tensor-product integration over a rectangle. The worst panel is
/// split along its longer edge.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    lo: Point,
    hi: Point,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate> {
    let f = &f as &dyn Fn(f64, f64) -> f64;
    let (v, e) = gk15_panel_2d(f, &lo, &hi);
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Panel { err: e, seq, lo, hi, val: v });
    let mut total_val = v;
    let mut total_err = e;
    let mut splits = 0usize;
    while total_err > abs_tol.max(rel_tol * total_val.abs()) {
        if splits >= max_subdivisions {
            return Err(Error::Budget { estimate: total_val, error: total_err });
        }
        let worst = heap.pop().expect("non-empty heap");
        total_val -= worst.val;
        total_err -= worst.err;
        let wx = worst.hi[0] - worst.lo[0];
        let wy = worst.hi[1] - worst.lo[1];
        let (lo1, hi1, lo2, hi2) = if wx >= wy {
            let mid = 0.5 * (worst.lo[0] + worst.hi[0]);
            (
                worst.lo,
                [mid, worst.hi[1]],
                [mid, worst.lo[1]],
                worst.hi,
            )
        } else {
            let mid = 0.5 * (worst.lo[1] + worst.hi[1]);
            (
                worst.lo,
                [worst.hi[0], mid],
                [worst.lo[0], mid],
                worst.hi,
            )
        };
        let (v1, e1) = gk15_panel_2d(f, &lo1, &hi1);
        let (v2, e2) = gk15_panel_2d(f, &lo2, &hi2);
        total_val += v1 + v2;
        total_err += e1 + e2;
        seq += 1;
        heap.push(Panel { err: e1, seq, lo: lo1, hi: hi1, val: v1 });
        seq += 1;
        heap.push(Panel { err: e2, seq, lo: lo2, hi: hi2, val: v2 });
        splits += 1;
    }
    Ok(Estimate { value: total_val, error: total_err })
}

/// Adaptive quadrature of a scalar field over a region.
pub fn integrate<F: Fn(&Point) -> f64>(g: F, region: Region, spec: &QuadratureSpec) -> Result<Estimate> {
    match region {
        Region::Interval { lo, hi } => integrate_1d(
            |x| g(&[x, 0.0]),
            lo,
            hi,
            spec.abs_tol,
            spec.rel_tol,
            spec.max_subdivisions,
        ),
        Region::Rect { lo, hi } => integrate_2d(
            |x, y| g(&[x, y]),
            lo,
            hi,
            spec.abs_tol,
            spec.rel_tol,
            spec.max_subdivisions,
        ),
        Region::Ball { center, radius } => {
            let r2 = radius * radius;
            integrate_2d(
                |x, y| {
                    let dx = x - center[0];
                    let dy = y - center[1];
                    if dx * dx + dy * dy <= r2 {
                        g(&[x, y])
                    } else {
                        0.0
                    }
                },
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
                spec.abs_tol,
                spec.rel_tol,
                spec.max_subdivisions,
            )
        }
    }
}

/// Bisection root finding for a monotone function with a sign change on the
/// bracket. The iterate never leaves [lo, hi].
pub fn find_root_monotone<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = g(a);
    let fb = g(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    loop {
        let mid = 0.5 * (a + b);
        let fm = g(mid);
        if fm.abs() <= tol || (b - a) <= tol || mid == a || mid == b {
            return Ok(mid);
        }
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
}

/// Result of [`maximize`]. `boundary_hit` warns that the best point landed on
/// the box boundary, i.e. the box was likely too small.
#[derive(Debug, Clone, Copy)]
pub struct MaxResult {
    pub point: Point,
    pub value: f64,
    pub boundary_hit: bool,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of a scalar function on [a, b] down to
/// bracket width `xtol`. Returns (argmax, value).
pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > xtol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Coarse grid scan followed by per-coordinate golden-section refinement.
/// The search box is `center ± half_width` in every coordinate. Ties on the
/// coarse grid break toward the first grid index.
pub fn maximize<F: Fn(&Point) -> f64>(
    g: F,
    dim: usize,
    center: &Point,
    half_width: f64,
    spec: &SearchSpec,
) -> MaxResult {
    let n = spec.coarse_grid_count;
    let lo = [center[0] - half_width, center[1] - half_width];
    let hi = [center[0] + half_width, center[1] + half_width];
    let step = 2.0 * half_width / (n - 1) as f64;
    let coord = |lo: f64, i: usize| lo + step * i as f64;

    let mut best = [lo[0], if dim == 2 { lo[1] } else { 0.0 }];
    let mut best_val = f64::NEG_INFINITY;
    if dim == 1 {
        for i in 0..n {
            let p = [coord(lo[0], i), 0.0];
            let v = g(&p);
            if v > best_val {
                best_val = v;
                best = p;
            }
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                let p = [coord(lo[0], i), coord(lo[1], j)];
                let v = g(&p);
                if v > best_val {
                    best_val = v;
                    best = p;
                }
            }
        }
    }

    // Golden-section refinement around the incumbent, one coordinate at a
    // time, clamped to the box.
    let xtol = (2.0 * half_width * 1e-7).max(1e-12);
    for _ in 0..spec.refinement_iterations {
        for c in 0..dim {
            let a = (best[c] - step).max(lo[c]);
            let b = (best[c] + step).min(hi[c]);
            let (x, v) = golden_max(
                |t| {
                    let mut p = best;
                    p[c] = t;
                    g(&p)
                },
                a,
                b,
                xtol,
            );
            if v >= best_val {
                best_val = v;
                best[c] = x;
            }
        }
    }

    let edge_tol = 2.0 * half_width * 1e-4;
    let mut boundary_hit = false;
    for c in 0..dim {
        if best[c] - lo[c] <= edge_tol || hi[c] - best[c] <= edge_tol {
            boundary_hit = true;
        }
    }
    MaxResult { point: best, value: best_val, boundary_hit }
}

/// Central-difference gradient with step `h`.
pub fn fd_gradient<F: Fn(&Point) -> f64>(f: F, dim: usize, x: &Point, h: f64) -> Point {
    let mut g = [0.0, 0.0];
    for c in 0..dim {
        let mut xp = *x;
        let mut xm = *x;
        xp[c] += h;
        xm[c] -= h;
        g[c] = (f(&xp) - f(&xm)) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian with step `h`, symmetrized as (H + H^T)/2.
pub fn fd_hessian<F: Fn(&Point) -> f64>(f: F, dim: usize, x: &Point, h: f64) -> Mat {
    let f0 = f(x);
    let mut m = [[0.0f64; 2]; 2];
    for c in 0..dim {
        let mut xp = *x;
        let mut xm = *x;
        xp[c] += h;
        xm[c] -= h;
        m[c][c] = (f(&xp) - 2.0 * f0 + f(&xm)) / (h * h);
    }
    if dim == 2 {
        let eval = |sx: f64, sy: f64| f(&[x[0] + sx * h, x[1] + sy * h]);
        let mixed =
            (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * h * h);
        m[0][1] = mixed;
        m[1][0] = mixed;
    }
    Mat { dim, m }
}
