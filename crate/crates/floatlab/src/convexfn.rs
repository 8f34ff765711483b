//! Convex functions ψ: R^n → R (n = 1, 2) with evaluation, derivatives,
//! coercivity data and the basic density integrals.
//!
//! Every function carries a linear minorant ψ(x) ≥ γ‖x‖ + β fitted at
//! construction time; by convexity this is equivalent to integrability of
//! e^{-ψ}, and it yields certified truncation radii for all quadratures.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{self, Mat, Point};
use crate::numerics::{self, Estimate, QuadratureSpec, Region};

type EvalFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
type HessFn = Arc<dyn Fn(&Point) -> Mat + Send + Sync>;

/// Linear lower bound ψ(x) ≥ γ‖x‖ + β with γ > 0.
#[derive(Debug, Clone, Copy)]
pub struct Minorant {
    pub gamma: f64,
    pub beta: f64,
}

/// An evaluatable convex function with optional analytic derivatives.
///
/// Values are immutable after construction and cheap to clone (shared
/// closures), so they can be used freely across threads.
#[derive(Clone)]
pub struct ConvexFunction {
    dim: usize,
    eval: EvalFn,
    grad: Option<GradFn>,
    hess: Option<HessFn>,
    minorant: Minorant,
    /// Product of |det A| over all affine precompositions, for invariance
    /// tests.
    affine_det: f64,
}

pub const FD_GRADIENT_STEP: f64 = 1e-4;
pub const FD_HESSIAN_STEP: f64 = 1e-3;

impl std::fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvexFunction")
            .field("dim", &self.dim)
            .field("analytic_gradient", &self.grad.is_some())
            .field("analytic_hessian", &self.hess.is_some())
            .field("minorant", &self.minorant)
            .finish()
    }
}

impl ConvexFunction {
    /// Build from raw closures. The minorant is fitted numerically; a
    /// non-coercive input is rejected.
    pub fn from_parts(
        dim: usize,
        eval: EvalFn,
        grad: Option<GradFn>,
        hess: Option<HessFn>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Construction(format!("dimension must be 1 or 2, got {dim}")));
        }
        let minorant = fit_minorant_raw(dim, &*eval)?;
        Ok(ConvexFunction { dim, eval, grad, hess, minorant, affine_det: 1.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &Point) -> f64 {
        (self.eval)(x)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn has_analytic_hessian(&self) -> bool {
        self.hess.is_some()
    }

    /// Gradient: analytic when available, otherwise central differences.
    pub fn gradient(&self, x: &Point) -> Point {
        match &self.grad {
            Some(g) => g(x),
            None => numerics::fd_gradient(|p| (self.eval)(p), self.dim, x, FD_GRADIENT_STEP),
        }
    }

    /// Hessian: analytic when available, otherwise symmetrized central
    /// differences.
    pub fn hessian(&self, x: &Point) -> Mat {
        match &self.hess {
            Some(h) => h(x),
            None => numerics::fd_hessian(|p| (self.eval)(p), self.dim, x, FD_HESSIAN_STEP),
        }
    }

    pub fn minorant(&self) -> Minorant {
        self.minorant
    }

    pub fn affine_det(&self) -> f64 {
        self.affine_det
    }

    /// Midpoint convexity spot check on deterministic pseudo-random pairs.
    pub fn spot_check_convexity(&self, pairs: usize, seed: u64, radius: f64) -> bool {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..pairs {
            let mut sample = || {
                let mut p = [0.0, 0.0];
                for c in 0..self.dim {
                    p[c] = rng.gen_range(-radius..radius);
                }
                p
            };
            let x = sample();
            let y = sample();
            let lam: f64 = rng.gen_range(0.05..0.95);
            let mid = geom::add(&geom::scale(lam, &x), &geom::scale(1.0 - lam, &y));
            let lhs = self.value(&mid);
            let rhs = lam * self.value(&x) + (1.0 - lam) * self.value(&y);
            if lhs > rhs + 1e-10 * (1.0 + rhs.abs()) {
                return false;
            }
        }
        true
    }

    /// Checks ψ(x) ≥ γ‖x‖ + β on deterministic pseudo-random samples.
    pub fn spot_check_minorant(&self, samples: usize, seed: u64, radius: f64) -> bool {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let Minorant { gamma, beta } = self.minorant;
        for _ in 0..samples {
            let mut p = [0.0, 0.0];
            for c in 0..self.dim {
                p[c] = rng.gen_range(-radius..radius);
            }
            let bound = gamma * geom::norm(self.dim, &p) + beta;
            if self.value(&p) < bound - 1e-9 * (1.0 + bound.abs()) {
                return false;
            }
        }
        true
    }
}

/// Convex body used for gauge-based constructions.
#[derive(Debug, Clone)]
pub enum Body {
    /// Axis-aligned ellipse with semi-axes rx, ry.
    Ellipse { rx: f64, ry: f64 },
    /// Origin-symmetric convex polygon; `vertices` lists one half, the
    /// reflection is implied. Must contain the origin in its interior.
    SymmetricPolygon { vertices: Vec<Point> },
}

/// ψ(x) = ⟨Ax, x⟩ + c for a symmetric positive definite A.
pub fn quadratic_form(a: Mat, shift: f64) -> Result<ConvexFunction> {
    let dim = a.dim;
    if (a.m[0][1] - a.m[1][0]).abs() > 1e-12 {
        return Err(Error::Construction("quadratic form matrix must be symmetric".into()));
    }
    if !a.is_spd(0.0) {
        return Err(Error::Construction("quadratic form matrix must be positive definite".into()));
    }
    let eval: EvalFn = Arc::new(move |x: &Point| geom::dot(dim, &a.apply(x), x) + shift);
    let grad: GradFn = Arc::new(move |x: &Point| geom::scale(2.0, &a.apply(x)));
    let hess_mat = Mat { dim, m: [[2.0 * a.m[0][0], 2.0 * a.m[0][1]], [2.0 * a.m[1][0], 2.0 * a.m[1][1]]] };
    let hess: HessFn = Arc::new(move |_: &Point| hess_mat);
    ConvexFunction::from_parts(dim, eval, Some(grad), Some(hess))
}

/// ψ(x) = ‖x‖_K² / 2 for the gauge of `body`.
pub fn gauge_square_half(body: Body) -> Result<ConvexFunction> {
    match body {
        Body::Ellipse { rx, ry } => {
            if !(rx > 0.0) || !(ry > 0.0) {
                return Err(Error::Construction("ellipse semi-axes must be positive".into()));
            }
            let (cx, cy) = (1.0 / (rx * rx), 1.0 / (ry * ry));
            let eval: EvalFn = Arc::new(move |x: &Point| 0.5 * (cx * x[0] * x[0] + cy * x[1] * x[1]));
            let grad: GradFn = Arc::new(move |x: &Point| [cx * x[0], cy * x[1]]);
            let hess: HessFn = Arc::new(move |_| Mat::new2(cx, 0.0, 0.0, cy));
            ConvexFunction::from_parts(2, eval, Some(grad), Some(hess))
        }
        Body::SymmetricPolygon { vertices } => {
            if vertices.len() < 2 {
                return Err(Error::Construction("polygon needs at least two half-vertices".into()));
            }
            // Full symmetric vertex loop, then facet normals n_e / offsets h_e;
            // gauge(x) = max_e <x, n_e> / h_e.
            let mut verts: Vec<Point> = vertices.clone();
            verts.extend(vertices.iter().map(|v| geom::scale(-1.0, v)));
            let m = verts.len();
            let mut facets: Vec<(Point, f64)> = Vec::with_capacity(m);
            for i in 0..m {
                let a = verts[i];
                let b = verts[(i + 1) % m];
                let e = geom::sub(&b, &a);
                let n = [e[1], -e[0]];
                let h = geom::dot(2, &n, &a);
                if h.abs() < 1e-12 {
                    return Err(Error::Construction("polygon must contain the origin in its interior".into()));
                }
                let (n, h) = if h > 0.0 { (n, h) } else { (geom::scale(-1.0, &n), -h) };
                facets.push((n, h));
            }
            let facets = Arc::new(facets);
            let gauge = {
                let facets = facets.clone();
                move |x: &Point| -> (f64, usize) {
                    let mut best = f64::NEG_INFINITY;
                    let mut idx = 0;
                    for (i, (n, h)) in facets.iter().enumerate() {
                        let v = geom::dot(2, n, x) / h;
                        if v > best {
                            best = v;
                            idx = i;
                        }
                    }
                    (best.max(0.0), idx)
                }
            };
            let g2 = gauge.clone();
            let facets2 = facets.clone();
            let eval: EvalFn = Arc::new(move |x: &Point| {
                let (g, _) = gauge(x);
                0.5 * g * g
            });
            let grad: GradFn = Arc::new(move |x: &Point| {
                let (g, i) = g2(x);
                let (n, h) = &facets2[i];
                geom::scale(g / h, n)
            });
            ConvexFunction::from_parts(2, eval, Some(grad), None)
        }
    }
}

/// ψ(x) = s‖x‖^p with p ≥ 1, s > 0 (Euclidean norm).
pub fn power_norm(dim: usize, p: f64, s: f64) -> Result<ConvexFunction> {
    if p < 1.0 {
        return Err(Error::Construction(format!("power norm exponent must be >= 1, got {p}")));
    }
    if !(s > 0.0) {
        return Err(Error::Construction("power norm scale must be positive".into()));
    }
    let eval: EvalFn = Arc::new(move |x: &Point| s * geom::norm(dim, x).powf(p));
    let grad: GradFn = Arc::new(move |x: &Point| {
        let r = geom::norm(dim, x);
        if r < 1e-300 {
            [0.0, 0.0]
        } else {
            geom::scale(s * p * r.powf(p - 2.0), x)
        }
    });
    let hess: HessFn = Arc::new(move |x: &Point| {
        let r = geom::norm(dim, x).max(1e-12);
        let a = s * p * r.powf(p - 2.0);
        let b = s * p * (p - 2.0) * r.powf(p - 4.0);
        match dim {
            1 => Mat::new1(a + b * x[0] * x[0]),
            _ => Mat::new2(
                a + b * x[0] * x[0],
                b * x[0] * x[1],
                b * x[0] * x[1],
                a + b * x[1] * x[1],
            ),
        }
    });
    ConvexFunction::from_parts(dim, eval, Some(grad), Some(hess))
}

/// ψ(x) = (x₁⁴ + x₂⁴)^{1/2}, the square of the ℓ⁴ gauge: 2-homogeneous
/// but not a quadratic form.
pub fn quartic_gauge_2d() -> Result<ConvexFunction> {
    let u = |x: &Point| x[0].powi(4) + x[1].powi(4);
    let eval: EvalFn = Arc::new(move |x: &Point| u(x).sqrt());
    let grad: GradFn = Arc::new(move |x: &Point| {
        let s = u(x).sqrt();
        if s < 1e-300 {
            [0.0, 0.0]
        } else {
            [2.0 * x[0].powi(3) / s, 2.0 * x[1].powi(3) / s]
        }
    });
    let hess: HessFn = Arc::new(move |x: &Point| {
        let uv = u(x);
        if uv < 1e-300 {
            return Mat::new2(0.0, 0.0, 0.0, 0.0);
        }
        let s = uv.sqrt();
        let (u1, u2) = (4.0 * x[0].powi(3), 4.0 * x[1].powi(3));
        let q = 4.0 * uv * s;
        Mat::new2(
            6.0 * x[0] * x[0] / s - u1 * u1 / q,
            -u1 * u2 / q,
            -u1 * u2 / q,
            6.0 * x[1] * x[1] / s - u2 * u2 / q,
        )
    });
    ConvexFunction::from_parts(2, eval, Some(grad), Some(hess))
}

/// Pointwise minimum of two convex functions; only valid when the result is
/// convex, which is spot-checked at construction.
pub fn min_of_checked(f: &ConvexFunction, g: &ConvexFunction, seed: u64) -> Result<ConvexFunction> {
    if f.dim() != g.dim() {
        return Err(Error::Construction("min_of requires equal dimensions".into()));
    }
    let dim = f.dim();
    let (a, b) = (f.clone(), g.clone());
    let (a2, b2) = (f.clone(), g.clone());
    let (a3, b3) = (f.clone(), g.clone());
    let eval: EvalFn = Arc::new(move |x: &Point| a.value(x).min(b.value(x)));
    let grad: GradFn = Arc::new(move |x: &Point| {
        if a2.value(x) <= b2.value(x) {
            a2.gradient(x)
        } else {
            b2.gradient(x)
        }
    });
    let hess: HessFn = Arc::new(move |x: &Point| {
        if a3.value(x) <= b3.value(x) {
            a3.hessian(x)
        } else {
            b3.hessian(x)
        }
    });
    let out = ConvexFunction::from_parts(dim, eval, Some(grad), Some(hess))?;
    if !out.spot_check_convexity(400, seed, 6.0) {
        return Err(Error::Precondition("pointwise minimum is not convex".into()));
    }
    Ok(out)
}

fn active_branch(parts: &[ConvexFunction], x: &Point) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut idx = 0;
    for (i, f) in parts.iter().enumerate() {
        let v = f.value(x);
        // strict '>' keeps the lexicographically smallest index on ties
        if v > best {
            best = v;
            idx = i;
        }
    }
    idx
}

/// Pointwise maximum. Derivatives come from the active branch; on the
/// (measure-zero) tie set the branch with the smallest index wins.
pub fn max_of(parts: Vec<ConvexFunction>) -> Result<ConvexFunction> {
    if parts.is_empty() {
        return Err(Error::Construction("max_of needs at least one function".into()));
    }
    let dim = parts[0].dim;
    if parts.iter().any(|f| f.dim != dim) {
        return Err(Error::Construction("max_of requires equal dimensions".into()));
    }
    let parts = Arc::new(parts);
    let p1 = parts.clone();
    let p2 = parts.clone();
    let p3 = parts.clone();
    let eval: EvalFn = Arc::new(move |x: &Point| {
        p1.iter().map(|f| f.value(x)).fold(f64::NEG_INFINITY, f64::max)
    });
    let grad: GradFn = Arc::new(move |x: &Point| p2[active_branch(&p2, x)].gradient(x));
    let hess: HessFn = Arc::new(move |x: &Point| p3[active_branch(&p3, x)].hessian(x));
    ConvexFunction::from_parts(dim, eval, Some(grad), Some(hess))
}

/// Pointwise sum.
pub fn sum_of(parts: Vec<ConvexFunction>) -> Result<ConvexFunction> {
    if parts.is_empty() {
        return Err(Error::Construction("sum_of needs at least one function".into()));
    }
    let dim = parts[0].dim;
    if parts.iter().any(|f| f.dim != dim) {
        return Err(Error::Construction("sum_of requires equal dimensions".into()));
    }
    let parts = Arc::new(parts);
    let p1 = parts.clone();
    let p2 = parts.clone();
    let p3 = parts.clone();
    let eval: EvalFn = Arc::new(move |x: &Point| p1.iter().map(|f| f.value(x)).sum());
    let grad: GradFn = Arc::new(move |x: &Point| {
        let mut g = [0.0, 0.0];
        for f in p2.iter() {
            let gi = f.gradient(x);
            g[0] += gi[0];
            g[1] += gi[1];
        }
        g
    });
    let hess: HessFn = Arc::new(move |x: &Point| {
        let mut m = [[0.0f64; 2]; 2];
        for f in p3.iter() {
            let h = f.hessian(x);
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += h.m[i][j];
                }
            }
        }
        Mat { dim, m }
    });
    ConvexFunction::from_parts(dim, eval, Some(grad), Some(hess))
}

/// ψ(Ax + t) for an invertible A. Records |det A| for invariance tests.
pub fn precompose_affine(psi: &ConvexFunction, a: Mat, t: Point) -> Result<ConvexFunction> {
    let dim = psi.dim;
    if a.dim != dim {
        return Err(Error::Construction("affine map dimension mismatch".into()));
    }
    let det = a.det();
    if det.abs() < 1e-12 {
        return Err(Error::Construction("affine map must be invertible".into()));
    }
    let inner = psi.clone();
    let map = move |x: &Point| geom::add(&a.apply(x), &t);
    let f1 = inner.clone();
    let m1 = map;
    let eval: EvalFn = Arc::new(move |x: &Point| f1.value(&m1(x)));
    let f2 = inner.clone();
    let at = a.transpose();
    let grad: GradFn = Arc::new(move |x: &Point| at.apply(&f2.gradient(&map(x))));
    let f3 = inner.clone();
    let hess: HessFn = Arc::new(move |x: &Point| {
        let h = f3.hessian(&map(x));
        at.mul(&h).mul(&a)
    });
    let mut out = ConvexFunction::from_parts(dim, eval, Some(grad), Some(hess))?;
    out.affine_det = psi.affine_det * det.abs();
    Ok(out)
}

/// 1D piecewise function: linear interpolation between breakpoints, extended
/// by convex quadratic tails past both ends. Slopes must be nondecreasing.
pub fn piecewise_1d(breakpoints: &[f64], values: &[f64]) -> Result<ConvexFunction> {
    let k = breakpoints.len();
    if k < 2 || values.len() != k {
        return Err(Error::Construction("piecewise_1d needs matching breakpoints and values, at least two".into()));
    }
    let mut slopes = Vec::with_capacity(k - 1);
    for i in 0..k - 1 {
        let dx = breakpoints[i + 1] - breakpoints[i];
        if dx <= 0.0 {
            return Err(Error::Construction("breakpoints must be strictly increasing".into()));
        }
        slopes.push((values[i + 1] - values[i]) / dx);
    }
    for w in slopes.windows(2) {
        if w[1] < w[0] - 1e-12 {
            return Err(Error::Construction("piecewise data is not convex (slopes decrease)".into()));
        }
    }
    let xs: Arc<Vec<f64>> = Arc::new(breakpoints.to_vec());
    let vs: Arc<Vec<f64>> = Arc::new(values.to_vec());
    let sl: Arc<Vec<f64>> = Arc::new(slopes);
    let eval_impl = {
        let xs = xs.clone();
        let vs = vs.clone();
        let sl = sl.clone();
        move |x: f64| -> (f64, f64, f64) {
            // (value, derivative, second derivative)
            let n = xs.len();
            if x < xs[0] {
                let d = x - xs[0];
                (vs[0] + sl[0] * d + 0.5 * d * d, sl[0] + d, 1.0)
            } else if x >= xs[n - 1] {
                let d = x - xs[n - 1];
                let s = sl[n - 2];
                (vs[n - 1] + s * d + 0.5 * d * d, s + d, 1.0)
            } else {
                let i = xs.partition_point(|&b| b <= x).saturating_sub(1).min(n - 2);
                (vs[i] + sl[i] * (x - xs[i]), sl[i], 0.0)
            }
        }
    };
    let e1 = eval_impl.clone();
    let e2 = eval_impl.clone();
    let e3 = eval_impl;
    let eval: EvalFn = Arc::new(move |x: &Point| e1(x[0]).0);
    let grad: GradFn = Arc::new(move |x: &Point| [e2(x[0]).1, 0.0]);
    let hess: HessFn = Arc::new(move |x: &Point| Mat::new1(e3(x[0]).2));
    ConvexFunction::from_parts(1, eval, Some(grad), Some(hess))
}

/// Locate an approximate global minimizer by coarse scan plus golden-section
/// refinement. Deterministic; only used to seed the minorant fit.
fn approx_minimizer(dim: usize, eval: &dyn Fn(&Point) -> f64) -> Point {
    const EXTENT: f64 = 20.0;
    match dim {
        1 => {
            let (x, _) = numerics::golden_max(|t| -eval(&[t, 0.0]), -EXTENT, EXTENT, 1e-6);
            [x, 0.0]
        }
        _ => {
            let n = 41;
            let mut best = [0.0, 0.0];
            let mut best_val = f64::INFINITY;
            for i in 0..n {
                for j in 0..n {
                    let p = [
                        -EXTENT + 2.0 * EXTENT * i as f64 / (n - 1) as f64,
                        -EXTENT + 2.0 * EXTENT * j as f64 / (n - 1) as f64,
                    ];
                    let v = eval(&p);
                    if v < best_val {
                        best_val = v;
                        best = p;
                    }
                }
            }
            for _ in 0..3 {
                for c in 0..2 {
                    let (x, _) = numerics::golden_max(
                        |t| {
                            let mut p = best;
                            p[c] = t;
                            -eval(&p)
                        },
                        best[c] - 2.0,
                        best[c] + 2.0,
                        1e-6,
                    );
                    best[c] = x;
                }
            }
            best
        }
    }
}

fn probe_directions(dim: usize, count: usize) -> Vec<Point> {
    match dim {
        1 => vec![[1.0, 0.0], [-1.0, 0.0]],
        _ => (0..count)
            .map(|i| geom::unit(2.0 * std::f64::consts::PI * i as f64 / count as f64))
            .collect(),
    }
}

fn fit_minorant_raw(dim: usize, eval: &dyn Fn(&Point) -> f64) -> Result<Minorant> {
    let xmin = approx_minimizer(dim, eval);
    let probe_radius = 8.0 * (geom::norm(dim, &xmin) + 1.0);
    let at_origin = eval(&[0.0, 0.0]);
    let dirs = probe_directions(dim, 64);

    let mut gamma = f64::INFINITY;
    for u in &dirs {
        let s = (eval(&geom::scale(probe_radius, u)) - at_origin) / (2.0 * probe_radius);
        gamma = gamma.min(s);
    }
    if gamma <= 0.0 {
        return Err(Error::NotCoercive { gamma });
    }
    // Growth check: the chord slope on [R, 4R] must not drop below γ. For a
    // convex coercive function it never does; sublinear growth fails here.
    for u in &dirs {
        let near = eval(&geom::scale(probe_radius, u));
        let far = eval(&geom::scale(4.0 * probe_radius, u));
        if (far - near) / (3.0 * probe_radius) < gamma - 1e-12 * (1.0 + gamma) {
            return Err(Error::NotCoercive { gamma: 0.0 });
        }
    }
    let mut beta = f64::INFINITY;
    let radial_steps = 64;
    for u in &dirs {
        for j in 0..=radial_steps {
            let r = 2.0 * probe_radius * j as f64 / radial_steps as f64;
            let p = geom::scale(r, u);
            beta = beta.min(eval(&p) - gamma * r);
        }
    }
    beta = beta.min(eval(&xmin) - gamma * geom::norm(dim, &xmin));
    // Denser validation pass; any violation lowers β to keep the bound valid
    // on everything sampled.
    let dense = probe_directions(dim, 128);
    for u in &dense {
        for j in 0..=128 {
            let r = 2.0 * probe_radius * j as f64 / 128.0;
            let p = geom::scale(r, u);
            beta = beta.min(eval(&p) - gamma * r);
        }
    }
    Ok(Minorant { gamma, beta })
}

/// Fit a coercive minorant for ψ. Exposed for direct use; constructors run
/// the same fit.
pub fn fit_coercive_minorant(psi: &ConvexFunction) -> Result<Minorant> {
    fit_minorant_raw(psi.dim, &*psi.eval)
}

/// Analytic bound on ∫_{‖x‖>R} e^{-ψ} from the minorant.
pub fn density_tail_bound(psi: &ConvexFunction, radius: f64) -> f64 {
    let Minorant { gamma, beta } = psi.minorant;
    let g = gamma.max(1e-12);
    match psi.dim {
        1 => 2.0 * (-beta).exp() * (-g * radius).exp() / g,
        _ => {
            2.0 * std::f64::consts::PI
                * (-beta).exp()
                * (-g * radius).exp()
                * (radius / g + 1.0 / (g * g))
        }
    }
}

/// Smallest truncation radius whose analytic tail bound is below `tol`,
/// found by doubling then bisection refinement.
pub fn truncation_radius(psi: &ConvexFunction, tol: f64) -> f64 {
    let mut hi = 1.0;
    while density_tail_bound(psi, hi) > tol && hi < 1e6 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if density_tail_bound(psi, mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Quadrature spec whose truncation radius certifies a density tail below
/// `abs_tol / 10`.
pub fn auto_quadrature_spec(psi: &ConvexFunction, abs_tol: f64, rel_tol: f64) -> QuadratureSpec {
    QuadratureSpec {
        dimension: psi.dim,
        abs_tol,
        rel_tol,
        max_subdivisions: 20000,
        truncation_radius: truncation_radius(psi, abs_tol / 10.0),
    }
}

fn truncated_region(psi: &ConvexFunction, spec: &QuadratureSpec) -> Region {
    match psi.dim {
        1 => Region::Interval { lo: -spec.truncation_radius, hi: spec.truncation_radius },
        _ => Region::Ball { center: [0.0, 0.0], radius: spec.truncation_radius },
    }
}

/// ∫ e^{-ψ} over the truncation ball, with the certified tail bound added to
/// the reported error.
pub fn integral_of_density(psi: &ConvexFunction, spec: &QuadratureSpec) -> Result<Estimate> {
    let est = numerics::integrate(|x| (-psi.value(x)).exp(), truncated_region(psi, spec), spec)?;
    let tail = density_tail_bound(psi, spec.truncation_radius);
    Ok(Estimate { value: est.value, error: est.error + tail })
}

/// ∫ e^{-ψ} (1 + ‖∇ψ‖²)^{1/2}.
pub fn gradient_weighted_integral(psi: &ConvexFunction, spec: &QuadratureSpec) -> Result<Estimate> {
    let est = numerics::integrate(
        |x| {
            let g = psi.gradient(x);
            (-psi.value(x)).exp() * (1.0 + geom::dot(psi.dim, &g, &g)).sqrt()
        },
        truncated_region(psi, spec),
        spec,
    )?;
    // Tail estimate: density tail inflated by the gradient magnitude seen at
    // the truncation sphere.
    let r = spec.truncation_radius;
    let mut gmax: f64 = 0.0;
    for u in probe_directions(psi.dim, 32) {
        let g = psi.gradient(&geom::scale(r, &u));
        gmax = gmax.max(geom::norm(psi.dim, &g));
    }
    let tail = density_tail_bound(psi, r) * 2.0 * (1.0 + gmax);
    Ok(Estimate { value: est.value, error: est.error + tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn parabola_half() -> ConvexFunction {
        quadratic_form(Mat::new1(0.5), 0.0).unwrap()
    }

    #[test]
    fn quadratic_identity_1d() {
        let f = quadratic_form(Mat::new1(1.0), 0.0).unwrap();
        assert_abs_diff_eq!(f.value(&[2.0, 0.0]), 4.0);
    }

    #[test]
    fn gauge_unit_disk_is_half_square() {
        let f = gauge_square_half(Body::Ellipse { rx: 1.0, ry: 1.0 }).unwrap();
        assert_abs_diff_eq!(f.value(&[3.0, 4.0]), 12.5, epsilon = 1e-12);
        let h = f.hessian(&[0.7, -0.3]);
        assert_abs_diff_eq!(h.m[0][0], 1.0);
        assert_abs_diff_eq!(h.m[1][1], 1.0);
        assert_abs_diff_eq!(h.m[0][1], 0.0);
    }

    #[test]
    fn max_branches() {
        let f = max_of(vec![
            quadratic_form(Mat::new1(1.0), 0.0).unwrap(),
            power_norm(1, 1.0, 1.0).unwrap(), // |x| stands in for the -x branch check below
        ])
        .unwrap();
        // at x = -0.5: max(0.25, 0.5) = 0.5
        assert_abs_diff_eq!(f.value(&[-0.5, 0.0]), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn minorant_parabola_half() {
        let f = parabola_half();
        let m = f.minorant();
        assert!(m.gamma > 0.0);
        // x²/2 ≥ γ|x| - γ²/2 is the tight completion of the square
        assert!(m.beta <= -m.gamma * m.gamma / 2.0 + 1e-9);
        assert!(f.spot_check_minorant(500, 7, 32.0));
    }

    #[test]
    fn minorant_abs() {
        let f = power_norm(1, 1.0, 1.0).unwrap();
        let m = f.minorant();
        assert!(m.gamma > 0.0 && m.gamma <= 1.0 + 1e-12);
        assert!(m.beta <= 1e-12);
    }

    #[test]
    fn log_growth_rejected() {
        let eval: EvalFn = Arc::new(|x: &Point| (1.0 + x[0] * x[0]).ln());
        let res = ConvexFunction::from_parts(1, eval, None, None);
        assert!(matches!(res, Err(Error::NotCoercive { .. })));
    }

    #[test]
    fn truncation_radius_gaussian() {
        let f = parabola_half();
        let r10 = truncation_radius(&f, 1e-10);
        assert!(r10 <= 16.0, "R = {r10}");
        let r3 = truncation_radius(&f, 1e-3);
        assert!(r3 < r10);
    }

    #[test]
    fn truncation_radius_linear_minorant() {
        // γ = 1, β = 0 ⇒ solve 2 e^{-R} = e^{-20}, R = 20 + ln 2
        let psi = ConvexFunction {
            dim: 1,
            eval: Arc::new(|x: &Point| x[0].abs()),
            grad: None,
            hess: None,
            minorant: Minorant { gamma: 1.0, beta: 0.0 },
            affine_det: 1.0,
        };
        let r = truncation_radius(&psi, (-20.0f64).exp());
        assert!((r - (20.0 + 2.0f64.ln())).abs() < 0.1, "R = {r}");
    }

    #[test]
    fn density_integral_1d() {
        let f = parabola_half();
        let spec = auto_quadrature_spec(&f, 1e-9, 1e-9);
        let est = integral_of_density(&f, &spec).unwrap();
        assert_abs_diff_eq!(est.value, (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-5);

        let g = quadratic_form(Mat::new1(1.0), 0.0).unwrap();
        let spec = auto_quadrature_spec(&g, 1e-9, 1e-9);
        let est = integral_of_density(&g, &spec).unwrap();
        assert_abs_diff_eq!(est.value, std::f64::consts::PI.sqrt(), epsilon = 1e-5);
    }

    #[test]
    fn density_integral_2d() {
        let f = gauge_square_half(Body::Ellipse { rx: 1.0, ry: 1.0 }).unwrap();
        let spec = auto_quadrature_spec(&f, 1e-7, 1e-7);
        let est = integral_of_density(&f, &spec).unwrap();
        assert_abs_diff_eq!(est.value, 2.0 * std::f64::consts::PI, epsilon = 1e-4);
    }

    #[test]
    fn gradient_weighted_dominates_density() {
        let f = parabola_half();
        let spec = auto_quadrature_spec(&f, 1e-9, 1e-9);
        let d = integral_of_density(&f, &spec).unwrap();
        let g = gradient_weighted_integral(&f, &spec).unwrap();
        assert!(g.value >= d.value - 1e-9);
    }

    #[test]
    fn affine_precompose_unimodular_invariance() {
        let f = gauge_square_half(Body::Ellipse { rx: 1.0, ry: 1.0 }).unwrap();
        let a = Mat::new2(2.0, 0.3, 0.0, 0.5); // det 1
        let g = precompose_affine(&f, a, [0.1, -0.2]).unwrap();
        assert_abs_diff_eq!(g.affine_det(), 1.0, epsilon = 1e-12);
        let spec_f = auto_quadrature_spec(&f, 1e-7, 1e-7);
        let spec_g = auto_quadrature_spec(&g, 1e-7, 1e-7);
        let i_f = integral_of_density(&f, &spec_f).unwrap();
        let i_g = integral_of_density(&g, &spec_g).unwrap();
        assert!((i_f.value - i_g.value).abs() / i_f.value < 0.002);
    }

    #[test]
    fn piecewise_rejects_nonconvex() {
        assert!(piecewise_1d(&[0.0, 1.0, 2.0], &[0.0, 2.0, 2.5]).is_err());
        assert!(piecewise_1d(&[0.0, 1.0, 2.0], &[0.0, 1.0, 3.0]).is_ok());
    }

    #[test]
    fn catalog_convexity_spot_checks() {
        let fns = vec![
            parabola_half(),
            quadratic_form(Mat::new2(1.0, 0.25, 0.25, 0.75), 0.0).unwrap(),
            power_norm(1, 1.5, 1.0).unwrap(),
            gauge_square_half(Body::Ellipse { rx: 2.0, ry: 0.5 }).unwrap(),
            piecewise_1d(&[-1.0, 0.0, 1.0], &[1.0, 0.0, 1.5]).unwrap(),
        ];
        for (i, f) in fns.iter().enumerate() {
            assert!(f.spot_check_convexity(200, 42 + i as u64, 8.0), "function {i}");
        }
    }

    #[test]
    fn analytic_vs_fd_agreement() {
        use rand::{Rng, SeedableRng};
        let fns = vec![
            quadratic_form(Mat::new2(1.0, 0.25, 0.25, 0.75), 0.0).unwrap(),
            gauge_square_half(Body::Ellipse { rx: 2.0, ry: 0.5 }).unwrap(),
            power_norm(2, 2.0, 0.7).unwrap(),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for f in &fns {
            for _ in 0..50 {
                let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
                let ga = f.gradient(&x);
                let gf = numerics::fd_gradient(|p| f.value(p), f.dim(), &x, FD_GRADIENT_STEP);
                for c in 0..f.dim() {
                    let scale = 1.0 + ga[c].abs();
                    assert!((ga[c] - gf[c]).abs() / scale < 1e-5);
                }
                let ha = f.hessian(&x);
                let hf = numerics::fd_hessian(|p| f.value(p), f.dim(), &x, FD_HESSIAN_STEP);
                for i in 0..f.dim() {
                    for j in 0..f.dim() {
                        let scale = 1.0 + ha.m[i][j].abs();
                        assert!((ha.m[i][j] - hf.m[i][j]).abs() / scale < 1e-5);
                    }
                }
            }
        }
    }
}
