//! Geometry of the epigraph epi(ψ) ⊂ R^{n+1}: cap volumes below affine
//! cuts, curvature and normals of the graph, the rolling function, and
//! ellipsoid cap formulas.

use crate::convexfn::ConvexFunction;
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::numerics::{self, QuadratureSpec};

/// Non-vertical hyperplane y = <a, x> + b bounding the halfspace below it.
#[derive(Debug, Clone, Copy)]
pub struct HyperplaneCut {
    pub slope: Point,
    pub offset: f64,
}

/// Cap volume together with its derivative in the offset (the wet area) and
/// an internal error estimate.
#[derive(Debug, Clone, Copy)]
pub struct CapVolume {
    pub volume: f64,
    /// d(volume)/d(offset) = n-volume of the wet region {l > psi}.
    pub derivative: f64,
    pub error: f64,
}

/// Number of polar directions used for 2D wet regions.
const POLAR_ANGLES: usize = 32;

/// V(a, b) = ∫ max(0, <a,x> + b − ψ(x)) dx.
pub fn cap_volume(psi: &ConvexFunction, cut: &HyperplaneCut, spec: &QuadratureSpec) -> Result<CapVolume> {
    Ok(cap_volume_with_center(psi, cut, spec, None)?.0)
}

/// As [`cap_volume`], also returning the maximizer of the concave wet
/// profile g = l − ψ so repeated calls with the same slope can warm-start.
pub(crate) fn cap_volume_with_center(
    psi: &ConvexFunction,
    cut: &HyperplaneCut,
    spec: &QuadratureSpec,
    center_hint: Option<Point>,
) -> Result<(CapVolume, Point)> {
    match psi.dim() {
        1 => cap_volume_1d(psi, cut, spec),
        _ => cap_volume_2d(psi, cut, spec, center_hint),
    }
}

fn cap_volume_1d(
    psi: &ConvexFunction,
    cut: &HyperplaneCut,
    spec: &QuadratureSpec,
) -> Result<(CapVolume, Point)> {
    let a = cut.slope[0];
    let b = cut.offset;
    let g = |x: f64| a * x + b - psi.value(&[x, 0.0]);
    let r = spec.truncation_radius;
    let (xm, gm) = numerics::golden_max(g, -r, r, 1e-10 * r);
    if gm <= 0.0 {
        return Ok((CapVolume { volume: 0.0, derivative: 0.0, error: 0.0 }, [xm, 0.0]));
    }
    if g(-r) > 0.0 || g(r) > 0.0 {
        return Err(Error::Region(format!(
            "wet interval reaches the truncation radius {r} (offset {b})"
        )));
    }
    let xl = numerics::find_root_monotone(g, -r, xm, 1e-13 * r)?;
    let xr = numerics::find_root_monotone(g, xm, r, 1e-13 * r)?;
    let est = numerics::integrate_1d(
        |x| g(x).max(0.0),
        xl,
        xr,
        spec.abs_tol,
        spec.rel_tol,
        spec.max_subdivisions,
    )?;
    Ok((
        CapVolume { volume: est.value, derivative: xr - xl, error: est.error },
        [xm, 0.0],
    ))
}

/// Maximize the concave g(x) = <a,x> + b − ψ(x) in the plane: Newton on
/// ∇ψ = a with a coordinate-descent fallback.
fn wet_center(psi: &ConvexFunction, a: &Point, hint: Option<Point>) -> Point {
    let mut x = hint.unwrap_or([0.0, 0.0]);
    let target = 1e-10 * (1.0 + geom::norm(2, a));
    for _ in 0..60 {
        let grad = geom::sub(&psi.gradient(&x), a);
        if geom::norm(2, &grad) < target {
            return x;
        }
        let h = psi.hessian(&x);
        let step = match h.inverse() {
            Some(inv) if h.det().abs() > 1e-12 => inv.apply(&grad),
            _ => break,
        };
        let len = geom::norm(2, &step);
        let capped = if len > 4.0 { geom::scale(4.0 / len, &step) } else { step };
        let next = geom::sub(&x, &capped);
        // Backtrack if the objective got worse (g decreased means ψ − <a,·> increased).
        let obj = |p: &Point| psi.value(p) - geom::dot(2, a, p);
        if obj(&next) <= obj(&x) + 1e-14 {
            x = next;
        } else {
            x = geom::sub(&x, &geom::scale(0.25, &capped));
        }
    }
    // Fallback: shrinking coordinate golden-section sweeps.
    let g = |p: &Point| geom::dot(2, a, p) - psi.value(p);
    let mut width = 8.0;
    for _ in 0..14 {
        for c in 0..2 {
            let (t, _) = numerics::golden_max(
                |s| {
                    let mut p = x;
                    p[c] = s;
                    g(&p)
                },
                x[c] - width,
                x[c] + width,
                1e-10 * width.max(1.0),
            );
            x[c] = t;
        }
        width *= 0.5;
    }
    x
}

fn cap_volume_2d(
    psi: &ConvexFunction,
    cut: &HyperplaneCut,
    spec: &QuadratureSpec,
    center_hint: Option<Point>,
) -> Result<(CapVolume, Point)> {
    let a = cut.slope;
    let b = cut.offset;
    let g = |p: &Point| geom::dot(2, &a, p) + b - psi.value(p);
    let center = wet_center(psi, &a, center_hint);
    let g0 = g(&center);
    if g0 <= 0.0 {
        return Ok((CapVolume { volume: 0.0, derivative: 0.0, error: 0.0 }, center));
    }
    let r_trunc = spec.truncation_radius;
    if geom::norm(2, &center) > r_trunc {
        return Err(Error::Region("wet center outside the truncation ball".into()));
    }

    let k = POLAR_ANGLES;
    let mut radial = [0.0f64; POLAR_ANGLES];
    let mut slices = [0.0f64; POLAR_ANGLES];
    let mut err_sum = 0.0;
    for (j, (rj, sj)) in radial.iter_mut().zip(slices.iter_mut()).enumerate() {
        let u = geom::unit(2.0 * std::f64::consts::PI * j as f64 / k as f64);
        let along = |r: f64| g(&geom::add(&center, &geom::scale(r, &u)));
        // Doubling search for a sign change along the ray; g is nonincreasing
        // along rays from its maximizer by concavity.
        let mut hi = 0.25;
        loop {
            let p = geom::add(&center, &geom::scale(hi, &u));
            if geom::norm(2, &p) > r_trunc {
                return Err(Error::Region(format!(
                    "wet region reaches the truncation ball along angle index {j}"
                )));
            }
            if along(hi) <= 0.0 {
                break;
            }
            hi *= 2.0;
        }
        let mut lo = 0.0;
        let mut h = hi;
        for _ in 0..52 {
            let mid = 0.5 * (lo + h);
            if along(mid) > 0.0 {
                lo = mid;
            } else {
                h = mid;
            }
        }
        let boundary = 0.5 * (lo + h);
        *rj = boundary;
        let (v1, e1) = gk15_fixed(&|r| along(r).max(0.0) * r, 0.0, 0.5 * boundary);
        let (v2, e2) = gk15_fixed(&|r| along(r).max(0.0) * r, 0.5 * boundary, boundary);
        *sj = v1 + v2;
        err_sum += e1 + e2;
    }
    let w = 2.0 * std::f64::consts::PI / k as f64;
    let volume: f64 = w * slices.iter().sum::<f64>();
    let half: f64 = 2.0 * w * slices.iter().step_by(2).sum::<f64>();
    let derivative = w * radial.iter().map(|r| 0.5 * r * r).sum::<f64>();
    let error = w * err_sum + (volume - half).abs();
    Ok((CapVolume { volume, derivative, error }, center))
}

/// Single fixed Gauss–Kronrod panel (value, error estimate).
fn gk15_fixed(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (x, wk, wg) = numerics::gk15_nodes();
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

/// Axis-aligned ellipsoid { Σ (x_i / a_i)² ≤ 1 } in R^m.
#[derive(Debug, Clone)]
pub struct EllipsoidSpec {
    pub axes: Vec<f64>,
}

impl EllipsoidSpec {
    pub fn new(axes: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::Construction("ellipsoid needs positive semi-axes".into()));
        }
        Ok(EllipsoidSpec { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }
}

/// Exact volume of the cap of height `h` cut perpendicular to the last axis,
/// by 1D quadrature of the slice volumes.
pub fn ellipsoid_cap_volume(e: &EllipsoidSpec, h: f64) -> Result<f64> {
    let m = e.dim();
    let am = e.axes[m - 1];
    if !(0.0..=am).contains(&h) {
        return Err(Error::Domain(format!("cap height {h} outside [0, {am}]")));
    }
    let cross: f64 = e.axes[..m - 1].iter().product::<f64>() * geom::unit_ball_volume(m - 1);
    if m == 1 {
        return Ok(h.min(2.0 * am));
    }
    let p = (m - 1) as f64 / 2.0;
    let est = numerics::integrate_1d(
        |t| cross * (1.0 - (t / am).powi(2)).max(0.0).powf(p),
        am - h,
        am,
        1e-12,
        1e-12,
        2000,
    )?;
    Ok(est.value)
}

/// Sandwich bounds for the ellipsoid cap volume:
/// upper = 2^{(m+1)/2} vol_{m−1}(B^{m−1}) (∏_{i<m} a_i) a_m^{−(m−1)/2} h^{(m+1)/2}/(m+1),
/// lower = upper · (1 − h/(2 a_m))^{(m−1)/2}.
pub fn ellipsoid_cap_bounds(e: &EllipsoidSpec, h: f64) -> Result<(f64, f64)> {
    let m = e.dim();
    let am = e.axes[m - 1];
    if !(0.0..=am).contains(&h) {
        return Err(Error::Domain(format!("cap height {h} outside [0, {am}]")));
    }
    let prod: f64 = e.axes[..m - 1].iter().product();
    let mf = m as f64;
    let upper = 2.0f64.powf((mf + 1.0) / 2.0)
        * geom::unit_ball_volume(m - 1)
        * prod
        * am.powf(-(mf - 1.0) / 2.0)
        * h.powf((mf + 1.0) / 2.0)
        / (mf + 1.0);
    let lower = upper * (1.0 - h / (2.0 * am)).powf((mf - 1.0) / 2.0);
    Ok((lower, upper))
}

/// Determinant of the Hessian with the convexity clamp applied: tiny
/// finite-difference negatives become 0, larger ones are an error.
pub fn hessian_det_clamped(psi: &ConvexFunction, x: &Point) -> Result<f64> {
    let det = psi.hessian(x).det();
    if det >= 0.0 {
        Ok(det)
    } else if det >= -1e-10 {
        Ok(0.0)
    } else {
        Err(Error::ConvexityViolation { det, x: x[0], y: x[1] })
    }
}

/// Gauss curvature of the graph of ψ at (x, ψ(x)):
/// κ = det ∇²ψ / (1 + ‖∇ψ‖²)^{(n+2)/2}.
pub fn graph_curvature(psi: &ConvexFunction, x: &Point) -> Result<f64> {
    let det = hessian_det_clamped(psi, x)?;
    let g = psi.gradient(x);
    let n = psi.dim() as f64;
    Ok(det / (1.0 + geom::dot(psi.dim(), &g, &g)).powf((n + 2.0) / 2.0))
}

/// Vertical component of the outer unit normal: (1 + ‖∇ψ‖²)^{−1/2}.
pub fn graph_normal_component(psi: &ConvexFunction, x: &Point) -> f64 {
    let g = psi.gradient(x);
    1.0 / (1.0 + geom::dot(psi.dim(), &g, &g)).sqrt()
}

/// One-sided slope test for a unique normal at x; kinks return false.
fn differentiable_at(psi: &ConvexFunction, x: &Point) -> bool {
    let h = 1e-6;
    let v0 = psi.value(x);
    for c in 0..psi.dim() {
        let mut xp = *x;
        let mut xm = *x;
        xp[c] += h;
        xm[c] -= h;
        let right = (psi.value(&xp) - v0) / h;
        let left = (v0 - psi.value(&xm)) / h;
        if (right - left).abs() > 1e-3 * (1.0 + right.abs().max(left.abs())) {
            return false;
        }
    }
    true
}

/// Feasibility of a ball of radius rho touching the graph at (x, ψ(x)) from
/// inside the epigraph, checked on a deterministic sample of the projected
/// disk.
fn ball_fits(psi: &ConvexFunction, x: &Point, grad: &Point, rho: f64) -> bool {
    let dim = psi.dim();
    let denom = (1.0 + geom::dot(dim, grad, grad)).sqrt();
    let cx = geom::sub(x, &geom::scale(rho / denom, grad));
    let cy = psi.value(x) + rho / denom;
    let lower = |p: &Point| {
        let d2 = {
            let d = geom::sub(p, &cx);
            geom::dot(dim, &d, &d)
        };
        cy - (rho * rho - d2).max(0.0).sqrt()
    };
    let slack = 1e-12 * (1.0 + rho);
    match dim {
        1 => {
            let nodes = 257;
            for i in 0..nodes {
                let t = -1.0 + 2.0 * i as f64 / (nodes - 1) as f64;
                let p = [cx[0] + 0.999_999 * rho * t, 0.0];
                if psi.value(&p) > lower(&p) + slack {
                    return false;
                }
            }
            true
        }
        _ => {
            let (nr, na) = (33, 33);
            for i in 1..=nr {
                let r = 0.999_999 * rho * i as f64 / nr as f64;
                for j in 0..na {
                    let u = geom::unit(2.0 * std::f64::consts::PI * j as f64 / na as f64);
                    let p = geom::add(&cx, &geom::scale(r, &u));
                    if psi.value(&p) > lower(&p) + slack {
                        return false;
                    }
                }
            }
            true
        }
    }
}

/// Radius of the largest ball inside epi(ψ) touching the graph at
/// (x, ψ(x)); 0 where the normal is not unique.
pub fn rolling_function(psi: &ConvexFunction, x: &Point, tol: f64) -> f64 {
    if !differentiable_at(psi, x) {
        return 0.0;
    }
    let grad = psi.gradient(x);
    let mut lo = 0.0f64;
    let mut hi = tol.max(1e-6);
    // Doubling until infeasible; huge radii are reported as-is.
    while ball_fits(psi, x, &grad, hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return hi;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ball_fits(psi, x, &grad, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Result of [`rolling_weighted_integral`]: the integral over nodes with
/// rolling radius above the floor, plus the reported (not silently dropped)
/// contribution of skipped nodes evaluated at the floor radius.
#[derive(Debug, Clone, Copy)]
pub struct RollingIntegral {
    pub value: f64,
    pub error: f64,
    pub skipped_contribution: f64,
}

const ROLLING_FLOOR: f64 = 1e-4;

/// ∫ (1 + ‖∇ψ‖²)^{1/2} r_ψ(x)^{−α} e^{−ψ} dx on a fixed composite grid.
pub fn rolling_weighted_integral(
    psi: &ConvexFunction,
    alpha: f64,
    spec: &QuadratureSpec,
) -> Result<RollingIntegral> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("rolling exponent must be in [0, 1), got {alpha}")));
    }
    let dim = psi.dim();
    let integrand = |p: &Point, r: f64| {
        let g = psi.gradient(p);
        (1.0 + geom::dot(dim, &g, &g)).sqrt() * r.powf(-alpha) * (-psi.value(p)).exp()
    };
    let rtol = 1e-3;
    match dim {
        1 => {
            let extent = spec.truncation_radius.min(8.0);
            let n = 161; // odd, Simpson
            let hstep = 2.0 * extent / (n - 1) as f64;
            let mut value = 0.0;
            let mut coarse = 0.0;
            let mut skipped = 0.0;
            for i in 0..n {
                let p = [-extent + hstep * i as f64, 0.0];
                let w = simpson_weight(i, n) * hstep;
                let r = rolling_function(psi, &p, rtol);
                if r < ROLLING_FLOOR {
                    skipped += w * integrand(&p, ROLLING_FLOOR);
                    continue;
                }
                let v = w * integrand(&p, r);
                value += v;
                if i % 2 == 0 {
                    coarse += 2.0 * v;
                }
            }
            let tail = crate::convexfn::density_tail_bound(psi, extent);
            Ok(RollingIntegral {
                value,
                error: (value - coarse).abs() + tail * ROLLING_FLOOR.powf(-alpha),
                skipped_contribution: skipped,
            })
        }
        _ => {
            let extent = spec.truncation_radius.min(4.5);
            let n = 25;
            let hstep = 2.0 * extent / (n - 1) as f64;
            let mut value = 0.0;
            let mut skipped = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let p = [-extent + hstep * i as f64, -extent + hstep * j as f64];
                    let w = simpson_weight(i, n) * simpson_weight(j, n) * hstep * hstep;
                    let r = rolling_function(psi, &p, rtol);
                    if r < ROLLING_FLOOR {
                        skipped += w * integrand(&p, ROLLING_FLOOR);
                        continue;
                    }
                    value += w * integrand(&p, r);
                }
            }
            let tail = crate::convexfn::density_tail_bound(psi, extent);
            Ok(RollingIntegral {
                value,
                error: 0.05 * value + tail * ROLLING_FLOOR.powf(-alpha),
                skipped_contribution: skipped,
            })
        }
    }
}

fn simpson_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n - 1 {
        1.0 / 3.0
    } else if i % 2 == 1 {
        4.0 / 3.0
    } else {
        2.0 / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexfn;
    use crate::geom::Mat;
    use approx::assert_abs_diff_eq;

    fn parabola_half() -> ConvexFunction {
        convexfn::quadratic_form(Mat::new1(0.5), 0.0).unwrap()
    }

    fn paraboloid_half() -> ConvexFunction {
        convexfn::quadratic_form(Mat::new2(0.5, 0.0, 0.0, 0.5), 0.0).unwrap()
    }

    fn spec_for(psi: &ConvexFunction) -> QuadratureSpec {
        convexfn::auto_quadrature_spec(psi, 1e-10, 1e-10)
    }

    #[test]
    fn cap_parabola_flat() {
        let psi = parabola_half();
        let spec = spec_for(&psi);
        let cut = HyperplaneCut { slope: [0.0, 0.0], offset: 0.5 };
        let cv = cap_volume(&psi, &cut, &spec).unwrap();
        // (2/3)(2t)^{3/2} at t = 0.5
        assert_abs_diff_eq!(cv.volume, 2.0 / 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(cv.derivative, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn cap_parabola_tilted_depends_on_shifted_offset() {
        let psi = parabola_half();
        let spec = spec_for(&psi);
        let cut = HyperplaneCut { slope: [1.0, 0.0], offset: 0.0 };
        let cv = cap_volume(&psi, &cut, &spec).unwrap();
        // volume depends only on b + a²/2 = 0.5
        assert_abs_diff_eq!(cv.volume, 2.0 / 3.0, epsilon = 1e-8);
    }

    #[test]
    fn cap_dry_is_zero() {
        let psi = parabola_half();
        let spec = spec_for(&psi);
        let cut = HyperplaneCut { slope: [0.0, 0.0], offset: -1.0 };
        let cv = cap_volume(&psi, &cut, &spec).unwrap();
        assert_eq!(cv.volume, 0.0);
    }

    #[test]
    fn cap_region_error_when_offset_huge() {
        let psi = parabola_half();
        let mut spec = spec_for(&psi);
        spec.truncation_radius = 2.0;
        let cut = HyperplaneCut { slope: [0.0, 0.0], offset: 10.0 };
        assert!(matches!(cap_volume(&psi, &cut, &spec), Err(Error::Region(_))));
    }

    #[test]
    fn cap_paraboloid_2d() {
        let psi = paraboloid_half();
        let spec = spec_for(&psi);
        // V = π t² for ψ = ‖x‖²/2 with t = b + ‖a‖²/2
        let cut = HyperplaneCut { slope: [0.0, 0.0], offset: 0.2 };
        let cv = cap_volume(&psi, &cut, &spec).unwrap();
        assert_abs_diff_eq!(cv.volume, std::f64::consts::PI * 0.04, epsilon = 1e-7);
        assert_abs_diff_eq!(cv.derivative, std::f64::consts::PI * 0.4, epsilon = 1e-6);

        let tilted = HyperplaneCut { slope: [0.3, -0.4], offset: 0.2 - 0.125 };
        let cv2 = cap_volume(&psi, &tilted, &spec).unwrap();
        assert_abs_diff_eq!(cv2.volume, cv.volume, epsilon = 1e-7);
    }

    #[test]
    fn ellipsoid_disk_cap() {
        let disk = EllipsoidSpec::new(vec![1.0, 1.0]).unwrap();
        let exact = ellipsoid_cap_volume(&disk, 0.1).unwrap();
        let oracle = 0.9f64.acos() - 0.9 * (0.19f64).sqrt();
        assert_abs_diff_eq!(exact, oracle, epsilon = 1e-9);
        let half = ellipsoid_cap_volume(&disk, 1.0).unwrap();
        assert_abs_diff_eq!(half, std::f64::consts::PI / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn ellipsoid_disk_cap_sandwich() {
        let disk = EllipsoidSpec::new(vec![1.0, 1.0]).unwrap();
        let exact = ellipsoid_cap_volume(&disk, 0.1).unwrap();
        let (lower, upper) = ellipsoid_cap_bounds(&disk, 0.1).unwrap();
        assert!(lower <= exact && exact <= upper, "{lower} {exact} {upper}");
        assert_abs_diff_eq!(upper, 0.059629, epsilon = 1e-5);
    }

    #[test]
    fn ellipsoid_domain_errors() {
        let disk = EllipsoidSpec::new(vec![1.0, 1.0]).unwrap();
        assert!(ellipsoid_cap_volume(&disk, 1.5).is_err());
        assert!(ellipsoid_cap_bounds(&disk, -0.1).is_err());
    }

    #[test]
    fn curvature_parabola() {
        let psi = parabola_half();
        assert_abs_diff_eq!(graph_curvature(&psi, &[0.0, 0.0]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(graph_normal_component(&psi, &[0.0, 0.0]), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            graph_curvature(&psi, &[1.0, 0.0]).unwrap(),
            2.0f64.powf(-1.5),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            graph_normal_component(&psi, &[1.0, 0.0]),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn curvature_paraboloid_radial() {
        let psi = paraboloid_half();
        let x = [0.6, -0.8]; // ‖x‖ = 1
        assert_abs_diff_eq!(graph_curvature(&psi, &x).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn rolling_parabola_half_at_origin() {
        let psi = parabola_half();
        let r = rolling_function(&psi, &[0.0, 0.0], 1e-4);
        assert_abs_diff_eq!(r, 1.0, epsilon = 5e-3);
    }

    #[test]
    fn rolling_steep_parabola() {
        let psi = convexfn::quadratic_form(Mat::new1(1.0), 0.0).unwrap();
        let r = rolling_function(&psi, &[0.0, 0.0], 1e-4);
        assert_abs_diff_eq!(r, 0.5, epsilon = 5e-3);
    }

    #[test]
    fn rolling_zero_at_kink() {
        // max(x², -x) has a kink at x = 0
        let psi = convexfn::max_of(vec![
            convexfn::quadratic_form(Mat::new1(1.0), 0.0).unwrap(),
            crate::parser::parse("affine(pownorm(1,1); 1; 0)").unwrap(),
        ])
        .unwrap();
        assert_eq!(rolling_function(&psi, &[0.0, 0.0], 1e-4), 0.0);
    }

    #[test]
    fn rolling_bound_by_curvature() {
        let psi = parabola_half();
        for &t in &[0.0, 0.5, 1.0, 1.7] {
            let x = [t, 0.0];
            let r = rolling_function(&psi, &x, 1e-4);
            let det = psi.hessian(&x).det();
            let g = psi.gradient(&x);
            let n = 1.0;
            let bound = (1.0 + geom::dot(1, &g, &g)).powf((n + 2.0) / (2.0 * n)) / det.powf(1.0 / n);
            assert!(r <= bound + 1e-2, "r = {r}, bound = {bound} at {t}");
        }
    }

    #[test]
    fn rolling_integral_alpha_zero_matches_gradient_weighted() {
        let psi = parabola_half();
        let spec = convexfn::auto_quadrature_spec(&psi, 1e-9, 1e-9);
        let ri = rolling_weighted_integral(&psi, 0.0, &spec).unwrap();
        let gw = convexfn::gradient_weighted_integral(&psi, &spec).unwrap();
        assert_abs_diff_eq!(ri.value + ri.skipped_contribution, gw.value, epsilon = 1e-3);
    }

    #[test]
    fn rolling_integral_finite_and_pointwise_monotone() {
        let psi = parabola_half();
        let spec = convexfn::auto_quadrature_spec(&psi, 1e-9, 1e-9);
        let a = rolling_weighted_integral(&psi, 1.0 / 3.0, &spec).unwrap();
        let b = rolling_weighted_integral(&psi, 2.0 / 3.0, &spec).unwrap();
        assert!(a.value.is_finite() && b.value.is_finite());
        // Node-wise: where r ≤ 1 the larger exponent weights more, where
        // r ≥ 1 less; check the pointwise direction directly.
        for &t in &[0.0, 0.3, 1.0, 2.5] {
            let r = rolling_function(&psi, &[t, 0.0], 1e-3);
            let (lo, hi) = (r.powf(-1.0 / 3.0), r.powf(-2.0 / 3.0));
            if r <= 1.0 {
                assert!(hi >= lo - 1e-12);
            } else {
                assert!(hi <= lo + 1e-12);
            }
        }
    }

    #[test]
    fn rolling_integral_rejects_alpha_one() {
        let psi = parabola_half();
        let spec = convexfn::auto_quadrature_spec(&psi, 1e-9, 1e-9);
        assert!(matches!(
            rolling_weighted_integral(&psi, 1.0, &spec),
            Err(Error::Domain(_))
        ));
    }
}
