//! Affine surface area of log-concave functions f = e^{−ψ} and its
//! algebraic properties: affine invariance, the valuation identity, the
//! isoperimetric inequality, and the gauge relation to the L_p affine
//! surface area of planar bodies.

use std::cell::Cell;

use crate::convexfn::{self, ConvexFunction};
use crate::error::{Error, Result};
use crate::geom::{self, Mat, Point};
use crate::numerics::{self, Estimate, QuadratureSpec, Region};
use crate::report::CheckReport;

fn truncated_region(dim: usize, spec: &QuadratureSpec) -> Region {
    match dim {
        1 => Region::Interval { lo: -spec.truncation_radius, hi: spec.truncation_radius },
        _ => Region::Ball { center: [0.0, 0.0], radius: spec.truncation_radius },
    }
}

fn det_power(dim: usize, det: f64) -> f64 {
    det.max(0.0).powf(1.0 / (dim as f64 + 2.0))
}

/// as(f) = ∫ (det ∇²ψ)^{1/(n+2)} e^{−ψ} dx.
pub fn asa(psi: &ConvexFunction, spec: &QuadratureSpec) -> Result<Estimate> {
    let dim = psi.dim();
    let worst_det = Cell::new(0.0f64);
    let est = numerics::integrate(
        |x| {
            let det = psi.hessian(x).det();
            if det < worst_det.get() {
                worst_det.set(det);
            }
            det_power(dim, det) * (-psi.value(x)).exp()
        },
        truncated_region(dim, spec),
        spec,
    )?;
    let worst = worst_det.get();
    if worst < -1e-10 {
        return Err(Error::ConvexityViolation { det: worst, x: f64::NAN, y: f64::NAN });
    }
    let tail = tail_with_det(psi, spec);
    Ok(Estimate { value: est.value, error: est.error + tail })
}

/// The alternative functional: ∫ e^{−(n/(n+2))ψ − (1/(n+2))<x,∇ψ>}
/// (det ∇²ψ)^{1/(n+2)} dx. Coincides with [`asa`] for 2-homogeneous ψ.
pub fn asa_alternative(psi: &ConvexFunction, spec: &QuadratureSpec) -> Result<Estimate> {
    let dim = psi.dim();
    let n = dim as f64;
    let est = numerics::integrate(
        |x| {
            let det = psi.hessian(x).det();
            let g = psi.gradient(x);
            let w = -(n / (n + 2.0)) * psi.value(x) - geom::dot(dim, x, &g) / (n + 2.0);
            det_power(dim, det) * w.exp()
        },
        truncated_region(dim, spec),
        spec,
    )?;
    let tail = tail_with_det(psi, spec);
    Ok(Estimate { value: est.value, error: est.error + tail })
}

/// Density tail bound inflated by the Hessian-determinant weight sampled on
/// the truncation sphere.
fn tail_with_det(psi: &ConvexFunction, spec: &QuadratureSpec) -> f64 {
    let dim = psi.dim();
    let r = spec.truncation_radius;
    let dirs: Vec<Point> = match dim {
        1 => vec![[1.0, 0.0], [-1.0, 0.0]],
        _ => (0..16)
            .map(|i| geom::unit(2.0 * std::f64::consts::PI * i as f64 / 16.0))
            .collect(),
    };
    let mut wmax: f64 = 0.0;
    for u in &dirs {
        let det = psi.hessian(&geom::scale(r, u)).det();
        wmax = wmax.max(det_power(dim, det));
    }
    convexfn::density_tail_bound(psi, r) * (1.0 + wmax)
}

/// Smooth symmetric planar boundary: an ellipse with semi-axes (rx, ry)
/// rotated by `rot`, parametrized by θ ∈ [0, 2π).
#[derive(Debug, Clone, Copy)]
pub struct BodyBoundary2D {
    pub rx: f64,
    pub ry: f64,
    pub rot: f64,
}

impl BodyBoundary2D {
    pub fn ellipse(rx: f64, ry: f64) -> Result<Self> {
        if !(rx > 0.0) || !(ry > 0.0) {
            return Err(Error::Construction("ellipse semi-axes must be positive".into()));
        }
        Ok(BodyBoundary2D { rx, ry, rot: 0.0 })
    }

    pub fn disk(r: f64) -> Result<Self> {
        Self::ellipse(r, r)
    }

    pub fn rotated(mut self, phi: f64) -> Self {
        self.rot += phi;
        self
    }

    fn rotate(&self, p: Point) -> Point {
        let (c, s) = (self.rot.cos(), self.rot.sin());
        [c * p[0] - s * p[1], s * p[0] + c * p[1]]
    }

    pub fn point(&self, theta: f64) -> Point {
        self.rotate([self.rx * theta.cos(), self.ry * theta.sin()])
    }

    pub fn speed(&self, theta: f64) -> f64 {
        ((self.rx * theta.sin()).powi(2) + (self.ry * theta.cos()).powi(2)).sqrt()
    }

    pub fn curvature(&self, theta: f64) -> f64 {
        self.rx * self.ry / self.speed(theta).powi(3)
    }

    pub fn outer_normal(&self, theta: f64) -> Point {
        let raw = [self.ry * theta.cos(), self.rx * theta.sin()];
        let len = geom::norm(2, &raw);
        self.rotate(geom::scale(1.0 / len, &raw))
    }

    /// Support value <z(θ), N(θ)>, the distance of the tangent line from 0.
    pub fn support(&self, theta: f64) -> f64 {
        geom::dot(2, &self.point(theta), &self.outer_normal(theta))
    }
}

/// L_p affine surface area of a planar body (n = 2):
/// as_p(K) = ∫ κ^{p/(n+p)} <z, N>^{−n(p−1)/(n+p)} dμ.
pub fn asp_body(body: &BodyBoundary2D, p: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let n = 2.0;
    if (p + n).abs() < 1e-12 {
        return Err(Error::Domain("as_p is undefined at p = -n".into()));
    }
    numerics::integrate_1d(
        |theta| {
            body.curvature(theta).powf(p / (n + p))
                * body.support(theta).powf(-n * (p - 1.0) / (n + p))
                * body.speed(theta)
        },
        0.0,
        2.0 * std::f64::consts::PI,
        spec.abs_tol,
        spec.rel_tol,
        spec.max_subdivisions,
    )
}

fn auto(psi: &ConvexFunction) -> QuadratureSpec {
    convexfn::auto_quadrature_spec(psi, 1e-9, 1e-9)
}

/// Accept a budget-exhausted run whose carried error estimate is still far
/// below the check tolerances; integrands with curvature-degenerate lines
/// (det ∇²ψ = 0 on a measure-zero set) legitimately stall the subdivision
/// budget at high accuracy.
fn accept_tight(res: Result<Estimate>) -> Result<Estimate> {
    match res {
        Err(Error::Budget { estimate, error }) if error <= 1e-5 * (1.0 + estimate.abs()) => {
            Ok(Estimate { value: estimate, error })
        }
        other => other,
    }
}

/// [`asa`] with the budget-exhaustion fallback used by the check drivers.
pub fn asa_checked(psi: &ConvexFunction, spec: &QuadratureSpec) -> Result<Estimate> {
    accept_tight(asa(psi, spec))
}

/// as(f ∘ A) = |det A|^{−n/(n+2)} as(f).
pub fn check_affine_invariance(
    psi: &ConvexFunction,
    a: Mat,
    t: Point,
    tol: f64,
) -> Result<CheckReport> {
    let n = psi.dim() as f64;
    let composed = convexfn::precompose_affine(psi, a, t)?;
    let lhs = asa_checked(&composed, &auto(&composed))?.value;
    let base = asa_checked(psi, &auto(psi))?.value;
    let rhs = a.det().abs().powf(-n / (n + 2.0)) * base;
    Ok(CheckReport::relative("affine_invariance", lhs, rhs, tol)
        .note(format!("det A = {}, translation = ({}, {})", a.det(), t[0], t[1])))
}

/// Valuation identity: as(f₁) + as(f₂) = as(max(f₁,f₂)) + as(min(f₁,f₂)),
/// requiring min(ψ₁, ψ₂) to be convex.
pub fn check_valuation(psi1: &ConvexFunction, psi2: &ConvexFunction, tol: f64) -> Result<CheckReport> {
    let min_psi = convexfn::min_of_checked(psi1, psi2, 2024)?;
    let max_psi = convexfn::max_of(vec![psi1.clone(), psi2.clone()])?;
    let a1 = asa_checked(psi1, &auto(psi1))?.value;
    let a2 = asa_checked(psi2, &auto(psi2))?.value;
    let amax_f = asa_checked(&min_psi, &auto(&min_psi))?.value; // max(f1,f2) = e^{-min ψ}
    let amin_f = asa_checked(&max_psi, &auto(&max_psi))?.value;
    Ok(CheckReport::absolute("valuation", a1 + a2, amax_f + amin_f, tol)
        .note(format!("as(f1) = {a1}, as(f2) = {a2}, as(max f) = {amax_f}, as(min f) = {amin_f}")))
}

/// Spot-check ψ(tx) = t²ψ(x) on seeded random samples.
pub fn is_two_homogeneous(psi: &ConvexFunction, samples: usize, seed: u64) -> bool {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut x = [0.0, 0.0];
        for c in 0..psi.dim() {
            x[c] = rng.gen_range(-3.0..3.0);
        }
        let t: f64 = rng.gen_range(0.1..3.0);
        let lhs = psi.value(&geom::scale(t, &x));
        let rhs = t * t * psi.value(&x);
        if (lhs - rhs).abs() > 1e-8 * (1.0 + rhs.abs()) {
            return false;
        }
    }
    true
}

/// Isoperimetric inequality for 2-homogeneous ψ:
/// as(f) ≤ (2π)^{n/(n+2)} (∫ e^{−ψ})^{n/(n+2)}, equality iff ψ is a
/// positive definite quadratic form.
pub fn check_isoperimetric(psi: &ConvexFunction, tol: f64) -> Result<CheckReport> {
    if !is_two_homogeneous(psi, 50, 99) {
        return Err(Error::Precondition("isoperimetric check requires a 2-homogeneous function".into()));
    }
    let n = psi.dim() as f64;
    let spec = auto(psi);
    let lhs = asa_checked(psi, &spec)?.value;
    let mass = accept_tight(convexfn::integral_of_density(psi, &spec))?.value;
    let rhs = (2.0 * std::f64::consts::PI).powf(n / (n + 2.0)) * mass.powf(n / (n + 2.0));
    Ok(CheckReport::upper_bound("isoperimetric", lhs, rhs, tol)
        .note(format!("density mass = {mass}")))
}

/// Gauge relation on an axis ellipse K: compares as(‖·‖_K²/2) against
/// as_{n/(n+1)}(K) under the two candidate prefactors
/// (2π)^{n/2}/vol_n(B₂ⁿ) and (2π)^{n/2}/(n·vol_n(B₂ⁿ)), reporting which
/// one the computation supports (n = 2).
pub fn check_gauge_relation(rx: f64, ry: f64, tol: f64) -> Result<CheckReport> {
    let n = 2.0;
    let psi = convexfn::gauge_square_half(convexfn::Body::Ellipse { rx, ry })?;
    let body = BodyBoundary2D::ellipse(rx, ry)?;
    let spec = auto(&psi);
    let lhs = asa_checked(&psi, &spec)?.value;
    let asp = asp_body(&body, n / (n + 1.0), &QuadratureSpec::default_for(1))?.value;
    let displayed = (2.0 * std::f64::consts::PI).powf(n / 2.0) / geom::unit_ball_volume(2);
    let derivation = displayed / n;
    let rhs = derivation * asp;
    let ratio_derivation = lhs / rhs;
    let ratio_displayed = lhs / (displayed * asp);
    let matched = if (ratio_derivation - 1.0).abs() <= tol {
        "derivation-final"
    } else if (ratio_displayed - 1.0).abs() <= tol {
        "displayed"
    } else {
        "neither"
    };
    Ok(CheckReport::relative("gauge_relation", lhs, rhs, tol)
        .note(format!("as_(n/(n+1))(K) = {asp}"))
        .note(format!(
            "prefactor candidates: displayed {displayed} (ratio {ratio_displayed}), derivation-final {derivation} (ratio {ratio_derivation})"
        ))
        .note(format!("matched constant: {matched}")))
}
