//! Floating functions of convex functions and the affine surface area of
//! log-concave densities e^{-ψ}, in dimensions 1 and 2.
//!
//! The library is organized bottom-up:
//!
//! * [`numerics`]: adaptive Gauss–Kronrod quadrature, root finding, box
//!   maximization, finite differences.
//! * [`convexfn`]: the convex function catalog with coercivity certificates.
//! * [`parser`]: a one-line textual mini-language for catalog functions.
//! * [`epigraph`]: cap volumes, graph curvature, the rolling function, and
//!   ellipsoid cap formulas.
//! * [`floating`]: the floating function ψ_δ via volume-δ hyperplane cuts.
//! * [`surface`]: affine surface area and its algebraic identities.
//! * [`experiments`]: convergence harness for the δ → 0 limit theorems.
//! * [`report`]: machine-readable check and convergence reports.

pub mod convexfn;
pub mod epigraph;
pub mod error;
pub mod experiments;
pub mod floating;
pub mod geom;
pub mod numerics;
pub mod parser;
pub mod report;
pub mod surface;

pub use convexfn::{ConvexFunction, Minorant};
pub use error::{Error, Result};
pub use floating::{FloatParams, FloatingEvaluation};
pub use geom::{Mat, Point};
pub use numerics::{Estimate, QuadratureSpec, Region, SearchSpec};
pub use report::{CheckReport, ConvergenceReport};
