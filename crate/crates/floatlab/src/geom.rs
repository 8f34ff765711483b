//! Minimal fixed-size vector/matrix helpers for dimensions 1 and 2.
//!
//! Points always carry two coordinates; in dimension 1 the second one is
//! zero and ignored by every operation that takes an explicit `dim`.

/// A point (or vector) in R^1 or R^2. In 1D the second coordinate is 0.
pub type Point = [f64; 2];

pub fn dot(dim: usize, a: &Point, b: &Point) -> f64 {
    match dim {
        1 => a[0] * b[0],
        _ => a[0] * b[0] + a[1] * b[1],
    }
}

pub fn norm(dim: usize, a: &Point) -> f64 {
    dot(dim, a, a).sqrt()
}

pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn scale(s: f64, a: &Point) -> Point {
    [s * a[0], s * a[1]]
}

/// Unit vector at angle `theta` in the plane.
pub fn unit(theta: f64) -> Point {
    [theta.cos(), theta.sin()]
}

/// A small dense matrix for dimensions 1 and 2. In 1D only `m[0][0]` is
/// meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat {
    pub dim: usize,
    pub m: [[f64; 2]; 2],
}

impl Mat {
    pub fn new1(a: f64) -> Self {
        Mat { dim: 1, m: [[a, 0.0], [0.0, 0.0]] }
    }

    pub fn new2(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat { dim: 2, m: [[a11, a12], [a21, a22]] }
    }

    pub fn identity(dim: usize) -> Self {
        match dim {
            1 => Mat::new1(1.0),
            _ => Mat::new2(1.0, 0.0, 0.0, 1.0),
        }
    }

    pub fn det(&self) -> f64 {
        match self.dim {
            1 => self.m[0][0],
            _ => self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0],
        }
    }

    pub fn trace(&self) -> f64 {
        match self.dim {
            1 => self.m[0][0],
            _ => self.m[0][0] + self.m[1][1],
        }
    }

    pub fn apply(&self, v: &Point) -> Point {
        match self.dim {
            1 => [self.m[0][0] * v[0], 0.0],
            _ => [
                self.m[0][0] * v[0] + self.m[0][1] * v[1],
                self.m[1][0] * v[0] + self.m[1][1] * v[1],
            ],
        }
    }

    pub fn transpose(&self) -> Mat {
        Mat {
            dim: self.dim,
            m: [[self.m[0][0], self.m[1][0]], [self.m[0][1], self.m[1][1]]],
        }
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        match self.dim {
            1 => Mat::new1(self.m[0][0] * other.m[0][0]),
            _ => {
                let a = &self.m;
                let b = &other.m;
                Mat::new2(
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                )
            }
        }
    }

    pub fn inverse(&self) -> Option<Mat> {
        let d = self.det();
        if d.abs() < 1e-300 {
            return None;
        }
        Some(match self.dim {
            1 => Mat::new1(1.0 / d),
            _ => Mat::new2(
                self.m[1][1] / d,
                -self.m[0][1] / d,
                -self.m[1][0] / d,
                self.m[0][0] / d,
            ),
        })
    }

    /// Symmetric positive-definiteness via leading minors (symmetry assumed).
    pub fn is_spd(&self, tol: f64) -> bool {
        match self.dim {
            1 => self.m[0][0] > tol,
            _ => self.m[0][0] > tol && self.det() > tol,
        }
    }

    /// Smallest eigenvalue of a symmetric matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        match self.dim {
            1 => self.m[0][0],
            _ => {
                let t = self.trace() / 2.0;
                let d = self.det();
                let disc = (t * t - d).max(0.0).sqrt();
                t - disc
            }
        }
    }
}

/// n-volume of the unit Euclidean ball, n in 0..=3.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => {
            // pi^(n/2) / Gamma(n/2 + 1), via the two-step recursion
            unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64
        }
    }
}

/// Surface area of the unit sphere S^{n-1} in R^n.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}
