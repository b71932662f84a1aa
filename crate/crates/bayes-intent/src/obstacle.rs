//! Virtual ellipsoid obstacle spanning the wrist and the predicted target.
//!
//! The ellipsoid's major axis runs wrist-to-target; the intermediate and
//! minor semi-axes are fixed fractions of it. Containment tests transform
//! the query point into the ellipsoid's local frame where the surface is
//! in standard position. For planners that only understand spheres, the
//! ellipsoid decomposes into a chain of sphere primitives along the major
//! axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mat3, Vec3};
use crate::scalar::{cast, Scalar};

/// Default intermediate-axis ratio `b = r_b * a`.
pub const DEFAULT_R_B: f64 = 0.5;
/// Default minor-axis ratio `c = r_c * b`.
pub const DEFAULT_R_C: f64 = 1.0 / 3.0;

/// Oriented ellipsoid obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualEllipsoid<S> {
    pub center: Vec3<S>,
    /// Semi-axis lengths `(a, b, c)` in meters, major to minor.
    pub semi_axes: [S; 3],
    /// Columns are the local axes in world coordinates; the first column
    /// is the unit wrist-to-target direction.
    pub rotation: Mat3<S>,
}

/// One sphere primitive of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere<S> {
    pub center: Vec3<S>,
    pub radius: S,
}

/// Sphere-chain approximation of an ellipsoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SphereSet<S> {
    pub spheres: Vec<Sphere<S>>,
}

/// Builds the obstacle between the wrist and the intended target.
///
/// Center is the midpoint, the major semi-axis is half the reach
/// distance, and `b = r_b * a`, `c = r_c * b`. Both ratios must be in
/// `(0, 1]` so the semi-axes stay ordered.
pub fn build_ellipsoid<S: Scalar>(
    wrist: Vec3<S>,
    target: Vec3<S>,
    r_b: S,
    r_c: S,
) -> Result<VirtualEllipsoid<S>> {
    for (name, r) in [("r_b", r_b), ("r_c", r_c)] {
        if !(r > S::zero() && r <= S::one()) {
            return Err(Error::InvalidConfig(format!("{name} must be in (0, 1]")));
        }
    }
    let span = target - wrist;
    let x_local = span
        .normalized()
        .ok_or(Error::DegenerateObstacle)?;

    let half = cast::<S>(0.5);
    let center = (wrist + target).scale(half);
    let a = span.norm() * half;
    let b = r_b * a;
    let c = r_c * b;

    // Prefer a horizontal intermediate axis; when the reach is within 1
    // degree of vertical that cross product degenerates, so fall back to
    // the world x axis as the reference.
    let vertical_limit = cast::<S>(1.0_f64.to_radians().cos());
    let reference = if x_local.dot(Vec3::unit_z()).abs() > vertical_limit {
        Vec3::new(S::one(), S::zero(), S::zero())
    } else {
        Vec3::unit_z()
    };
    let y_local = x_local
        .cross(reference)
        .normalized()
        .expect("reference chosen non-parallel to the major axis");
    let z_local = x_local.cross(y_local);

    Ok(VirtualEllipsoid {
        center,
        semi_axes: [a, b, c],
        rotation: Mat3::from_cols(x_local, y_local, z_local),
    })
}

impl<S: Scalar> VirtualEllipsoid<S> {
    pub fn a(&self) -> S {
        self.semi_axes[0]
    }

    pub fn b(&self) -> S {
        self.semi_axes[1]
    }

    pub fn c_axis(&self) -> S {
        self.semi_axes[2]
    }

    /// Left side of the standard-position surface equation at `p`:
    /// `(x'/a)^2 + (y'/b)^2 + (z'/c)^2` with `p' = R^T (p - center)`.
    pub fn quadratic_form(&self, p: Vec3<S>) -> S {
        let local = self.rotation.transpose_mul_vec(p - self.center);
        let fx = local.x / self.semi_axes[0];
        let fy = local.y / self.semi_axes[1];
        let fz = local.z / self.semi_axes[2];
        fx * fx + fy * fy + fz * fz
    }

    /// Whether `p` lies inside or on the ellipsoid.
    pub fn contains(&self, p: Vec3<S>) -> bool {
        self.quadratic_form(p) <= S::one()
    }

    /// Same ellipsoid with every semi-axis grown by `margin`.
    pub fn inflated(&self, margin: S) -> Self {
        VirtualEllipsoid {
            center: self.center,
            semi_axes: [
                self.semi_axes[0] + margin,
                self.semi_axes[1] + margin,
                self.semi_axes[2] + margin,
            ],
            rotation: self.rotation,
        }
    }

    /// Decomposes into spheres of radius `b` spaced `b / 2` along the
    /// major axis. Span ends pull in by the radius so every sphere stays
    /// near the body; when the ellipsoid is a ball a single sphere is
    /// exact.
    pub fn to_spheres(&self) -> SphereSet<S> {
        self.to_spheres_with_spacing(cast(0.5))
    }

    /// Decomposition with a custom center spacing, as a fraction of the
    /// sphere radius `b`.
    pub fn to_spheres_with_spacing(&self, spacing_factor: S) -> SphereSet<S> {
        let (a, b) = (self.semi_axes[0], self.semi_axes[1]);
        if a <= b {
            return SphereSet {
                spheres: vec![Sphere {
                    center: self.center,
                    radius: a,
                }],
            };
        }
        let radius = b;
        let span = a - radius;
        let step = radius * spacing_factor;
        // Evenly spaced centers covering [-span, span] at spacing <= step.
        let intervals = (cast::<S>(2.0) * span / step)
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        let count = intervals + 1;
        let actual_step = cast::<S>(2.0) * span / cast(intervals as f64);
        let axis = self.rotation.cols[0];
        let spheres = (0..count)
            .map(|i| {
                let offset = -span + actual_step * cast(i as f64);
                Sphere {
                    center: self.center + axis.scale(offset),
                    radius,
                }
            })
            .collect();
        SphereSet { spheres }
    }
}

impl<S: Scalar> SphereSet<S> {
    pub fn contains(&self, p: Vec3<S>) -> bool {
        self.spheres
            .iter()
            .any(|s| (p - s.center).norm_squared() <= s.radius * s.radius)
    }
}
