//! World-frame vector math and the three per-frame intent features.
//!
//! Everything here is a pure function of its inputs. The world frame has
//! z pointing up; positions are in meters, angles in radians.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Norm threshold below which a vector is treated as degenerate.
pub const DEGENERACY_EPS: f64 = 1e-9;

/// A 3D vector or point in the world frame. Serializes as `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Serialize> Serialize for Vec3<S> {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        [&self.x, &self.y, &self.z].serialize(serializer)
    }
}

impl<'de, S: Deserialize<'de>> Deserialize<'de> for Vec3<S> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [x, y, z] = <[S; 3]>::deserialize(deserializer)?;
        Ok(Vec3 { x, y, z })
    }
}

impl<S: Copy> From<[S; 3]> for Vec3<S> {
    fn from(a: [S; 3]) -> Self {
        Vec3 {
            x: a[0],
            y: a[1],
            z: a[2],
        }
    }
}

impl<S: Copy> From<Vec3<S>> for [S; 3] {
    fn from(v: Vec3<S>) -> Self {
        [v.x, v.y, v.z]
    }
}

impl<S: Scalar> Vec3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        Vec3 {
            x: S::zero(),
            y: S::zero(),
            z: S::zero(),
        }
    }

    pub fn unit_z() -> Self {
        Vec3 {
            x: S::zero(),
            y: S::zero(),
            z: S::one(),
        }
    }

    pub fn dot(self, other: Self) -> S {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_squared(self) -> S {
        self.dot(self)
    }

    pub fn norm(self) -> S {
        self.norm_squared().sqrt()
    }

    pub fn scale(self, k: S) -> Self {
        Vec3 {
            x: self.x * k,
            y: self.y * k,
            z: self.z * k,
        }
    }

    /// Unit vector in the same direction, or `None` when the norm is
    /// below [`DEGENERACY_EPS`].
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n <= cast(DEGENERACY_EPS) {
            None
        } else {
            Some(self.scale(S::one() / n))
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<S: Scalar> std::ops::Add for Vec3<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Vec3 {
            x: self.x + rhs.x,
            y: self.y + rhs.y,
            z: self.z + rhs.z,
        }
    }
}

impl<S: Scalar> std::ops::Sub for Vec3<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Vec3 {
            x: self.x - rhs.x,
            y: self.y - rhs.y,
            z: self.z - rhs.z,
        }
    }
}

impl<S: Scalar> std::ops::Neg for Vec3<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3 {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// 3x3 rotation matrix stored as world-frame columns. Serializes
/// row-major, the usual convention for matrix literals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<S> {
    pub cols: [Vec3<S>; 3],
}

impl<S: Serialize> Serialize for Mat3<S> {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let [c0, c1, c2] = &self.cols;
        [
            [&c0.x, &c1.x, &c2.x],
            [&c0.y, &c1.y, &c2.y],
            [&c0.z, &c1.z, &c2.z],
        ]
        .serialize(serializer)
    }
}

impl<'de, S: Deserialize<'de>> Deserialize<'de> for Mat3<S> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [[xx, yx, zx], [xy, yy, zy], [xz, yz, zz]] = <[[S; 3]; 3]>::deserialize(deserializer)?;
        Ok(Mat3 {
            cols: [
                Vec3 {
                    x: xx,
                    y: xy,
                    z: xz,
                },
                Vec3 {
                    x: yx,
                    y: yy,
                    z: yz,
                },
                Vec3 {
                    x: zx,
                    y: zy,
                    z: zz,
                },
            ],
        })
    }
}

impl<S: Scalar> Mat3<S> {
    pub fn from_cols(c0: Vec3<S>, c1: Vec3<S>, c2: Vec3<S>) -> Self {
        Mat3 { cols: [c0, c1, c2] }
    }

    pub fn identity() -> Self {
        Mat3::from_cols(
            Vec3::new(S::one(), S::zero(), S::zero()),
            Vec3::new(S::zero(), S::one(), S::zero()),
            Vec3::unit_z(),
        )
    }

    /// Rodrigues rotation about a unit axis.
    pub fn from_axis_angle(axis: Vec3<S>, angle: S) -> Self {
        let a = axis.normalized().unwrap_or_else(Vec3::unit_z);
        let (s, c) = (angle.sin(), angle.cos());
        let one_c = S::one() - c;
        let rot = |v: Vec3<S>| {
            v.scale(c) + a.cross(v).scale(s) + a.scale(a.dot(v) * one_c)
        };
        Mat3::from_cols(
            rot(Vec3::new(S::one(), S::zero(), S::zero())),
            rot(Vec3::new(S::zero(), S::one(), S::zero())),
            rot(Vec3::unit_z()),
        )
    }

    pub fn mul_vec(&self, v: Vec3<S>) -> Vec3<S> {
        self.cols[0].scale(v.x) + self.cols[1].scale(v.y) + self.cols[2].scale(v.z)
    }

    /// Applies the transpose, i.e. maps world coordinates into the local frame.
    pub fn transpose_mul_vec(&self, v: Vec3<S>) -> Vec3<S> {
        Vec3 {
            x: self.cols[0].dot(v),
            y: self.cols[1].dot(v),
            z: self.cols[2].dot(v),
        }
    }

    /// Max absolute deviation of `R^T R` from the identity.
    pub fn orthonormality_error(&self) -> S {
        let mut worst = S::zero();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { S::one() } else { S::zero() };
                let got = self.cols[i].dot(self.cols[j]);
                worst = worst.max((got - want).abs());
            }
        }
        worst
    }
}

/// Grasp style an object's shape invites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Affordance {
    TopGrasp,
    SideGrasp,
    Both,
}

/// One candidate target object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject<S> {
    pub id: usize,
    pub name: String,
    pub position: Vec3<S>,
    pub affordance: Affordance,
}

/// The candidate object set. Ids must be `0..n-1` in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Scene<S> {
    pub objects: Vec<SceneObject<S>>,
}

impl<S: Scalar> Scene<S> {
    pub fn new(objects: Vec<SceneObject<S>>) -> Result<Self> {
        let scene = Scene { objects };
        scene.validate()?;
        Ok(scene)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.objects.is_empty() {
            return Err(Error::EmptyScene);
        }
        for (i, obj) in self.objects.iter().enumerate() {
            if obj.id != i {
                return Err(Error::InvalidConfig(format!(
                    "object ids must be dense 0..n-1; found id {} at index {}",
                    obj.id, i
                )));
            }
            if !obj.position.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "object {} has a non-finite position",
                    obj.name
                )));
            }
        }
        Ok(())
    }
}

/// One time-stamped frame of world-frame keypoints.
///
/// `hand_points` are wrist, index-finger base, and pinky base: the triad
/// spanning the palm plane. They are stored positionally, so any
/// non-collinear triad works.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation<S> {
    /// Seconds; strictly increasing within a trajectory.
    pub t: S,
    pub nose: Vec3<S>,
    /// Unit head-orientation vector.
    pub head_dir: Vec3<S>,
    pub wrist: Vec3<S>,
    pub hand_points: [Vec3<S>; 3],
}

impl<S: Scalar> Observation<S> {
    pub fn validate(&self) -> Result<()> {
        let finite = self.t.is_finite()
            && self.nose.is_finite()
            && self.head_dir.is_finite()
            && self.wrist.is_finite()
            && self.hand_points.iter().all(|p| p.is_finite());
        if !finite {
            return Err(Error::InvalidConfig(
                "observation contains non-finite values".into(),
            ));
        }
        let norm_err = (self.head_dir.norm() - S::one()).abs();
        if norm_err > cast(1e-6) {
            return Err(Error::InvalidConfig(format!(
                "head_dir must be unit-norm (|norm - 1| = {norm_err})"
            )));
        }
        Ok(())
    }
}

/// Angle between two vectors, in `[0, pi]`.
///
/// The cosine is clamped to `[-1, 1]` to absorb rounding before `acos`.
pub fn angle_between<S: Scalar>(u: Vec3<S>, v: Vec3<S>) -> Result<S> {
    let eps: S = cast(DEGENERACY_EPS);
    let nu = u.norm();
    let nv = v.norm();
    if nu <= eps || nv <= eps {
        return Err(Error::DegenerateVector);
    }
    let c = u.dot(v) / (nu * nv);
    let c = c.min(S::one()).max(-S::one());
    Ok(c.acos())
}

/// Head feature: angle between the head orientation and the nose-to-object
/// vector, one entry per scene object.
pub fn head_angles<S: Scalar>(obs: &Observation<S>, scene: &Scene<S>) -> Result<Vec<S>> {
    if scene.is_empty() {
        return Err(Error::EmptyScene);
    }
    scene
        .objects
        .iter()
        .map(|obj| angle_between(obs.head_dir, obj.position - obs.nose))
        .collect()
}

/// Hand-orientation feature: angle between the palm-plane normal and the
/// world up axis.
///
/// The normal's sign is canonicalized into the upper hemisphere before the
/// angle is taken, so the result is in `[0, pi/2]` regardless of point
/// order or handedness.
pub fn hand_orientation_angle<S: Scalar>(obs: &Observation<S>) -> Result<S> {
    let [p0, p1, p2] = obs.hand_points;
    let mut normal = (p1 - p0).cross(p2 - p0);
    if normal.norm() <= cast(DEGENERACY_EPS) {
        return Err(Error::DegenerateHand);
    }
    if normal.dot(Vec3::unit_z()) < S::zero() {
        normal = -normal;
    }
    angle_between(normal, Vec3::unit_z())
}

/// Raw two-frame wrist velocity.
pub fn hand_velocity<S: Scalar>(prev: &Observation<S>, cur: &Observation<S>) -> Result<Vec3<S>> {
    let dt = cur.t - prev.t;
    if dt <= S::zero() {
        return Err(Error::NonMonotoneTime {
            prev: prev.t.to_f64().unwrap_or(f64::NAN),
            cur: cur.t.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((cur.wrist - prev.wrist).scale(S::one() / dt))
}

/// Motion feature: angle between the hand velocity and the wrist-to-object
/// vector, one entry per scene object.
///
/// Callers gate on speed: below the minimum-speed threshold the velocity
/// direction is noise and motion evidence should be absent instead.
pub fn motion_angles<S: Scalar>(v: Vec3<S>, wrist: Vec3<S>, scene: &Scene<S>) -> Result<Vec<S>> {
    if scene.is_empty() {
        return Err(Error::EmptyScene);
    }
    scene
        .objects
        .iter()
        .map(|obj| angle_between(v, obj.position - wrist))
        .collect()
}

/// Spherical interpolation between two unit vectors.
///
/// Falls back to normalized linear interpolation when the inputs are
/// nearly parallel; returns `b` when they are nearly antiparallel and the
/// great-circle path is ambiguous.
pub fn slerp<S: Scalar>(a: Vec3<S>, b: Vec3<S>, u: S) -> Vec3<S> {
    let u = u.min(S::one()).max(S::zero());
    let cos_omega = a.dot(b).min(S::one()).max(-S::one());
    if cos_omega > cast(1.0 - 1e-10) {
        let v = a.scale(S::one() - u) + b.scale(u);
        return v.normalized().unwrap_or(b);
    }
    if cos_omega < cast(-(1.0 - 1e-10)) {
        return if u < cast(0.5) { a } else { b };
    }
    let omega = cos_omega.acos();
    let sin_omega = omega.sin();
    let wa = ((S::one() - u) * omega).sin() / sin_omega;
    let wb = (u * omega).sin() / sin_omega;
    (a.scale(wa) + b.scale(wb)).normalized().unwrap_or(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    fn obs_with_hand(p0: Vec3<f64>, p1: Vec3<f64>, p2: Vec3<f64>) -> Observation<f64> {
        Observation {
            t: 0.0,
            nose: Vec3::zero(),
            head_dir: v(1.0, 0.0, 0.0),
            wrist: p0,
            hand_points: [p0, p1, p2],
        }
    }

    #[test]
    fn angle_between_identical_is_zero() {
        let a = angle_between(v(1.0, 0.0, 0.0), v(1.0, 0.0, 0.0)).unwrap();
        assert!(a.abs() < TOL);
    }

    #[test]
    fn angle_between_orthogonal_is_half_pi() {
        let a = angle_between(v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)).unwrap();
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < TOL);
    }

    #[test]
    fn angle_between_antiparallel_is_pi() {
        let a = angle_between(v(1.0, 0.0, 0.0), v(-1.0, 0.0, 0.0)).unwrap();
        assert!((a - std::f64::consts::PI).abs() < TOL);
    }

    #[test]
    fn angle_between_rejects_degenerate() {
        assert!(matches!(
            angle_between(v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0)),
            Err(Error::DegenerateVector)
        ));
    }

    fn two_object_scene() -> Scene<f64> {
        Scene::new(vec![
            SceneObject {
                id: 0,
                name: "a".into(),
                position: v(2.0, 0.0, 0.0),
                affordance: Affordance::Both,
            },
            SceneObject {
                id: 1,
                name: "b".into(),
                position: v(0.0, 2.0, 0.0),
                affordance: Affordance::Both,
            },
        ])
        .unwrap()
    }

    #[test]
    fn head_angles_axis_aligned() {
        let obs = Observation {
            t: 0.0,
            nose: Vec3::zero(),
            head_dir: v(1.0, 0.0, 0.0),
            wrist: Vec3::zero(),
            hand_points: [Vec3::zero(); 3],
        };
        let theta = head_angles(&obs, &two_object_scene()).unwrap();
        assert!(theta[0].abs() < TOL);
        assert!((theta[1] - std::f64::consts::FRAC_PI_2).abs() < TOL);
    }

    #[test]
    fn head_angles_diagonal_gives_quarter_pi() {
        let s = 1.0 / 2.0_f64.sqrt();
        let obs = Observation {
            t: 0.0,
            nose: Vec3::zero(),
            head_dir: v(s, s, 0.0),
            wrist: Vec3::zero(),
            hand_points: [Vec3::zero(); 3],
        };
        let scene = Scene::new(vec![SceneObject {
            id: 0,
            name: "a".into(),
            position: v(1.0, 0.0, 0.0),
            affordance: Affordance::Both,
        }])
        .unwrap();
        let theta = head_angles(&obs, &scene).unwrap();
        assert!((theta[0] - std::f64::consts::FRAC_PI_4).abs() < TOL);
    }

    #[test]
    fn head_angles_looking_down_at_object() {
        let obs = Observation {
            t: 0.0,
            nose: v(0.0, 0.0, 1.0),
            head_dir: v(0.0, 0.0, -1.0),
            wrist: Vec3::zero(),
            hand_points: [Vec3::zero(); 3],
        };
        let scene = Scene::new(vec![SceneObject {
            id: 0,
            name: "a".into(),
            position: Vec3::zero(),
            affordance: Affordance::Both,
        }])
        .unwrap();
        let theta = head_angles(&obs, &scene).unwrap();
        assert!(theta[0].abs() < TOL);
    }

    #[test]
    fn head_angles_object_at_nose_is_degenerate() {
        let obs = Observation {
            t: 0.0,
            nose: v(0.5, 0.5, 0.5),
            head_dir: v(1.0, 0.0, 0.0),
            wrist: Vec3::zero(),
            hand_points: [Vec3::zero(); 3],
        };
        let scene = Scene::new(vec![SceneObject {
            id: 0,
            name: "a".into(),
            position: v(0.5, 0.5, 0.5),
            affordance: Affordance::Both,
        }])
        .unwrap();
        assert!(matches!(
            head_angles(&obs, &scene),
            Err(Error::DegenerateVector)
        ));
    }

    #[test]
    fn hand_orientation_palm_down_is_zero() {
        let obs = obs_with_hand(Vec3::zero(), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0));
        let gamma = hand_orientation_angle(&obs).unwrap();
        assert!(gamma.abs() < TOL);
    }

    #[test]
    fn hand_orientation_vertical_palm_is_half_pi() {
        let obs = obs_with_hand(Vec3::zero(), v(0.0, 0.0, 1.0), v(0.0, 1.0, 0.0));
        let gamma = hand_orientation_angle(&obs).unwrap();
        assert!((gamma - std::f64::consts::FRAC_PI_2).abs() < TOL);
    }

    #[test]
    fn hand_orientation_collinear_is_degenerate() {
        let obs = obs_with_hand(Vec3::zero(), v(1.0, 0.0, 0.0), v(2.0, 0.0, 0.0));
        assert!(matches!(
            hand_orientation_angle(&obs),
            Err(Error::DegenerateHand)
        ));
    }

    #[test]
    fn hand_orientation_sign_canonicalized() {
        // Swapping two points flips the raw normal; gamma must not change.
        let a = obs_with_hand(Vec3::zero(), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0));
        let b = obs_with_hand(Vec3::zero(), v(0.0, 1.0, 0.0), v(1.0, 0.0, 0.0));
        let ga = hand_orientation_angle(&a).unwrap();
        let gb = hand_orientation_angle(&b).unwrap();
        assert!((ga - gb).abs() < TOL);
    }

    fn obs_at(t: f64, wrist: Vec3<f64>) -> Observation<f64> {
        Observation {
            t,
            nose: Vec3::zero(),
            head_dir: v(1.0, 0.0, 0.0),
            wrist,
            hand_points: [wrist; 3],
        }
    }

    #[test]
    fn hand_velocity_basic() {
        let prev = obs_at(0.0, Vec3::zero());
        let cur = obs_at(1.0 / 30.0, v(0.1, 0.0, 0.0));
        let vel = hand_velocity(&prev, &cur).unwrap();
        assert!((vel.x - 3.0).abs() < TOL);
        assert!(vel.y.abs() < TOL && vel.z.abs() < TOL);
    }

    #[test]
    fn hand_velocity_stationary_is_zero() {
        let prev = obs_at(0.0, v(0.2, 0.3, 0.4));
        let cur = obs_at(0.1, v(0.2, 0.3, 0.4));
        let vel = hand_velocity(&prev, &cur).unwrap();
        assert_eq!(vel, Vec3::zero());
    }

    #[test]
    fn hand_velocity_rejects_zero_dt() {
        let prev = obs_at(0.5, Vec3::zero());
        let cur = obs_at(0.5, v(0.1, 0.0, 0.0));
        assert!(matches!(
            hand_velocity(&prev, &cur),
            Err(Error::NonMonotoneTime { .. })
        ));
    }

    #[test]
    fn motion_angles_axis_aligned() {
        let scene = two_object_scene();
        let beta = motion_angles(v(1.0, 0.0, 0.0), Vec3::zero(), &scene).unwrap();
        assert!(beta[0].abs() < TOL);
        assert!((beta[1] - std::f64::consts::FRAC_PI_2).abs() < TOL);
    }

    #[test]
    fn motion_angles_zero_velocity_is_degenerate() {
        let scene = two_object_scene();
        assert!(matches!(
            motion_angles(Vec3::zero(), Vec3::zero(), &scene),
            Err(Error::DegenerateVector)
        ));
    }

    #[test]
    fn slerp_endpoints_and_midpoint() {
        let a = v(1.0, 0.0, 0.0);
        let b = v(0.0, 1.0, 0.0);
        assert!((slerp(a, b, 0.0) - a).norm() < TOL);
        assert!((slerp(a, b, 1.0) - b).norm() < TOL);
        let mid = slerp(a, b, 0.5);
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((mid - v(s, s, 0.0)).norm() < TOL);
    }

    #[test]
    fn mat3_axis_angle_is_orthonormal() {
        let m = Mat3::from_axis_angle(v(1.0, 2.0, 3.0), 0.7);
        assert!(m.orthonormality_error() < TOL);
        let r = m.mul_vec(v(0.0, 0.0, 1.0));
        assert!((r.norm() - 1.0).abs() < TOL);
    }

    #[test]
    fn scene_rejects_non_dense_ids() {
        let result = Scene::<f64>::new(vec![SceneObject {
            id: 3,
            name: "a".into(),
            position: Vec3::zero(),
            affordance: Affordance::Both,
        }]);
        assert!(result.is_err());
    }

    #[test]
    fn works_with_f32() {
        let a = angle_between(
            Vec3::<f32>::new(1.0, 0.0, 0.0),
            Vec3::<f32>::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        assert!((a - std::f32::consts::FRAC_PI_2).abs() < 1e-6);
    }
}
