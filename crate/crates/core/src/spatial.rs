//! Rigid transforms, elementary joint factors and first-order displacement
//! extraction.
//!
//! Rotations are kept as full 3×3 matrices. Small rotations are read off the
//! skew-symmetric part of `R_perturbed · R_nominalᵀ − I`, which is exact to
//! first order and is all the kinetostatic solvers need.

use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector6};

use crate::error::{Error, Result};

/// Entrywise tolerance on `RᵀR − I` and `det R − 1` for a valid rotation.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// Largest deviation from orthonormality that model loading will repair by
/// projecting onto the nearest rotation.
pub const LOAD_PROJECTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> Vector3<f64> {
        let mut v = Vector3::zeros();
        v[self.index()] = 1.0;
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    Translation,
    Rotation,
}

/// One-parameter joint factor: a translation along or a rotation about a
/// coordinate axis of the current frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElementaryAxis {
    pub axis: Axis,
    pub kind: MotionKind,
}

impl ElementaryAxis {
    pub const fn translation(axis: Axis) -> Self {
        Self {
            axis,
            kind: MotionKind::Translation,
        }
    }

    pub const fn rotation(axis: Axis) -> Self {
        Self {
            axis,
            kind: MotionKind::Rotation,
        }
    }

    /// Unit twist of the factor in its own frame, ordered (v; ω).
    pub fn unit_twist(self) -> Vector6<f64> {
        let u = self.axis.unit();
        let mut t = Vector6::zeros();
        match self.kind {
            MotionKind::Translation => t.fixed_rows_mut::<3>(0).copy_from(&u),
            MotionKind::Rotation => t.fixed_rows_mut::<3>(3).copy_from(&u),
        }
        t
    }
}

impl fmt::Display for ElementaryAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            MotionKind::Translation => "T",
            MotionKind::Rotation => "R",
        };
        write!(f, "{k}{:?}", self.axis)
    }
}

/// Homogeneous rigid transform with an orthonormal rotation block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a transform, rejecting rotation blocks that are not orthonormal
    /// to [`ORTHONORMAL_TOL`].
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !rotation.iter().chain(translation.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("transform has non-finite entries".into()));
        }
        let dev = orthonormality_defect(&rotation);
        if dev > ORTHONORMAL_TOL {
            return Err(Error::InvalidArgument(format!(
                "rotation block is not orthonormal (defect {dev:.3e})"
            )));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Builds a transform from loaded data, projecting a nearly orthonormal
    /// block onto the closest rotation (polar factor).
    pub fn new_projected(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !rotation.iter().chain(translation.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("transform has non-finite entries".into()));
        }
        let dev = orthonormality_defect(&rotation);
        if dev > LOAD_PROJECTION_TOL {
            return Err(Error::InvalidArgument(format!(
                "rotation block is too far from orthonormal to repair (defect {dev:.3e})"
            )));
        }
        let svd = rotation.svd(true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let r = u * v_t;
        if r.determinant() <= 0.0 {
            return Err(Error::InvalidArgument("rotation block is a reflection".into()));
        }
        Ok(Self {
            rotation: r,
            translation,
        })
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    /// Internal constructor for rotations produced by exact formulas.
    pub(crate) fn from_parts_unchecked(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn compose(&self, other: &Transform) -> Transform {
        Transform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// `(Rᵀ, −Rᵀp)`.
    pub fn inverse(&self) -> Transform {
        let rt = self.rotation.transpose();
        Transform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Entrywise `max |RᵀR − I|` together with `|det R − 1|`.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.rotation)
    }
}

impl Mul for Transform {
    type Output = Transform;

    fn mul(self, rhs: Transform) -> Transform {
        self.compose(&rhs)
    }
}

impl<'a> Mul<&'a Transform> for &'a Transform {
    type Output = Transform;

    fn mul(self, rhs: &'a Transform) -> Transform {
        self.compose(rhs)
    }
}

fn orthonormality_defect(r: &Matrix3<f64>) -> f64 {
    let gram = r.transpose() * r - Matrix3::identity();
    gram.amax().max((r.determinant() - 1.0).abs())
}

/// Canonical rotation about / translation along a coordinate axis.
pub fn elementary_transform(axis_kind: ElementaryAxis, value: f64) -> Result<Transform> {
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "elementary {axis_kind} value is not finite"
        )));
    }
    Ok(elementary(axis_kind, value))
}

pub(crate) fn elementary(axis_kind: ElementaryAxis, value: f64) -> Transform {
    match axis_kind.kind {
        MotionKind::Translation => Transform::from_translation(axis_kind.axis.unit() * value),
        MotionKind::Rotation => Transform::from_parts_unchecked(
            axis_rotation(axis_kind.axis, value),
            Vector3::zeros(),
        ),
    }
}

pub fn axis_rotation(axis: Axis, angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    match axis {
        Axis::X => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        Axis::Y => Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        Axis::Z => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
    }
}

pub fn rot(axis: Axis, angle: f64) -> Transform {
    Transform::from_parts_unchecked(axis_rotation(axis, angle), Vector3::zeros())
}

pub fn trans(x: f64, y: f64, z: f64) -> Transform {
    Transform::from_translation(Vector3::new(x, y, z))
}

/// First-order small displacement `(δp; δφ)` in mm and rad.
///
/// Only meaningful as a linearised quantity; two of them do not compose as
/// finite motions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SmallDisplacement {
    pub dp: Vector3<f64>,
    pub dphi: Vector3<f64>,
}

impl SmallDisplacement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            dp: v.fixed_rows::<3>(0).into_owned(),
            dphi: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.dp);
        v.fixed_rows_mut::<3>(3).copy_from(&self.dphi);
        v
    }
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Axial vector of the skew-symmetric part of `m`.
pub fn vee_skew(m: &Matrix3<f64>) -> Vector3<f64> {
    0.5 * Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)])
}

/// Displacement of `perturbed` relative to `nominal`, measured at the frame
/// origin and expressed in base axes.
pub fn displacement_between(nominal: &Transform, perturbed: &Transform) -> SmallDisplacement {
    let dr = perturbed.rotation * nominal.rotation.transpose();
    SmallDisplacement {
        dp: perturbed.translation - nominal.translation,
        dphi: vee_skew(&dr),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn expm(a: &Matrix3<f64>) -> Matrix3<f64> {
        // plain Taylor series, converges quickly for the angles used here
        let mut term = Matrix3::identity();
        let mut sum = Matrix3::identity();
        for k in 1..40 {
            term = term * a / k as f64;
            sum += term;
        }
        sum
    }

    fn random_transform(seed: [f64; 6]) -> Transform {
        let r = axis_rotation(Axis::Z, seed[0])
            * axis_rotation(Axis::Y, seed[1])
            * axis_rotation(Axis::X, seed[2]);
        Transform::new(r, Vector3::new(seed[3], seed[4], seed[5])).unwrap()
    }

    fn transform_strategy() -> impl Strategy<Value = Transform> {
        (
            -3.0..3.0f64,
            -3.0..3.0f64,
            -3.0..3.0f64,
            -500.0..500.0f64,
            -500.0..500.0f64,
            -500.0..500.0f64,
        )
            .prop_map(|(a, b, c, x, y, z)| random_transform([a, b, c, x, y, z]))
    }

    #[test]
    fn zero_rotation_is_identity() {
        let t = elementary_transform(ElementaryAxis::rotation(Axis::Z), 0.0).unwrap();
        assert_eq!(t, Transform::identity());
    }

    #[test]
    fn pure_translation() {
        let t = elementary_transform(ElementaryAxis::translation(Axis::X), 5.0).unwrap();
        assert_eq!(*t.translation(), Vector3::new(5.0, 0.0, 0.0));
        assert_eq!(*t.rotation(), Matrix3::identity());
    }

    #[test]
    fn y_rotation_matches_matrix_exponential() {
        let t = elementary_transform(ElementaryAxis::rotation(Axis::Y), 0.3).unwrap();
        let oracle = expm(&skew(&Vector3::new(0.0, 0.3, 0.0)));
        assert_abs_diff_eq!(*t.rotation(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn non_finite_value_rejected() {
        assert!(elementary_transform(ElementaryAxis::translation(Axis::X), f64::NAN).is_err());
        assert!(elementary_transform(ElementaryAxis::rotation(Axis::X), f64::INFINITY).is_err());
    }

    #[test]
    fn compose_matches_homogeneous_product() {
        let a = random_transform([0.3, -1.2, 2.0, 10.0, -4.0, 7.5]);
        let b = random_transform([-2.1, 0.4, 0.9, -3.0, 120.0, 1.0]);
        let oracle = a.to_homogeneous() * b.to_homogeneous();
        assert_abs_diff_eq!(a.compose(&b).to_homogeneous(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(a.compose(&Transform::identity()).to_homogeneous(), a.to_homogeneous());
    }

    #[test]
    fn inverse_cases() {
        assert_eq!(Transform::identity().inverse(), Transform::identity());
        let t = trans(3.0, 0.0, 0.0).inverse();
        assert_eq!(*t.translation(), Vector3::new(-3.0, 0.0, 0.0));
        let r = random_transform([1.0, 0.5, -0.25, 30.0, -20.0, 10.0]);
        let id = r.compose(&r.inverse());
        assert_abs_diff_eq!(id.to_homogeneous(), Matrix4::identity(), epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_orthonormal() {
        let mut r = Matrix3::identity();
        r[(0, 1)] = 1e-9;
        assert!(Transform::new(r, Vector3::zeros()).is_err());
        let t = Transform::new_projected(r, Vector3::zeros()).unwrap();
        assert!(t.orthonormality_defect() < 1e-14);
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(Transform::new_projected(flip, Vector3::zeros()).is_err());
    }

    #[test]
    fn displacement_cases() {
        let t = random_transform([0.2, 0.1, -0.4, 1.0, 2.0, 3.0]);
        let d = displacement_between(&t, &t);
        assert_eq!(d.to_vector(), Vector6::zeros());

        let d = displacement_between(&Transform::identity(), &trans(1e-3, 0.0, 0.0));
        assert_abs_diff_eq!(d.dp, Vector3::new(1e-3, 0.0, 0.0));
        assert_eq!(d.dphi, Vector3::zeros());

        // sin(h) = h − h³/6 so the first-order read-out is exact to 1e-15 here
        let d = displacement_between(&Transform::identity(), &rot(Axis::Z, 1e-5));
        assert_abs_diff_eq!(d.dphi, Vector3::new(0.0, 0.0, 1e-5), epsilon = 1e-12);
    }

    #[test]
    fn displacement_converges_to_unit_twist() {
        let base = random_transform([0.7, -0.3, 1.1, 50.0, -10.0, 25.0]);
        for axis in Axis::ALL {
            for kind in [MotionKind::Translation, MotionKind::Rotation] {
                let k = ElementaryAxis { axis, kind };
                let mut twist = k.unit_twist();
                // the twist is expressed in base axes
                let r = base.rotation();
                let v = r * twist.fixed_rows::<3>(0);
                let w = r * twist.fixed_rows::<3>(3);
                twist.fixed_rows_mut::<3>(0).copy_from(&v);
                twist.fixed_rows_mut::<3>(3).copy_from(&w);
                let mut errors = Vec::new();
                for h in [1e-4, 1e-5, 1e-6] {
                    let p = base.compose(&elementary(k, h));
                    let d = displacement_between(&base, &p).to_vector() / h;
                    errors.push((d - twist).amax());
                }
                // first order in h until roundoff (~ eps·|p| / h) takes over
                let roundoff = |h: f64| 1e-15 * 100.0 / h;
                for (e, h) in errors.iter().zip([1e-4, 1e-5, 1e-6]) {
                    assert!(*e <= 10.0 * h + roundoff(h), "{k}: {errors:?}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn identity_is_neutral(t in transform_strategy()) {
            let l = Transform::identity().compose(&t).to_homogeneous();
            let r = t.compose(&Transform::identity()).to_homogeneous();
            prop_assert!((l - t.to_homogeneous()).amax() <= 1e-12);
            prop_assert!((r - t.to_homogeneous()).amax() <= 1e-12);
        }

        #[test]
        fn composition_is_associative(a in transform_strategy(), b in transform_strategy(), c in transform_strategy()) {
            let lhs = a.compose(&b).compose(&c).to_homogeneous();
            let rhs = a.compose(&b.compose(&c)).to_homogeneous();
            prop_assert!((lhs - rhs).amax() <= 1e-11);
        }

        #[test]
        fn composition_drift_stays_small(a in transform_strategy(), b in transform_strategy()) {
            let mut t = Transform::identity();
            for _ in 0..50 {
                t = t.compose(&a).compose(&b);
            }
            prop_assert!(t.orthonormality_defect() < 1e-12);
        }
    }
}
