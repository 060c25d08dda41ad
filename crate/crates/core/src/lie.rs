//! SO(3) and SE2(3) machinery.
//!
//! An [`Se23Element`] bundles a rotation with two translation-like slots, a
//! velocity `nu` and a position `rho`. Its 5x5 embedding is
//!
//! ```text
//! | R  nu  rho |
//! | 0   1    0 |
//! | 0   0    1 |
//! ```
//!
//! so columns 4 and 5 carry velocity before position, the same order the
//! navigation error vectors use. Tangent vectors are [`Twist9`] values stacked
//! as `(phi, nu, rho)`.

use std::ops::{Mul, Neg};

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use crate::error::{Error, Result};

pub type Matrix5 = SMatrix<f64, 5, 5>;
pub type Matrix9 = SMatrix<f64, 9, 9>;
pub type Vector9 = SVector<f64, 9>;

/// Below this rotation angle the trigonometric coefficients switch to Taylor series.
pub const SMALL_ANGLE: f64 = 1e-6;

/// Tolerance on orthonormality and determinant accepted by [`Rotation::try_new`].
pub const ROTATION_TOL: f64 = 1e-9;

/// Cross-product matrix: `skew(v) * w == v.cross(&w)`.
#[inline]
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`skew`] on the antisymmetric part of `m`.
#[inline]
pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// A direction cosine matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Wraps `m` after checking `m^T m = I` and `det m = 1` within [`ROTATION_TOL`].
    pub fn try_new(m: Matrix3<f64>) -> Option<Self> {
        let r = Rotation(m);
        r.is_valid(ROTATION_TOL).then_some(r)
    }

    /// Wraps `m` without checking; the caller guarantees it is orthonormal.
    #[inline]
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    #[inline]
    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    #[inline]
    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let e = self.0.transpose() * self.0 - Matrix3::identity();
        e.amax() <= tol && (self.0.determinant() - 1.0).abs() <= tol
    }

    /// Nearest rotation under the symmetric correction `R (R^T R)^{-1/2}`,
    /// approximated by one Newton step, which is plenty for round-off drift.
    pub fn renormalized(&self) -> Self {
        let m = self.0;
        let e = m.transpose() * m - Matrix3::identity();
        Rotation(m * (Matrix3::identity() - 0.5 * e))
    }

    /// Rotation about the `x` axis.
    pub fn rot_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    /// Rotation about the `y` axis.
    pub fn rot_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    /// Rotation about the `z` axis.
    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    #[inline]
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<Vector3<f64>> for Rotation {
    type Output = Vector3<f64>;
    #[inline]
    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

impl Mul<&Vector3<f64>> for &Rotation {
    type Output = Vector3<f64>;
    #[inline]
    fn mul(self, rhs: &Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

/// `(sin t / t, (1 - cos t) / t^2)` with a series fallback near zero.
#[inline]
fn exp_coefficients(theta: f64) -> (f64, f64) {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
        )
    } else {
        let (s, c) = theta.sin_cos();
        (s / theta, (1.0 - c) / (theta * theta))
    }
}

/// Rodrigues map from a rotation vector to a rotation.
pub fn so3_exp(phi: &Vector3<f64>) -> Rotation {
    let theta = phi.norm();
    let (a, b) = exp_coefficients(theta);
    let k = skew(phi);
    Rotation(Matrix3::identity() + a * k + b * (k * k))
}

/// Rotation vector of `r`, with `|result| <= pi`.
///
/// Angles close to pi take the axis from the symmetric part of `r`. Fails only
/// when `trace(r) <= -1 + 1e-9`, where the axis sign is ambiguous.
pub fn so3_log(r: &Rotation) -> Result<Vector3<f64>> {
    let m = r.matrix();
    let trace = m.trace();
    if trace <= -1.0 + 1e-9 {
        return Err(Error::NearPiRotation { trace });
    }
    let c = ((trace - 1.0) * 0.5).clamp(-1.0, 1.0);
    let w = vee(m);
    let s = w.norm();
    let theta = s.atan2(c);

    if c > -0.9 {
        let ratio = if theta < SMALL_ANGLE {
            let t2 = theta * theta;
            1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
        } else {
            theta / s
        };
        return Ok(w * ratio);
    }

    // (R + R^T)/2 - cI = (1 - c) a a^T
    let b = (m + m.transpose()) * 0.5 - Matrix3::identity() * c;
    let one_minus_c = 1.0 - c;
    let i = (0..3)
        .max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)]))
        .unwrap_or(0);
    let ai = (b[(i, i)] / one_minus_c).max(0.0).sqrt();
    let mut axis = Vector3::zeros();
    for j in 0..3 {
        axis[j] = if j == i {
            ai
        } else {
            b[(i, j)] / (one_minus_c * ai)
        };
    }
    axis.normalize_mut();
    if axis.dot(&w) < 0.0 {
        axis = -axis;
    }
    Ok(axis * theta)
}

/// Left Jacobian of SO(3): `J = sum_k (phi^)^k / (k+1)!`.
pub fn so3_left_jacobian(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let k = skew(phi);
    let (b, c) = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
        )
    } else {
        let (s, co) = theta.sin_cos();
        let t2 = theta * theta;
        ((1.0 - co) / t2, (theta - s) / (t2 * theta))
    };
    Matrix3::identity() + b * k + c * (k * k)
}

/// Closed-form inverse of [`so3_left_jacobian`], valid for `|phi| < 2 pi`.
pub fn so3_left_jacobian_inv(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let k = skew(phi);
    let d = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    } else {
        let (s, c) = theta.sin_cos();
        1.0 / (theta * theta) - (1.0 + c) / (2.0 * theta * s)
    };
    Matrix3::identity() - 0.5 * k + d * (k * k)
}

/// Tangent vector of SE2(3), stacked as `(phi, nu, rho)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Twist9 {
    pub phi: Vector3<f64>,
    pub nu: Vector3<f64>,
    pub rho: Vector3<f64>,
}

impl Twist9 {
    pub fn new(phi: Vector3<f64>, nu: Vector3<f64>, rho: Vector3<f64>) -> Self {
        Twist9 { phi, nu, rho }
    }

    pub fn zero() -> Self {
        Twist9::new(Vector3::zeros(), Vector3::zeros(), Vector3::zeros())
    }

    pub fn from_vector(v: &Vector9) -> Self {
        Twist9 {
            phi: v.fixed_rows::<3>(0).into_owned(),
            nu: v.fixed_rows::<3>(3).into_owned(),
            rho: v.fixed_rows::<3>(6).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector9 {
        let mut v = Vector9::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.phi);
        v.fixed_rows_mut::<3>(3).copy_from(&self.nu);
        v.fixed_rows_mut::<3>(6).copy_from(&self.rho);
        v
    }

    pub fn scaled(&self, k: f64) -> Self {
        Twist9::new(self.phi * k, self.nu * k, self.rho * k)
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }
}

impl Neg for Twist9 {
    type Output = Twist9;
    fn neg(self) -> Twist9 {
        self.scaled(-1.0)
    }
}

/// Element of SE2(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Se23Element {
    pub rotation: Rotation,
    pub nu: Vector3<f64>,
    pub rho: Vector3<f64>,
}

impl Se23Element {
    pub fn new(rotation: Rotation, nu: Vector3<f64>, rho: Vector3<f64>) -> Self {
        Se23Element { rotation, nu, rho }
    }

    pub fn identity() -> Self {
        Se23Element::new(Rotation::identity(), Vector3::zeros(), Vector3::zeros())
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Se23Element::new(rt, -(rt * self.nu), -(rt * self.rho))
    }

    /// 5x5 matrix embedding.
    pub fn to_matrix(&self) -> Matrix5 {
        let mut m = Matrix5::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.nu);
        m.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.rho);
        m
    }

    /// Reads back an embedded element; `None` if the rotation block is not a rotation.
    pub fn from_matrix(m: &Matrix5) -> Option<Self> {
        let r = Rotation::try_new(m.fixed_view::<3, 3>(0, 0).into_owned())?;
        Some(Se23Element::new(
            r,
            m.fixed_view::<3, 1>(0, 3).into_owned(),
            m.fixed_view::<3, 1>(0, 4).into_owned(),
        ))
    }

    /// Adjoint matrix acting on `(phi, nu, rho)`: `X exp(xi) X^-1 = exp(Ad_X xi)`.
    pub fn adjoint(&self) -> Matrix9 {
        let r = self.rotation.matrix();
        let mut ad = Matrix9::zeros();
        for k in 0..3 {
            ad.fixed_view_mut::<3, 3>(3 * k, 3 * k).copy_from(r);
        }
        ad.fixed_view_mut::<3, 3>(3, 0).copy_from(&(skew(&self.nu) * r));
        ad.fixed_view_mut::<3, 3>(6, 0).copy_from(&(skew(&self.rho) * r));
        ad
    }
}

impl Mul for Se23Element {
    type Output = Se23Element;
    fn mul(self, rhs: Se23Element) -> Se23Element {
        Se23Element::new(
            self.rotation * rhs.rotation,
            self.nu + self.rotation * rhs.nu,
            self.rho + self.rotation * rhs.rho,
        )
    }
}

/// Exponential map of SE2(3).
pub fn se23_exp(xi: &Twist9) -> Se23Element {
    let j = so3_left_jacobian(&xi.phi);
    Se23Element::new(so3_exp(&xi.phi), j * xi.nu, j * xi.rho)
}

/// Logarithm of SE2(3); fails with the same condition as [`so3_log`].
pub fn se23_log(x: &Se23Element) -> Result<Twist9> {
    let phi = so3_log(&x.rotation)?;
    let jinv = so3_left_jacobian_inv(&phi);
    Ok(Twist9::new(phi, jinv * x.nu, jinv * x.rho))
}
