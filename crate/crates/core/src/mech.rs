//! World-frame strapdown mechanization.
//!
//! One step over `dt` with angular increment `dtheta` and velocity increment
//! `dvel` (both body frame):
//!
//! ```text
//! C+ = exp(-w_ie dt) C exp(dtheta)
//! v+ = (I + W dt)^-1 [ (I - W dt) v + C_half dvel + g(r + v dt/2) dt ]
//! r+ = r + (v + v+) dt / 2
//! ```
//!
//! where `W = (w_ie x)` and `C_half` is the attitude at mid-interval. The
//! Coriolis term is trapezoidal and gravity is taken at the predicted
//! midpoint, so the scheme is second order. [`inverse_propagate`] solves the
//! same equations for the increments, which lets the simulator emit data that
//! this scheme integrates back onto the truth.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{GravityModel, WorldFrame};
use crate::lie::{skew, so3_exp, so3_log, Rotation};

/// Attitude, velocity and position of the body in the world frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NavState {
    pub c_bw: Rotation,
    pub v_wb_w: Vector3<f64>,
    pub r_wb_w: Vector3<f64>,
    pub t: f64,
}

/// Roll, pitch, yaw (rad) of a Forward-Left-Up body in East-North-Up axes,
/// with `C_b^w = Rz(yaw) Ry(-pitch) Rx(roll)`. Yaw is counter-clockwise from East.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Euler {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Euler {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Euler { roll, pitch, yaw }
    }

    pub fn to_rotation(&self) -> Rotation {
        Rotation::rot_z(self.yaw) * Rotation::rot_y(-self.pitch) * Rotation::rot_x(self.roll)
    }

    pub fn from_rotation(c: &Rotation) -> Self {
        let m = c.matrix();
        Euler {
            roll: m[(2, 1)].atan2(m[(2, 2)]),
            pitch: m[(2, 0)].clamp(-1.0, 1.0).asin(),
            yaw: m[(1, 0)].atan2(m[(0, 0)]),
        }
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.roll, self.pitch, self.yaw)
    }
}

impl NavState {
    pub fn new(c_bw: Rotation, v_wb_w: Vector3<f64>, r_wb_w: Vector3<f64>, t: f64) -> Self {
        NavState {
            c_bw,
            v_wb_w,
            r_wb_w,
            t,
        }
    }

    pub fn euler(&self) -> Euler {
        Euler::from_rotation(&self.c_bw)
    }
}

/// Integrated IMU output over `(t - dt, t]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    pub dtheta: Vector3<f64>,
    pub dvel: Vector3<f64>,
}

/// `(I + K)^-1` for `K = skew(w)`.
#[inline]
fn inv_i_plus_skew(w: &Vector3<f64>) -> Matrix3<f64> {
    let k = skew(w);
    Matrix3::identity() - (k - k * k) / (1.0 + w.norm_squared())
}

/// One mechanization step with an explicit earth rate and gravity function.
pub fn propagate_with<G>(
    state: &NavState,
    sample: &ImuSample,
    omega_ie_w: &Vector3<f64>,
    gravity: G,
) -> Result<NavState>
where
    G: Fn(&Vector3<f64>) -> Vector3<f64>,
{
    let dt = sample.t - state.t;
    if !(dt > 0.0) {
        return Err(Error::NonMonotonicTime {
            state: state.t,
            sample: sample.t,
        });
    }
    let earth = *omega_ie_w * dt;
    let c = *state.c_bw.matrix();
    let c_next = so3_exp(&-earth).matrix() * c * so3_exp(&sample.dtheta).matrix();
    let c_half = so3_exp(&(-earth * 0.5)).matrix() * c * so3_exp(&(sample.dtheta * 0.5)).matrix();

    let w = skew(&earth);
    let g = gravity(&(state.r_wb_w + state.v_wb_w * (0.5 * dt)));
    let rhs = state.v_wb_w - w * state.v_wb_w + c_half * sample.dvel + g * dt;
    let v_next = inv_i_plus_skew(&earth) * rhs;
    let r_next = state.r_wb_w + (state.v_wb_w + v_next) * (0.5 * dt);

    Ok(NavState {
        c_bw: Rotation::from_matrix_unchecked(c_next),
        v_wb_w: v_next,
        r_wb_w: r_next,
        t: sample.t,
    })
}

/// One mechanization step in `frame` under `gravity`.
pub fn propagate(
    state: &NavState,
    sample: &ImuSample,
    frame: &WorldFrame,
    gravity: &GravityModel,
) -> Result<NavState> {
    propagate_with(state, sample, &frame.omega_ie_w, |r| {
        gravity.gravity_w(frame, r)
    })
}

/// Increments that carry `prev` onto `next` under [`propagate_with`].
///
/// Attitude and velocity are reproduced to round-off; position follows the
/// trapezoidal rule, so it differs from an analytic path by `O(dt^3)` per step.
pub fn inverse_propagate_with<G>(
    prev: &NavState,
    next: &NavState,
    omega_ie_w: &Vector3<f64>,
    gravity: G,
) -> Result<ImuSample>
where
    G: Fn(&Vector3<f64>) -> Vector3<f64>,
{
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(Error::NonMonotonicTime {
            state: prev.t,
            sample: next.t,
        });
    }
    let earth = *omega_ie_w * dt;
    let c = *prev.c_bw.matrix();
    let rel = c.transpose() * so3_exp(&earth).matrix() * next.c_bw.matrix();
    let dtheta = so3_log(&Rotation::from_matrix_unchecked(rel))?;
    let c_half = so3_exp(&(-earth * 0.5)).matrix() * c * so3_exp(&(dtheta * 0.5)).matrix();

    let w = skew(&earth);
    let g = gravity(&(prev.r_wb_w + prev.v_wb_w * (0.5 * dt)));
    let dv_w = next.v_wb_w + w * next.v_wb_w - (prev.v_wb_w - w * prev.v_wb_w) - g * dt;
    Ok(ImuSample {
        t: next.t,
        dtheta,
        dvel: c_half.transpose() * dv_w,
    })
}

pub fn inverse_propagate(
    prev: &NavState,
    next: &NavState,
    frame: &WorldFrame,
    gravity: &GravityModel,
) -> Result<ImuSample> {
    inverse_propagate_with(prev, next, &frame.omega_ie_w, |r| {
        gravity.gravity_w(frame, r)
    })
}

/// `omega_wb^b = omega_ib^b - C^T omega_ie^w`.
pub fn omega_wb_b(state: &NavState, omega_ib_b: &Vector3<f64>, frame: &WorldFrame) -> Vector3<f64> {
    omega_ib_b - state.c_bw.transpose() * frame.omega_ie_w
}

/// Inertial velocity in world axes: `v_wb + w_ie x (r_ew + r_wb)`.
pub fn v_ib_w(state: &NavState, frame: &WorldFrame) -> Vector3<f64> {
    state.v_wb_w + frame.omega_ie_w.cross(&(frame.r_ew_w + state.r_wb_w))
}

/// Stateful mechanizer that renormalizes the attitude every
/// [`Strapdown::RENORMALIZE_EVERY`] steps.
#[derive(Clone, Debug)]
pub struct Strapdown {
    pub frame: WorldFrame,
    pub gravity: GravityModel,
    steps: u64,
}

impl Strapdown {
    pub const RENORMALIZE_EVERY: u64 = 1000;

    pub fn new(frame: WorldFrame, gravity: GravityModel) -> Self {
        Strapdown {
            frame,
            gravity,
            steps: 0,
        }
    }

    pub fn step(&mut self, state: &NavState, sample: &ImuSample) -> Result<NavState> {
        let mut next = propagate(state, sample, &self.frame, &self.gravity)?;
        self.steps += 1;
        if self.steps % Self::RENORMALIZE_EVERY == 0 {
            next.c_bw = next.c_bw.renormalized();
        }
        Ok(next)
    }
}
