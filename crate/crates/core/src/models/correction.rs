use nalgebra::{Matrix3, Vector3};

use super::{idx, ImuErrors, ModelContext, OdoCalib, StateVector, Tag};
use crate::error::{Error, Result};
use crate::lie::{se23_exp, skew, Rotation, Se23Element, Twist9};
use crate::mech::NavState;

/// Output of [`apply_correction`]: the corrected navigation state plus
/// increments to add to the running bias and calibration estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correction {
    pub nav: NavState,
    pub imu: ImuErrors,
    pub d_k_odo: f64,
    pub d_alpha_pitch: f64,
    pub d_alpha_yaw: f64,
    pub d_lever_b: Vector3<f64>,
}

impl Correction {
    pub fn apply_to(&self, imu: &mut ImuErrors, calib: &mut OdoCalib) {
        imu.gyro_bias += self.imu.gyro_bias;
        imu.accel_bias += self.imu.accel_bias;
        calib.k_odo += self.d_k_odo;
        calib.alpha_pitch += self.d_alpha_pitch;
        calib.alpha_yaw += self.d_alpha_yaw;
        calib.lever_b += self.d_lever_b;
    }
}

fn block(x: &StateVector, at: usize) -> Vector3<f64> {
    x.fixed_rows::<3>(at).into_owned()
}

/// Removes the estimated error `xhat` from `nav` and the calibration.
pub fn apply_correction(
    tag: Tag,
    ctx: &ModelContext,
    nav: &NavState,
    xhat: &StateVector,
) -> Result<Correction> {
    let phi = block(xhat, idx::ATT);
    let dv = block(xhat, idx::VEL);
    let dr = block(xhat, idx::POS);
    let angle = phi.norm();
    if !(angle < std::f64::consts::FRAC_PI_2) {
        return Err(Error::CorrectionTooLarge(angle));
    }

    let corrected = match tag {
        Tag::Ekf => {
            let c = (Matrix3::identity() + skew(&phi)) * nav.c_bw.matrix();
            NavState::new(
                Rotation::from_matrix_unchecked(c).renormalized(),
                nav.v_wb_w - dv,
                nav.r_wb_w - dr,
                nav.t,
            )
        }
        _ => {
            let omega = ctx.frame.omega_ie_w;
            let est = Se23Element::new(
                nav.c_bw,
                ctx.group_velocity(tag, nav),
                nav.r_wb_w - ctx.r0,
            );
            let x = match tag {
                Tag::LgR | Tag::ALgR => se23_exp(&Twist9::new(phi, dv, dr)) * est,
                _ => est * se23_exp(&Twist9::new(-phi, dv, dr)),
            };
            let v = if tag.is_augmented() {
                x.nu - omega.cross(&x.rho)
            } else {
                x.nu
            };
            NavState::new(x.rotation, v, x.rho + ctx.r0, nav.t)
        }
    };

    Ok(Correction {
        nav: corrected,
        imu: ImuErrors {
            gyro_bias: block(xhat, idx::GYRO),
            accel_bias: block(xhat, idx::ACCEL),
        },
        d_k_odo: -xhat[idx::ODO_K],
        d_alpha_pitch: xhat[idx::ODO_PITCH],
        d_alpha_yaw: xhat[idx::ODO_YAW],
        d_lever_b: block(xhat, idx::ODO_LEVER),
    })
}
