//! The five SINS/odometer error-state models.
//!
//! Every model carries a 21-component error state laid out as
//!
//! | rows    | block | content |
//! |---------|-------|---------|
//! | 0..9    | nav   | attitude, velocity-like and position-like errors (per [`Tag`]) |
//! | 9..12   | ins   | gyro bias error `eps^b` (rad/s) |
//! | 12..15  | ins   | accelerometer bias error `nabla^b` (m/s^2) |
//! | 15      | odo   | scale-factor error `dk` |
//! | 16, 17  | odo   | installation pitch and yaw errors (rad) |
//! | 18..21  | odo   | lever-arm error (m) |
//!
//! Errors follow "estimate = truth + error". For the calibration block:
//! `dk = k_hat - k`, `dalpha = alpha - alpha_hat`, `dL = L - L_hat`, and the
//! bias errors are `eps = omega_hat - omega` (so `b = b_hat + eps`).
//!
//! Navigation blocks, with `p = r - r0` and `u = v + w_ie x p`:
//!
//! * `Ekf`: `C_hat = exp(-phi) C`, `dv = v_hat - v`, `dr = r_hat - r`.
//! * `LgR`: `log(X X_hat^-1)` with `X = (C, v, p)`.
//! * `LgL`: `(-phi, y, z) = log(X_hat^-1 X)` with `X = (C, v, p)`.
//! * `ALgR`, `ALgL`: as `LgR`, `LgL` with `X = (C, u, p)`.

mod correction;
mod jacobians;

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{GravityModel, WorldFrame};
use crate::lie::{so3_exp, Rotation};
use crate::mech::NavState;

pub use correction::{apply_correction, Correction};
pub use jacobians::{build_f_g, build_h, m_v_m, predict_measurement};

pub const STATE_DIM: usize = 21;
pub const NOISE_DIM: usize = 8;

pub type StateVector = SVector<f64, STATE_DIM>;
pub type StateMatrix = SMatrix<f64, STATE_DIM, STATE_DIM>;
pub type NoiseGain = SMatrix<f64, STATE_DIM, NOISE_DIM>;
pub type NoiseMatrix = SMatrix<f64, NOISE_DIM, NOISE_DIM>;
pub type MeasMatrix = SMatrix<f64, 3, STATE_DIM>;

/// Row offsets of the blocks in the error state.
pub mod idx {
    pub const ATT: usize = 0;
    pub const VEL: usize = 3;
    pub const POS: usize = 6;
    pub const GYRO: usize = 9;
    pub const ACCEL: usize = 12;
    pub const ODO_K: usize = 15;
    pub const ODO_PITCH: usize = 16;
    pub const ODO_YAW: usize = 17;
    pub const ODO_LEVER: usize = 18;
}

/// Filter algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    #[serde(rename = "EKF")]
    Ekf,
    #[serde(rename = "LG_R")]
    LgR,
    #[serde(rename = "LG_L")]
    LgL,
    #[serde(rename = "A_LG_R")]
    ALgR,
    #[serde(rename = "A_LG_L")]
    ALgL,
}

impl Tag {
    pub const ALL: [Tag; 5] = [Tag::Ekf, Tag::LgL, Tag::ALgL, Tag::LgR, Tag::ALgR];

    /// Identifier used in configs and file names.
    pub fn id(self) -> &'static str {
        match self {
            Tag::Ekf => "EKF",
            Tag::LgR => "LG_R",
            Tag::LgL => "LG_L",
            Tag::ALgR => "A_LG_R",
            Tag::ALgL => "A_LG_L",
        }
    }

    /// Name used in result tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Tag::Ekf => "SO-EKF-w",
            Tag::LgL => "LSE-EKF-w",
            Tag::ALgL => "A-LSE-EKF-w",
            Tag::LgR => "RSE-EKF-w",
            Tag::ALgR => "A-RSE-EKF-w",
        }
    }

    /// Whether the velocity slot holds `v_ib - w_ie x (r_ew + r0)` instead of `v_wb`.
    pub fn is_augmented(self) -> bool {
        matches!(self, Tag::ALgR | Tag::ALgL)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Tag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Tag> {
        Tag::ALL
            .into_iter()
            .find(|t| t.id().eq_ignore_ascii_case(s) || t.display_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config("tag", format!("unknown algorithm `{s}`")))
    }
}

/// Odometer calibration: scale factor, installation angles, lever arm and
/// Gauss-Markov correlation times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdoCalib {
    pub k_odo: f64,
    pub alpha_pitch: f64,
    pub alpha_yaw: f64,
    pub lever_b: Vector3<f64>,
    /// Correlation times (s) of `dk`, pitch and yaw installation errors.
    pub tau: [f64; 3],
}

impl Default for OdoCalib {
    fn default() -> Self {
        OdoCalib {
            k_odo: 1.0,
            alpha_pitch: 0.0,
            alpha_yaw: 0.0,
            lever_b: Vector3::zeros(),
            tau: [3600.0; 3],
        }
    }
}

impl OdoCalib {
    /// `C_b^m` built from the installation angles (roll installation fixed at 0).
    pub fn c_bm(&self) -> Rotation {
        so3_exp(&Vector3::new(0.0, self.alpha_pitch, self.alpha_yaw))
    }

    /// Relaxes the Gauss-Markov parameters toward their means over `dt`.
    pub fn decay(&mut self, dt: f64) {
        self.k_odo = 1.0 + (self.k_odo - 1.0) * (-dt / self.tau[0]).exp();
        self.alpha_pitch *= (-dt / self.tau[1]).exp();
        self.alpha_yaw *= (-dt / self.tau[2]).exp();
    }
}

/// Gyro and accelerometer bias estimates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ImuErrors {
    pub gyro_bias: Vector3<f64>,
    pub accel_bias: Vector3<f64>,
}

/// Continuous-time noise levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Gyro angular random walk, rad/sqrt(s).
    pub gyro_arw: f64,
    /// Accelerometer velocity random walk, m/s/sqrt(s).
    pub accel_vrw: f64,
    /// Drive PSD of the scale-factor Gauss-Markov process.
    pub odo_k_psd: f64,
    /// Drive PSD of the pitch installation Gauss-Markov process, rad^2 s.
    pub odo_pitch_psd: f64,
    /// Odometer velocity measurement variance per axis, (m/s)^2.
    pub r_v: f64,
}

impl NoiseConfig {
    /// Drive PSD giving stationary standard deviation `sigma` for a process
    /// `x' = -x/tau + tau w`.
    pub fn gm_psd(sigma: f64, tau: f64) -> f64 {
        2.0 * sigma * sigma / (tau * tau * tau)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("gyro_arw", self.gyro_arw),
            ("accel_vrw", self.accel_vrw),
            ("odo_k_psd", self.odo_k_psd),
            ("odo_pitch_psd", self.odo_pitch_psd),
        ];
        for (name, v) in named {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(name, "must be finite and non-negative"));
            }
        }
        if !(self.r_v > 0.0) || !self.r_v.is_finite() {
            return Err(Error::config("r_v", "must be positive"));
        }
        Ok(())
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let deg = std::f64::consts::PI / 180.0;
        NoiseConfig {
            gyro_arw: 0.005 * deg / 60.0,
            accel_vrw: 1.2e-2 / 60.0,
            odo_k_psd: Self::gm_psd(1e-3, 3600.0),
            odo_pitch_psd: Self::gm_psd(1e-3, 3600.0),
            r_v: 0.01,
        }
    }
}

/// Diagonal PSD matrix over `(gyro xyz, accel xyz, dk drive, pitch drive)`.
pub fn process_noise_q(noise: &NoiseConfig, _calib: &OdoCalib) -> NoiseMatrix {
    let g = noise.gyro_arw * noise.gyro_arw;
    let a = noise.accel_vrw * noise.accel_vrw;
    NoiseMatrix::from_diagonal(&SVector::<f64, NOISE_DIM>::from_column_slice(&[
        g,
        g,
        g,
        a,
        a,
        a,
        noise.odo_k_psd,
        noise.odo_pitch_psd,
    ]))
}

/// Where the gravitation inside the `ALgR` velocity row is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaEvaluation {
    /// At the reference position `r0`; the navigation block is then constant.
    #[default]
    Initial,
    /// At the current position estimate.
    Current,
}

/// Earth model and reference position shared by the builders.
#[derive(Clone, Debug)]
pub struct ModelContext {
    pub frame: WorldFrame,
    pub gravity: GravityModel,
    /// Reference position `r_wb(0)`.
    pub r0: Vector3<f64>,
    pub gamma_at: GammaEvaluation,
    k_r0: Vector3<f64>,
    omega: Matrix3<f64>,
}

impl ModelContext {
    pub fn new(
        frame: WorldFrame,
        gravity: GravityModel,
        r0: Vector3<f64>,
        gamma_at: GammaEvaluation,
    ) -> Self {
        let k_r0 = gravity.gravitation_w(&frame, &r0) - frame.centripetal(&r0);
        let omega = crate::lie::skew(&frame.omega_ie_w);
        ModelContext {
            frame,
            gravity,
            r0,
            gamma_at,
            k_r0,
            omega,
        }
    }

    /// `(w_ie x)`.
    pub fn omega_skew(&self) -> &Matrix3<f64> {
        &self.omega
    }

    /// `gamma(r) - (w_ie x)^2 (r_ew + r0)` with `r` chosen by `gamma_at`.
    pub fn augmented_gravity(&self, r_wb_w: &Vector3<f64>) -> Vector3<f64> {
        match self.gamma_at {
            GammaEvaluation::Initial => self.k_r0,
            GammaEvaluation::Current => {
                self.gravity.gravitation_w(&self.frame, r_wb_w) - self.frame.centripetal(&self.r0)
            }
        }
    }

    /// Velocity slot of the group state: `v` or `v + w_ie x (r - r0)`.
    pub fn group_velocity(&self, tag: Tag, nav: &NavState) -> Vector3<f64> {
        if tag.is_augmented() {
            nav.v_wb_w + self.frame.omega_ie_w.cross(&(nav.r_wb_w - self.r0))
        } else {
            nav.v_wb_w
        }
    }
}
