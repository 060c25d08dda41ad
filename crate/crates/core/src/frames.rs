//! Earth model and the world frame.
//!
//! The world frame `w` is East-North-Up, tangent to the WGS84 ellipsoid at a
//! chosen origin and fixed to the rotating earth.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{skew, Rotation};

/// WGS84 semi-major axis (m).
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// WGS84 geocentric gravitational constant (m^3/s^2).
pub const WGS84_GM: f64 = 3.986_004_418e14;
/// Earth rotation rate (rad/s).
pub const EARTH_RATE: f64 = 7.292_115e-5;
/// Normal gravity at the equator (m/s^2).
pub const GAMMA_EQUATOR: f64 = 9.780_325_335_9;
/// Normal gravity at the poles (m/s^2).
pub const GAMMA_POLE: f64 = 9.832_184_937_8;

#[inline]
fn wgs84_e2() -> f64 {
    WGS84_F * (2.0 - WGS84_F)
}

#[inline]
fn wgs84_b() -> f64 {
    WGS84_A * (1.0 - WGS84_F)
}

/// Geodetic latitude (rad), longitude (rad), ellipsoidal height (m).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geodetic {
    pub lat: f64,
    pub lon: f64,
    pub height: f64,
}

pub fn geodetic_to_ecef(g: &Geodetic) -> Vector3<f64> {
    let e2 = wgs84_e2();
    let (sl, cl) = g.lat.sin_cos();
    let (so, co) = g.lon.sin_cos();
    let n = WGS84_A / (1.0 - e2 * sl * sl).sqrt();
    Vector3::new(
        (n + g.height) * cl * co,
        (n + g.height) * cl * so,
        (n * (1.0 - e2) + g.height) * sl,
    )
}

pub fn ecef_to_geodetic(r: &Vector3<f64>) -> Geodetic {
    let e2 = wgs84_e2();
    let p = r.x.hypot(r.y);
    let lon = r.y.atan2(r.x);
    let mut lat = r.z.atan2(p * (1.0 - e2));
    for _ in 0..6 {
        let sl = lat.sin();
        let n = WGS84_A / (1.0 - e2 * sl * sl).sqrt();
        lat = (r.z + e2 * n * sl).atan2(p);
    }
    let (sl, cl) = lat.sin_cos();
    let height = p * cl + r.z * sl - WGS84_A * (1.0 - e2 * sl * sl).sqrt();
    Geodetic { lat, lon, height }
}

/// ECEF to local East-North-Up rotation at the given latitude/longitude.
pub fn ecef_to_enu(lat: f64, lon: f64) -> Rotation {
    let (sl, cl) = lat.sin_cos();
    let (so, co) = lon.sin_cos();
    Rotation::from_matrix_unchecked(Matrix3::new(
        -so,
        co,
        0.0,
        -sl * co,
        -sl * so,
        cl,
        cl * co,
        cl * so,
        sl,
    ))
}

/// Somigliana normal gravity magnitude with the second-order free-air height term.
pub fn normal_gravity(lat: f64, height: f64) -> f64 {
    let e2 = wgs84_e2();
    let b = wgs84_b();
    let k = (b * GAMMA_POLE - WGS84_A * GAMMA_EQUATOR) / (WGS84_A * GAMMA_EQUATOR);
    let s2 = lat.sin().powi(2);
    let gamma0 = GAMMA_EQUATOR * (1.0 + k * s2) / (1.0 - e2 * s2).sqrt();
    let m = EARTH_RATE * EARTH_RATE * WGS84_A * WGS84_A * b / WGS84_GM;
    gamma0
        * (1.0 - 2.0 / WGS84_A * (1.0 + WGS84_F + m - 2.0 * WGS84_F * s2) * height
            + 3.0 * height * height / (WGS84_A * WGS84_A))
}

/// Earth-fixed tangent-plane frame anchored at a geodetic origin.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldFrame {
    pub origin: Geodetic,
    /// Rotation taking ECEF components into `w` components.
    pub c_e_w: Rotation,
    /// World origin seen from the earth centre, in `w` axes.
    pub r_ew_w: Vector3<f64>,
    pub omega_ie_w: Vector3<f64>,
    pub earth_rate: f64,
}

/// Builds the ENU world frame at `(lat, lon, h)` with the standard earth rate.
pub fn make_world_frame(lat: f64, lon: f64, h: f64) -> Result<WorldFrame> {
    WorldFrame::with_earth_rate(lat, lon, h, EARTH_RATE)
}

impl WorldFrame {
    /// Same as [`make_world_frame`] with a caller-chosen earth rate.
    pub fn with_earth_rate(lat: f64, lon: f64, h: f64, earth_rate: f64) -> Result<WorldFrame> {
        if !(lat.abs() <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidLatitude(lat));
        }
        let origin = Geodetic {
            lat,
            lon,
            height: h,
        };
        let c_e_w = ecef_to_enu(lat, lon);
        let r_ew_w = c_e_w * geodetic_to_ecef(&origin);
        let omega_ie_w = c_e_w * Vector3::new(0.0, 0.0, earth_rate);
        Ok(WorldFrame {
            origin,
            c_e_w,
            r_ew_w,
            omega_ie_w,
            earth_rate,
        })
    }

    /// ECEF position of a point given in `w` coordinates.
    pub fn to_ecef(&self, r_wb_w: &Vector3<f64>) -> Vector3<f64> {
        self.c_e_w.transpose() * (self.r_ew_w + r_wb_w)
    }

    pub fn to_geodetic(&self, r_wb_w: &Vector3<f64>) -> Geodetic {
        ecef_to_geodetic(&self.to_ecef(r_wb_w))
    }

    /// `omega x (omega x (r_ew + r))`, the centripetal acceleration at `r`.
    pub fn centripetal(&self, r_wb_w: &Vector3<f64>) -> Vector3<f64> {
        let w = skew(&self.omega_ie_w);
        w * (w * (self.r_ew_w + r_wb_w))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GravityMode {
    /// Gravity frozen at its value at the world-frame origin.
    ConstantAtOrigin,
    /// WGS84 normal gravity evaluated at the queried position.
    #[default]
    Normal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GravityModel {
    pub mode: GravityMode,
}

impl GravityModel {
    pub fn normal() -> Self {
        GravityModel {
            mode: GravityMode::Normal,
        }
    }

    pub fn constant() -> Self {
        GravityModel {
            mode: GravityMode::ConstantAtOrigin,
        }
    }

    fn normal_gravity_w(frame: &WorldFrame, r_wb_w: &Vector3<f64>) -> Vector3<f64> {
        let geo = frame.to_geodetic(r_wb_w);
        let up_e = ecef_to_enu(geo.lat, geo.lon).matrix().row(2).transpose();
        frame.c_e_w * (up_e * -normal_gravity(geo.lat, geo.height))
    }

    /// Plumb-line gravity (gravitation plus centrifugal) at `r_wb_w`.
    pub fn gravity_w(&self, frame: &WorldFrame, r_wb_w: &Vector3<f64>) -> Vector3<f64> {
        match self.mode {
            GravityMode::ConstantAtOrigin => Self::normal_gravity_w(frame, &Vector3::zeros()),
            GravityMode::Normal => Self::normal_gravity_w(frame, r_wb_w),
        }
    }

    /// Pure gravitation: `gravity + omega x (omega x (r_ew + r))`.
    pub fn gravitation_w(&self, frame: &WorldFrame, r_wb_w: &Vector3<f64>) -> Vector3<f64> {
        self.gravity_w(frame, r_wb_w) + frame.centripetal(r_wb_w)
    }
}

pub fn gravity_w(frame: &WorldFrame, model: &GravityModel, r_wb_w: &Vector3<f64>) -> Vector3<f64> {
    model.gravity_w(frame, r_wb_w)
}

pub fn gravitation_w(
    frame: &WorldFrame,
    model: &GravityModel,
    r_wb_w: &Vector3<f64>,
) -> Vector3<f64> {
    model.gravitation_w(frame, r_wb_w)
}
