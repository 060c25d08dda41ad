//! TOML campaign configuration. Angles are in degrees here and converted to
//! radians when the configuration is resolved.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::GravityModel;
use crate::harness::{HarnessConfig, InitialUncertainty, Rates};
use crate::models::{GammaEvaluation, NoiseConfig, OdoCalib, Tag};
use crate::sim::{
    default_trajectory, ErrorBudget, Segment, SegmentKind, TrajectorySpec, VibrationConfig,
    STANDARD_GRAVITY,
};

const DEG: f64 = PI / 180.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Tag>,
    pub output_dir: PathBuf,
    /// Trajectory file (TOML with the `[trajectory]` table layout); the inline
    /// table wins when both are present.
    pub trajectory_file: Option<PathBuf>,
    pub trajectory: Option<TrajectoryConfig>,
    pub rates: Rates,
    pub errors: ErrorsConfig,
    pub filter: FilterConfig,
    pub odometer: CalibConfig,
    pub gravity: GravityModel,
    pub gamma_at: GammaEvaluation,
    pub rmse_from_s: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            trials: 200,
            seed: 2024,
            algorithms: Tag::ALL.to_vec(),
            output_dir: PathBuf::from("out"),
            trajectory_file: None,
            trajectory: None,
            rates: Rates::default(),
            errors: ErrorsConfig::default(),
            filter: FilterConfig::default(),
            odometer: CalibConfig::default(),
            gravity: GravityModel::normal(),
            gamma_at: GammaEvaluation::Initial,
            rmse_from_s: 200.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub kind: SegmentKind,
    pub duration_s: f64,
    /// m/s^2 for accelerate/decelerate, deg/s for turn, m for climb.
    #[serde(default)]
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub origin_lat_deg: f64,
    pub origin_lon_deg: f64,
    pub origin_height_m: f64,
    pub initial_heading_deg: f64,
    pub segments: Vec<SegmentConfig>,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        let d = default_trajectory();
        TrajectoryConfig {
            origin_lat_deg: d.origin[0] / DEG,
            origin_lon_deg: d.origin[1] / DEG,
            origin_height_m: d.origin[2],
            initial_heading_deg: d.initial_heading / DEG,
            segments: d
                .segments
                .iter()
                .map(|s| SegmentConfig {
                    kind: s.kind,
                    duration_s: s.duration,
                    value: if s.kind == SegmentKind::Turn { s.value / DEG } else { s.value },
                })
                .collect(),
        }
    }
}

impl TrajectoryConfig {
    pub fn resolve(&self) -> TrajectorySpec {
        TrajectorySpec {
            segments: self
                .segments
                .iter()
                .map(|s| {
                    let v = if s.kind == SegmentKind::Turn { s.value * DEG } else { s.value };
                    Segment::new(s.kind, s.duration_s, v)
                })
                .collect(),
            origin: [self.origin_lat_deg * DEG, self.origin_lon_deg * DEG, self.origin_height_m],
            initial_heading: self.initial_heading_deg * DEG,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryFile {
    trajectory: TrajectoryConfig,
}

/// Sensor error distributions used by the simulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrorsConfig {
    pub gyro_bias_deg_per_h: f64,
    pub accel_bias_ug: f64,
    pub roll_pitch_error_deg: f64,
    pub yaw_error_deg: f64,
    pub gyro_arw_deg_per_sqrt_h: f64,
    pub accel_vrw_mps_per_sqrt_h: f64,
    pub odo_sigma_mps: f64,
    pub vibration: bool,
    pub vibration_carrier_hz: f64,
    pub vibration_accel_g: f64,
    pub vibration_gyro_deg_per_s: f64,
    pub vibration_modulation_hz: f64,
    pub odo_k_sigma: f64,
    pub odo_pitch_sigma_deg: f64,
}

impl Default for ErrorsConfig {
    fn default() -> Self {
        let b = ErrorBudget::default();
        let v = VibrationConfig::default();
        ErrorsConfig {
            gyro_bias_deg_per_h: b.gyro_bias / DEG * 3600.0,
            accel_bias_ug: b.accel_bias / STANDARD_GRAVITY * 1e6,
            roll_pitch_error_deg: b.roll_pitch_error / DEG,
            yaw_error_deg: b.yaw_error / DEG,
            gyro_arw_deg_per_sqrt_h: b.gyro_arw / DEG * 60.0,
            accel_vrw_mps_per_sqrt_h: b.accel_vrw * 60.0,
            odo_sigma_mps: b.odo_sigma,
            vibration: true,
            vibration_carrier_hz: v.carrier_hz,
            vibration_accel_g: v.accel_bound / STANDARD_GRAVITY,
            vibration_gyro_deg_per_s: v.gyro_bound / DEG,
            vibration_modulation_hz: v.modulation_hz,
            odo_k_sigma: 0.0,
            odo_pitch_sigma_deg: 0.0,
        }
    }
}

impl ErrorsConfig {
    pub fn resolve(&self) -> ErrorBudget {
        ErrorBudget {
            gyro_bias: self.gyro_bias_deg_per_h * DEG / 3600.0,
            accel_bias: self.accel_bias_ug * 1e-6 * STANDARD_GRAVITY,
            roll_pitch_error: self.roll_pitch_error_deg * DEG,
            yaw_error: self.yaw_error_deg * DEG,
            gyro_arw: self.gyro_arw_deg_per_sqrt_h * DEG / 60.0,
            accel_vrw: self.accel_vrw_mps_per_sqrt_h / 60.0,
            odo_sigma: self.odo_sigma_mps,
            vibration: self.vibration.then_some(VibrationConfig {
                carrier_hz: self.vibration_carrier_hz,
                accel_bound: self.vibration_accel_g * STANDARD_GRAVITY,
                gyro_bound: self.vibration_gyro_deg_per_s * DEG,
                modulation_hz: self.vibration_modulation_hz,
            }),
            odo_k_sigma: self.odo_k_sigma,
            odo_pitch_sigma: self.odo_pitch_sigma_deg * DEG,
        }
    }

    /// The configuration with every error source disabled.
    pub fn zero() -> Self {
        ErrorsConfig {
            gyro_bias_deg_per_h: 0.0,
            accel_bias_ug: 0.0,
            roll_pitch_error_deg: 0.0,
            yaw_error_deg: 0.0,
            gyro_arw_deg_per_sqrt_h: 0.0,
            accel_vrw_mps_per_sqrt_h: 0.0,
            odo_sigma_mps: 0.0,
            vibration: false,
            ..Self::default()
        }
    }
}

/// Filter tuning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub gyro_arw_deg_per_sqrt_h: f64,
    pub accel_vrw_mps_per_sqrt_h: f64,
    /// Stationary sigma of the scale-factor Gauss-Markov model.
    pub odo_k_sigma: f64,
    pub odo_pitch_sigma_deg: f64,
    pub odo_tau_s: [f64; 3],
    /// Odometer velocity measurement sigma per axis.
    pub velocity_sigma_mps: f64,
    pub initial_velocity_sigma_mps: f64,
    pub initial_position_sigma_m: f64,
    pub initial_odo_k_sigma: f64,
    pub initial_odo_angle_sigma_deg: f64,
    pub initial_lever_sigma_m: f64,
    /// Starting calibration estimate.
    pub initial_calibration: CalibConfig,
}

impl Default for FilterConfig {
    fn default() -> Self {
        let n = NoiseConfig::default();
        let i = InitialUncertainty::default();
        let tau = OdoCalib::default().tau;
        FilterConfig {
            gyro_arw_deg_per_sqrt_h: n.gyro_arw / DEG * 60.0,
            accel_vrw_mps_per_sqrt_h: n.accel_vrw * 60.0,
            odo_k_sigma: 1e-3,
            odo_pitch_sigma_deg: 1e-3 / DEG,
            odo_tau_s: tau,
            velocity_sigma_mps: n.r_v.sqrt(),
            initial_velocity_sigma_mps: i.velocity,
            initial_position_sigma_m: i.position,
            initial_odo_k_sigma: i.odo_k,
            initial_odo_angle_sigma_deg: i.odo_angle / DEG,
            initial_lever_sigma_m: i.lever,
            initial_calibration: CalibConfig::default(),
        }
    }
}

/// Odometer scale factor, installation angles and lever arm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibConfig {
    pub scale: f64,
    pub pitch_deg: f64,
    pub yaw_deg: f64,
    pub lever_m: [f64; 3],
}

impl Default for CalibConfig {
    fn default() -> Self {
        CalibConfig {
            scale: 1.0,
            pitch_deg: 0.0,
            yaw_deg: 0.0,
            lever_m: [0.0; 3],
        }
    }
}

impl CalibConfig {
    fn resolve(&self, tau: [f64; 3]) -> OdoCalib {
        OdoCalib {
            k_odo: self.scale,
            alpha_pitch: self.pitch_deg * DEG,
            alpha_yaw: self.yaw_deg * DEG,
            lever_b: Vector3::from(self.lever_m),
            tau,
        }
    }
}

fn check(field: &str, ok: bool, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, reason))
    }
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    /// Reads and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = &cfg.trajectory_file {
            if p.is_relative() {
                cfg.trajectory_file = Some(base.join(p));
            }
        }
        if cfg.trajectory.is_none() {
            if let Some(p) = &cfg.trajectory_file {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::config("trajectory_file", format!("{}: {e}", p.display())))?;
                let file: TrajectoryFile = toml::from_str(&text)
                    .map_err(|e| Error::config("trajectory_file", e.to_string()))?;
                cfg.trajectory = Some(file.trajectory);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        check("trials", self.trials >= 1, "must be at least 1")?;
        let e = &self.errors;
        for (name, v) in [
            ("errors.gyro_bias_deg_per_h", e.gyro_bias_deg_per_h),
            ("errors.accel_bias_ug", e.accel_bias_ug),
            ("errors.roll_pitch_error_deg", e.roll_pitch_error_deg),
            ("errors.yaw_error_deg", e.yaw_error_deg),
            ("errors.gyro_arw_deg_per_sqrt_h", e.gyro_arw_deg_per_sqrt_h),
            ("errors.accel_vrw_mps_per_sqrt_h", e.accel_vrw_mps_per_sqrt_h),
            ("errors.odo_sigma_mps", e.odo_sigma_mps),
            ("errors.odo_k_sigma", e.odo_k_sigma),
            ("errors.odo_pitch_sigma_deg", e.odo_pitch_sigma_deg),
        ] {
            check(name, v >= 0.0 && v.is_finite(), "must be finite and non-negative")?;
        }
        check("errors.yaw_error_deg", e.yaw_error_deg < 90.0, "must be below 90")?;
        if e.vibration {
            check("errors.vibration_carrier_hz", e.vibration_carrier_hz > 0.0, "must be positive")?;
            check("errors.vibration_accel_g", e.vibration_accel_g >= 0.0, "must be non-negative")?;
            check("errors.vibration_gyro_deg_per_s", e.vibration_gyro_deg_per_s >= 0.0, "must be non-negative")?;
            check("errors.vibration_modulation_hz", e.vibration_modulation_hz > 0.0, "must be positive")?;
        }
        let f = &self.filter;
        check("filter.velocity_sigma_mps", f.velocity_sigma_mps > 0.0, "must be positive")?;
        check(
            "filter.odo_tau_s",
            f.odo_tau_s.iter().all(|t| *t > 0.0 && t.is_finite()),
            "must be positive",
        )?;
        for (name, v) in [
            ("filter.gyro_arw_deg_per_sqrt_h", f.gyro_arw_deg_per_sqrt_h),
            ("filter.accel_vrw_mps_per_sqrt_h", f.accel_vrw_mps_per_sqrt_h),
            ("filter.odo_k_sigma", f.odo_k_sigma),
            ("filter.odo_pitch_sigma_deg", f.odo_pitch_sigma_deg),
            ("filter.initial_velocity_sigma_mps", f.initial_velocity_sigma_mps),
            ("filter.initial_position_sigma_m", f.initial_position_sigma_m),
            ("filter.initial_odo_k_sigma", f.initial_odo_k_sigma),
            ("filter.initial_odo_angle_sigma_deg", f.initial_odo_angle_sigma_deg),
            ("filter.initial_lever_sigma_m", f.initial_lever_sigma_m),
        ] {
            check(name, v >= 0.0 && v.is_finite(), "must be finite and non-negative")?;
        }
        check("odometer.scale", self.odometer.scale > 0.0, "must be positive")?;
        check(
            "filter.initial_calibration.scale",
            f.initial_calibration.scale > 0.0,
            "must be positive",
        )?;
        if let Some(t) = &self.trajectory {
            check(
                "trajectory.origin_lat_deg",
                t.origin_lat_deg.abs() <= 90.0,
                "must lie in [-90, 90]",
            )?;
        }
        self.resolve().validate()
    }

    /// Converts to the SI configuration used by the harness.
    pub fn resolve(&self) -> HarnessConfig {
        let f = &self.filter;
        let tau = f.odo_tau_s;
        HarnessConfig {
            trajectory: self
                .trajectory
                .as_ref()
                .map_or_else(default_trajectory, TrajectoryConfig::resolve),
            budget: self.errors.resolve(),
            noise: NoiseConfig {
                gyro_arw: f.gyro_arw_deg_per_sqrt_h * DEG / 60.0,
                accel_vrw: f.accel_vrw_mps_per_sqrt_h / 60.0,
                odo_k_psd: NoiseConfig::gm_psd(f.odo_k_sigma, tau[0]),
                odo_pitch_psd: NoiseConfig::gm_psd(f.odo_pitch_sigma_deg * DEG, tau[1]),
                r_v: f.velocity_sigma_mps * f.velocity_sigma_mps,
            },
            rates: self.rates,
            gravity: self.gravity,
            gamma_at: self.gamma_at,
            sim_calib: self.odometer.resolve(tau),
            filter_calib: f.initial_calibration.resolve(tau),
            initial: InitialUncertainty {
                velocity: f.initial_velocity_sigma_mps,
                position: f.initial_position_sigma_m,
                odo_k: f.initial_odo_k_sigma,
                odo_angle: f.initial_odo_angle_sigma_deg * DEG,
                lever: f.initial_lever_sigma_m,
            },
            rmse_from: self.rmse_from_s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_harness_defaults() {
        let r = CampaignConfig::default().resolve();
        let h = HarnessConfig::default();
        assert_eq!(r.trajectory, h.trajectory);
        assert_eq!(r.rates, h.rates);
        assert!((r.budget.gyro_bias - h.budget.gyro_bias).abs() < 1e-20);
        assert!((r.budget.accel_bias - h.budget.accel_bias).abs() < 1e-15);
        assert!((r.noise.r_v - h.noise.r_v).abs() < 1e-15);
        assert!((r.noise.gyro_arw - h.noise.gyro_arw).abs() < 1e-20);
        assert!((r.initial.odo_angle - h.initial.odo_angle).abs() < 1e-18);
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = CampaignConfig::default();
        cfg.trajectory = Some(TrajectoryConfig::default());
        cfg.algorithms = vec![Tag::Ekf, Tag::ALgR];
        let back = CampaignConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.resolve().trajectory, default_trajectory());
    }

    #[test]
    fn parses_a_hand_written_file() {
        let cfg = CampaignConfig::from_toml(
            r#"
            trials = 20
            algorithms = ["EKF", "A_LG_R"]
            [rates]
            imu_hz = 200
            predict_hz = 100
            update_hz = 1
            [errors]
            yaw_error_deg = 10
            vibration = false
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        let h = cfg.resolve();
        assert!((h.budget.yaw_error - 10.0 * DEG).abs() < 1e-15);
        assert!(h.budget.vibration.is_none());
        assert_eq!(cfg.algorithms, vec![Tag::Ekf, Tag::ALgR]);
    }

    #[test]
    fn invalid_rate_ordering_names_the_field() {
        let mut cfg = CampaignConfig::default();
        cfg.rates.update_hz = 500.0;
        match cfg.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "rates.update_hz"),
            other => panic!("{other:?}"),
        }
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn unknown_keys_and_tags_are_config_errors() {
        assert!(CampaignConfig::from_toml("trails = 3").is_err());
        assert!(CampaignConfig::from_toml("algorithms = [\"UKF\"]").is_err());
        let e = CampaignConfig::from_toml("trials = 0").unwrap().validate();
        assert!(matches!(e, Err(Error::Config { .. })));
    }
}
