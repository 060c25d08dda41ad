//! Seeded IMU and odometer synthesis.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::RngExt;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::trajectory::TruthStream;
use super::{trial_rng, RngPurpose, TrialSeed};
use crate::frames::WorldFrame;
use crate::mech::{omega_wb_b, Euler, ImuSample};
use crate::models::OdoCalib;

const DEG: f64 = PI / 180.0;
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Amplitude-modulated carrier added to every IMU channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VibrationConfig {
    pub carrier_hz: f64,
    /// Peak modulation on each accelerometer channel, m/s^2.
    pub accel_bound: f64,
    /// Peak modulation on each gyro channel, rad/s.
    pub gyro_bound: f64,
    /// Highest frequency in the modulation signal, Hz.
    pub modulation_hz: f64,
}

impl Default for VibrationConfig {
    fn default() -> Self {
        VibrationConfig {
            carrier_hz: 333.0,
            accel_bound: 0.1 * STANDARD_GRAVITY,
            gyro_bound: 0.1 * DEG,
            modulation_hz: 1.0,
        }
    }
}

/// Distributions of the per-trial sensor errors (SI units).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Gyro bias drawn from U(-a, a), rad/s.
    pub gyro_bias: f64,
    /// Accelerometer bias drawn from U(-a, a), m/s^2.
    pub accel_bias: f64,
    /// Initial roll and pitch errors drawn from U(-a, a), rad.
    pub roll_pitch_error: f64,
    /// Initial yaw error drawn from U(-a, a), rad.
    pub yaw_error: f64,
    /// rad/sqrt(s).
    pub gyro_arw: f64,
    /// m/s/sqrt(s).
    pub accel_vrw: f64,
    /// Odometer speed noise standard deviation, m/s.
    pub odo_sigma: f64,
    pub vibration: Option<VibrationConfig>,
    /// Stationary standard deviation of a drifting scale factor.
    pub odo_k_sigma: f64,
    /// Stationary standard deviation of a drifting pitch installation angle, rad.
    pub odo_pitch_sigma: f64,
}

impl Default for ErrorBudget {
    fn default() -> Self {
        ErrorBudget {
            gyro_bias: 0.1 * DEG / 3600.0,
            accel_bias: 100e-6 * STANDARD_GRAVITY,
            roll_pitch_error: 1.0 * DEG,
            yaw_error: 30.0 * DEG,
            gyro_arw: 0.005 * DEG / 60.0,
            accel_vrw: 1.2e-2 / 60.0,
            odo_sigma: 0.1,
            vibration: Some(VibrationConfig::default()),
            odo_k_sigma: 0.0,
            odo_pitch_sigma: 0.0,
        }
    }
}

impl ErrorBudget {
    /// No errors of any kind.
    pub fn zero() -> Self {
        ErrorBudget {
            gyro_bias: 0.0,
            accel_bias: 0.0,
            roll_pitch_error: 0.0,
            yaw_error: 0.0,
            gyro_arw: 0.0,
            accel_vrw: 0.0,
            odo_sigma: 0.0,
            vibration: None,
            odo_k_sigma: 0.0,
            odo_pitch_sigma: 0.0,
        }
    }
}

/// One sinusoid of the modulation signal.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Tone {
    amp: f64,
    omega: f64,
    phase: f64,
}

/// `m(t) sin(w_c t + phi)` with `m` a sum of slow tones.
#[derive(Clone, Debug, PartialEq)]
pub struct VibrationChannel {
    carrier: f64,
    carrier_phase: f64,
    tones: Vec<Tone>,
}

impl VibrationChannel {
    fn draw(rng: &mut ChaCha12Rng, cfg: &VibrationConfig, bound: f64) -> Self {
        let n = 4;
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let peak = bound * rng.random_range(0.5..0.999);
        let tones = weights
            .iter()
            .map(|w| Tone {
                amp: peak * w / total,
                omega: 2.0 * PI * rng.random_range(0.05..cfg.modulation_hz),
                phase: rng.random_range(0.0..2.0 * PI),
            })
            .collect();
        VibrationChannel {
            carrier: 2.0 * PI * cfg.carrier_hz,
            carrier_phase: rng.random_range(0.0..2.0 * PI),
            tones,
        }
    }

    /// Instantaneous value.
    pub fn value(&self, t: f64) -> f64 {
        let m: f64 = self
            .tones
            .iter()
            .map(|k| k.amp * (k.omega * t + k.phase).sin())
            .sum();
        m * (self.carrier * t + self.carrier_phase).sin()
    }

    /// Exact integral over `[t0, t1]`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        let int_cos = |w: f64, b: f64| ((w * t1 + b).sin() - (w * t0 + b).sin()) / w;
        self.tones
            .iter()
            .map(|k| {
                let lo = int_cos(self.carrier - k.omega, self.carrier_phase - k.phase);
                let hi = int_cos(self.carrier + k.omega, self.carrier_phase + k.phase);
                0.5 * k.amp * (lo - hi)
            })
            .sum()
    }

    /// Zero-mean antiderivative, ignoring the slow drift of the envelope.
    pub fn antiderivative(&self, t: f64) -> f64 {
        self.tones
            .iter()
            .map(|k| {
                let a = self.carrier - k.omega;
                let b = self.carrier + k.omega;
                0.5 * k.amp
                    * ((a * t + self.carrier_phase - k.phase).sin() / a
                        - (b * t + self.carrier_phase + k.phase).sin() / b)
            })
            .sum()
    }
}

/// Vibration of the three gyro and three accelerometer channels.
#[derive(Clone, Debug, PartialEq)]
pub struct Vibration {
    pub gyro: [VibrationChannel; 3],
    pub accel: [VibrationChannel; 3],
}

/// Everything drawn once per trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialDraws {
    pub gyro_bias: Vector3<f64>,
    pub accel_bias: Vector3<f64>,
    /// Initial attitude error as roll, pitch and yaw offsets.
    pub attitude_error: Euler,
    pub vibration: Option<Vibration>,
}

fn uniform3(rng: &mut ChaCha12Rng, a: f64) -> Vector3<f64> {
    if a == 0.0 {
        return Vector3::zeros();
    }
    Vector3::new(
        rng.random_range(-a..a),
        rng.random_range(-a..a),
        rng.random_range(-a..a),
    )
}

fn uniform(rng: &mut ChaCha12Rng, a: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        rng.random_range(-a..a)
    }
}

pub fn draw_trial(budget: &ErrorBudget, seed: TrialSeed) -> TrialDraws {
    let mut rng = trial_rng(seed, RngPurpose::Draws);
    let gyro_bias = uniform3(&mut rng, budget.gyro_bias);
    let accel_bias = uniform3(&mut rng, budget.accel_bias);
    let attitude_error = Euler::new(
        uniform(&mut rng, budget.roll_pitch_error),
        uniform(&mut rng, budget.roll_pitch_error),
        uniform(&mut rng, budget.yaw_error),
    );
    let vibration = budget.vibration.map(|cfg| Vibration {
        gyro: std::array::from_fn(|_| VibrationChannel::draw(&mut rng, &cfg, cfg.gyro_bound)),
        accel: std::array::from_fn(|_| VibrationChannel::draw(&mut rng, &cfg, cfg.accel_bound)),
    });
    TrialDraws {
        gyro_bias,
        accel_bias,
        attitude_error,
        vibration,
    }
}

fn normal3(rng: &mut ChaCha12Rng) -> Vector3<f64> {
    Vector3::new(
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    )
}

/// IMU increments: exact truth increments plus bias, white noise and vibration.
pub fn synthesize_imu(
    truth: &TruthStream,
    budget: &ErrorBudget,
    draws: &TrialDraws,
    seed: TrialSeed,
) -> Vec<ImuSample> {
    let mut rng = trial_rng(seed, RngPurpose::Imu);
    let dt = truth.dt();
    let sg = budget.gyro_arw * dt.sqrt();
    let sa = budget.accel_vrw * dt.sqrt();
    let noisy = sg > 0.0 || sa > 0.0;
    truth
        .samples
        .windows(2)
        .map(|w| {
            let (t0, t1) = (w[0].t, w[1].t);
            let mut dtheta = w[1].dtheta + draws.gyro_bias * dt;
            let mut dvel = w[1].dvel + draws.accel_bias * dt;
            if noisy {
                dtheta += normal3(&mut rng) * sg;
                dvel += normal3(&mut rng) * sa;
            }
            if let Some(v) = &draws.vibration {
                for k in 0..3 {
                    dtheta[k] += v.gyro[k].integral(t0, t1);
                    dvel[k] += v.accel[k].integral(t0, t1);
                }
            }
            ImuSample {
                t: t1,
                dtheta,
                dvel,
            }
        })
        .collect()
}

/// Forward odometer speed sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdoSample {
    pub t: f64,
    pub v_d: f64,
}

/// First-order Gauss-Markov process `x' = -x/tau + w` sampled exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussMarkov {
    pub tau: f64,
    /// Stationary standard deviation.
    pub sigma: f64,
    pub value: f64,
}

impl GaussMarkov {
    pub fn step(&mut self, dt: f64, rng: &mut ChaCha12Rng) -> f64 {
        let a = (-dt / self.tau).exp();
        let n: f64 = StandardNormal.sample(rng);
        self.value = a * self.value + self.sigma * (1.0 - a * a).sqrt() * n;
        self.value
    }
}

/// Odometer speeds at `rate` Hz: forward odometer-frame truth velocity
/// divided by the scale factor, plus white noise.
///
/// With nonzero `odo_k_sigma` or `odo_pitch_sigma` in the budget, the scale
/// factor and pitch installation drift as Gauss-Markov processes around
/// `calib`.
pub fn synthesize_odo(
    truth: &TruthStream,
    frame: &WorldFrame,
    budget: &ErrorBudget,
    calib: &OdoCalib,
    seed: TrialSeed,
    rate: f64,
) -> Vec<OdoSample> {
    let mut rng = trial_rng(seed, RngPurpose::Odo);
    let mut gm_rng = trial_rng(seed, RngPurpose::OdoDrift);
    let stride = (truth.rate / rate).round() as usize;
    let dt_imu = truth.dt();
    let mut k = GaussMarkov {
        tau: calib.tau[0],
        sigma: budget.odo_k_sigma,
        value: 0.0,
    };
    let mut pitch = GaussMarkov {
        tau: calib.tau[1],
        sigma: budget.odo_pitch_sigma,
        value: 0.0,
    };
    let drifting = budget.odo_k_sigma > 0.0 || budget.odo_pitch_sigma > 0.0;
    truth
        .samples
        .iter()
        .skip(stride)
        .step_by(stride)
        .map(|s| {
            let mut c = *calib;
            if drifting {
                c.k_odo += k.step(1.0 / rate, &mut gm_rng);
                c.alpha_pitch += pitch.step(1.0 / rate, &mut gm_rng);
            }
            let w = omega_wb_b(&s.nav, &s.omega_ib_b(dt_imu), frame);
            let v_m = c.c_bm() * (s.nav.c_bw.transpose() * s.nav.v_wb_w + w.cross(&c.lever_b));
            let noise = if budget.odo_sigma > 0.0 {
                let z: f64 = StandardNormal.sample(&mut rng);
                budget.odo_sigma * z
            } else {
                0.0
            };
            OdoSample {
                t: s.t,
                v_d: v_m.x / c.k_odo + noise,
            }
        })
        .collect()
}
