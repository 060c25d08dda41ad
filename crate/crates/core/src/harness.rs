//! Closed-loop filter runs and Monte-Carlo campaigns.
//!
//! A trial draws one set of sensor errors, synthesizes the IMU and odometer
//! streams once and feeds the same streams to every requested algorithm.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{make_world_frame, GravityModel, WorldFrame};
use crate::kalman::{self, FilterState};
use crate::mech::{omega_wb_b, Euler, ImuSample, NavState, Strapdown};
use crate::models::{
    apply_correction, build_f_g, build_h, idx, predict_measurement, process_noise_q,
    GammaEvaluation, ImuErrors, ModelContext, NoiseConfig, OdoCalib, StateMatrix, StateVector,
    Tag, STATE_DIM,
};
use crate::sim::{
    draw_trial, sample_truth, synthesize_imu, synthesize_odo, ErrorBudget, OdoSample,
    TrajectorySpec, TrialDraws, TrialSeed, TruthStream,
};

/// Sensor and filter rates, Hz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub imu_hz: f64,
    pub predict_hz: f64,
    pub update_hz: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Rates {
            imu_hz: 200.0,
            predict_hz: 100.0,
            update_hz: 1.0,
        }
    }
}

fn integer_ratio(a: f64, b: f64) -> Option<usize> {
    let r = a / b;
    ((r - r.round()).abs() < 1e-9 && r.round() >= 1.0).then_some(r.round() as usize)
}

impl Rates {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rates.imu_hz", self.imu_hz),
            ("rates.predict_hz", self.predict_hz),
            ("rates.update_hz", self.update_hz),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(name, "must be positive"));
            }
        }
        if self.predict_hz > self.imu_hz {
            return Err(Error::config("rates.predict_hz", "exceeds rates.imu_hz"));
        }
        if self.update_hz > self.predict_hz {
            return Err(Error::config("rates.update_hz", "exceeds rates.predict_hz"));
        }
        if integer_ratio(self.imu_hz, self.predict_hz).is_none() {
            return Err(Error::config(
                "rates.predict_hz",
                "must divide rates.imu_hz evenly",
            ));
        }
        if integer_ratio(self.predict_hz, self.update_hz).is_none() {
            return Err(Error::config(
                "rates.update_hz",
                "must divide rates.predict_hz evenly",
            ));
        }
        Ok(())
    }

    /// IMU samples folded into one filter propagation.
    pub fn fold(&self) -> usize {
        integer_ratio(self.imu_hz, self.predict_hz).unwrap_or(1)
    }
}

/// Initial standard deviations of the states not covered by the error budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialUncertainty {
    /// m/s.
    pub velocity: f64,
    /// m.
    pub position: f64,
    pub odo_k: f64,
    /// rad.
    pub odo_angle: f64,
    /// m.
    pub lever: f64,
}

impl Default for InitialUncertainty {
    fn default() -> Self {
        InitialUncertainty {
            velocity: 0.1,
            position: 1.0,
            odo_k: 1e-3,
            odo_angle: 1e-3,
            lever: 0.01,
        }
    }
}

/// Everything a campaign needs besides the tag list and seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub trajectory: TrajectorySpec,
    pub budget: ErrorBudget,
    pub noise: NoiseConfig,
    pub rates: Rates,
    pub gravity: GravityModel,
    pub gamma_at: GammaEvaluation,
    /// Odometer calibration used to synthesize the measurements.
    pub sim_calib: OdoCalib,
    /// Initial calibration estimate handed to the filter.
    pub filter_calib: OdoCalib,
    pub initial: InitialUncertainty,
    /// Horizontal RMSE uses epochs at or after this time, s.
    pub rmse_from: f64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            trajectory: crate::sim::default_trajectory(),
            budget: ErrorBudget::default(),
            noise: NoiseConfig::default(),
            rates: Rates::default(),
            gravity: GravityModel::normal(),
            gamma_at: GammaEvaluation::Initial,
            sim_calib: OdoCalib::default(),
            filter_calib: OdoCalib::default(),
            initial: InitialUncertainty::default(),
            rmse_from: 200.0,
        }
    }
}

impl HarnessConfig {
    /// The same setup with every sensor error and initial error removed.
    pub fn noiseless() -> Self {
        HarnessConfig {
            budget: ErrorBudget::zero(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rates.validate()?;
        self.trajectory.validate()?;
        self.noise.validate()?;
        if !(self.rmse_from >= 0.0) {
            return Err(Error::config("rmse_from", "must be non-negative"));
        }
        for (name, calib) in [("sim_calib", &self.sim_calib), ("filter_calib", &self.filter_calib)] {
            if !(calib.k_odo > 0.0) || calib.tau.iter().any(|t| !(*t > 0.0)) {
                return Err(Error::config(name, "scale factor and tau must be positive"));
            }
        }
        Ok(())
    }

    /// Uniform draws contribute `a^2 / 3`; the rest comes from `initial`.
    pub fn initial_covariance(&self) -> StateMatrix {
        let b = &self.budget;
        let u = |a: f64| a * a / 3.0;
        let s = &self.initial;
        let mut d = StateVector::zeros();
        let mut fill = |at: usize, vals: [f64; 3]| {
            for (k, v) in vals.into_iter().enumerate() {
                d[at + k] = v;
            }
        };
        fill(idx::ATT, [u(b.roll_pitch_error), u(b.roll_pitch_error), u(b.yaw_error)]);
        fill(idx::VEL, [s.velocity.powi(2); 3]);
        fill(idx::POS, [s.position.powi(2); 3]);
        fill(idx::GYRO, [u(b.gyro_bias); 3]);
        fill(idx::ACCEL, [u(b.accel_bias); 3]);
        fill(idx::ODO_K, [s.odo_k.powi(2), s.odo_angle.powi(2), s.odo_angle.powi(2)]);
        fill(idx::ODO_LEVER, [s.lever.powi(2); 3]);
        StateMatrix::from_diagonal(&d)
    }
}

/// Sensor streams plus the initial navigation estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorLog {
    pub frame: WorldFrame,
    pub init: NavState,
    pub imu: Vec<ImuSample>,
    pub odo: Vec<OdoSample>,
}

/// Filter output at one odometer update, after the correction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Epoch {
    pub t: f64,
    pub nav: NavState,
    pub nis: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterRun {
    pub tag: Tag,
    pub epochs: Vec<Epoch>,
    pub imu_errors: ImuErrors,
    pub calib: OdoCalib,
}

fn compensate(s: &ImuSample, e: &ImuErrors, dt: f64) -> ImuSample {
    ImuSample {
        t: s.t,
        dtheta: s.dtheta - e.gyro_bias * dt,
        dvel: s.dvel - e.accel_bias * dt,
    }
}

/// Runs one algorithm over a sensor log: mechanization at the IMU rate,
/// propagation every `rates.fold()` samples, update and reset at every
/// odometer sample.
pub fn run_filter(tag: Tag, config: &HarnessConfig, log: &SensorLog) -> Result<FilterRun> {
    config.rates.validate()?;
    let fold = config.rates.fold();
    let ctx = ModelContext::new(log.frame.clone(), config.gravity, log.init.r_wb_w, config.gamma_at);
    let q = process_noise_q(&config.noise, &config.filter_calib);
    let r = Matrix3::identity() * config.noise.r_v;

    let mut sd = Strapdown::new(log.frame.clone(), config.gravity);
    let mut nav = log.init;
    let mut imu_errors = ImuErrors::default();
    let mut calib = config.filter_calib;
    let mut fs = FilterState::<STATE_DIM>::new(config.initial_covariance(), log.init.t);
    let mut epochs = Vec::with_capacity(log.odo.len());
    let mut odo = log.odo.iter().peekable();
    while odo.peek().is_some_and(|o| o.t <= log.init.t) {
        odo.next();
    }

    for chunk in log.imu.chunks(fold) {
        let t_start = nav.t;
        let mut dtheta = Vector3::zeros();
        let mut dvel = Vector3::zeros();
        for s in chunk {
            let c = compensate(s, &imu_errors, s.t - nav.t);
            dtheta += c.dtheta;
            dvel += c.dvel;
            nav = sd.step(&nav, &c)?;
        }
        let dt = nav.t - t_start;
        let omega_ib_b = dtheta / dt;
        let f_ib_b = dvel / dt;

        let (f, g) = build_f_g(tag, &ctx, &nav, &omega_ib_b, &f_ib_b, &calib);
        let (phi, qd) = kalman::discretize(&f, &g, &q, dt);
        fs = kalman::predict(&fs, &phi, &qd, dt)?;
        calib.decay(dt);

        let half = 0.5 * dt;
        while let Some(o) = odo.next_if(|o| o.t <= nav.t + half) {
            if o.t < t_start - half {
                continue;
            }
            let w = omega_wb_b(&nav, &omega_ib_b, &log.frame);
            let z = predict_measurement(&nav, &calib, &w) - Vector3::new(calib.k_odo * o.v_d, 0.0, 0.0);
            let h = build_h(tag, &ctx, &nav, &calib, &w, o.v_d);
            let (upd, nis) = kalman::update(&fs, &h, &r, &z)?;
            let corr = apply_correction(tag, &ctx, &nav, &upd.xhat)?;
            nav = corr.nav;
            corr.apply_to(&mut imu_errors, &mut calib);
            fs = FilterState {
                xhat: StateVector::zeros(),
                ..upd
            };
            epochs.push(Epoch { t: nav.t, nav, nis });
        }
    }
    Ok(FilterRun {
        tag,
        epochs,
        imu_errors,
        calib,
    })
}

/// Pure strapdown integration of the log, sampled at the odometer times.
pub fn run_free_inertial(config: &HarnessConfig, log: &SensorLog) -> Result<Vec<Epoch>> {
    let mut sd = Strapdown::new(log.frame.clone(), config.gravity);
    let mut nav = log.init;
    let mut out = Vec::with_capacity(log.odo.len());
    let mut odo = log.odo.iter().peekable();
    for s in &log.imu {
        let dt = s.t - nav.t;
        nav = sd.step(&nav, s)?;
        while odo.next_if(|o| o.t <= nav.t + 0.5 * dt).is_some() {
            out.push(Epoch {
                t: nav.t,
                nav,
                nis: f64::NAN,
            });
        }
    }
    Ok(out)
}

fn wrap(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Roll/pitch/yaw differences (wrapped), velocity difference and horizontal
/// position error norm of `est` relative to `truth`.
pub fn nav_errors(est: &NavState, truth: &NavState) -> (Vector3<f64>, Vector3<f64>, f64) {
    let (e, t) = (est.euler(), truth.euler());
    let att = Vector3::new(
        wrap(e.roll - t.roll),
        wrap(e.pitch - t.pitch),
        wrap(e.yaw - t.yaw),
    );
    let dr = est.r_wb_w - truth.r_wb_w;
    (att, est.v_wb_w - truth.v_wb_w, dr.x.hypot(dr.y))
}

/// Truth trajectory and world frame shared by every trial of a campaign.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub frame: WorldFrame,
    pub truth: TruthStream,
}

impl Scenario {
    pub fn new(config: &HarnessConfig) -> Result<Self> {
        config.validate()?;
        let o = config.trajectory.origin;
        let frame = make_world_frame(o[0], o[1], o[2])?;
        let truth = sample_truth(&config.trajectory, config.rates.imu_hz, &frame, &config.gravity)?;
        Ok(Scenario { frame, truth })
    }

    pub fn truth_at(&self, t: f64) -> Option<&NavState> {
        self.truth.index_of(t).map(|i| &self.truth.samples[i].nav)
    }

    /// Synthesizes the sensor streams of one trial and the perturbed
    /// initial estimate.
    pub fn simulate(&self, config: &HarnessConfig, seed: TrialSeed) -> (SensorLog, TrialDraws) {
        let draws = draw_trial(&config.budget, seed);
        let imu = synthesize_imu(&self.truth, &config.budget, &draws, seed);
        let odo = synthesize_odo(
            &self.truth,
            &self.frame,
            &config.budget,
            &config.sim_calib,
            seed,
            config.rates.update_hz,
        );
        let start = self.truth.samples[0].nav;
        let e = start.euler();
        let d = draws.attitude_error;
        let att = Euler::new(e.roll + d.roll, e.pitch + d.pitch, e.yaw + d.yaw).to_rotation();
        let init = NavState { c_bw: att, ..start };
        let log = SensorLog {
            frame: self.frame.clone(),
            init,
            imu,
            odo,
        };
        (log, draws)
    }
}

/// Error series of one algorithm on one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub tag: Tag,
    pub seed: TrialSeed,
    pub t: Vec<f64>,
    pub att: Vec<Vector3<f64>>,
    pub vel: Vec<Vector3<f64>>,
    pub hpos: Vec<f64>,
    pub nis: Vec<f64>,
    pub calib: OdoCalib,
    pub imu_errors: ImuErrors,
}

impl TrialResult {
    /// Scores a filter run against the truth at each epoch.
    pub fn score(run: &FilterRun, seed: TrialSeed, truth: impl Fn(f64) -> Option<NavState>) -> Result<Self> {
        let n = run.epochs.len();
        let mut out = TrialResult {
            tag: run.tag,
            seed,
            t: Vec::with_capacity(n),
            att: Vec::with_capacity(n),
            vel: Vec::with_capacity(n),
            hpos: Vec::with_capacity(n),
            nis: Vec::with_capacity(n),
            calib: run.calib,
            imu_errors: run.imu_errors,
        };
        for e in &run.epochs {
            let tr = truth(e.t)
                .ok_or_else(|| Error::dataset("truth", 0, format!("no truth sample at t = {}", e.t)))?;
            let (a, v, h) = nav_errors(&e.nav, &tr);
            out.t.push(e.t);
            out.att.push(a);
            out.vel.push(v);
            out.hpos.push(h);
            out.nis.push(e.nis);
        }
        Ok(out)
    }
}

/// Full closed-loop run of one algorithm on one seeded trial.
pub fn run_trial(
    tag: Tag,
    scenario: &Scenario,
    config: &HarnessConfig,
    seed: TrialSeed,
) -> Result<TrialResult> {
    let (log, _) = scenario.simulate(config, seed);
    let run = run_filter(tag, config, &log)?;
    TrialResult::score(&run, seed, |t| scenario.truth_at(t).copied())
}

/// Per-epoch ensemble statistics of one algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct TagSeries {
    pub tag: Tag,
    /// Mean signed attitude error, rad.
    pub e_att: Vec<Vector3<f64>>,
    /// Mean signed velocity error, m/s.
    pub e_vel: Vec<Vector3<f64>>,
    /// RMS horizontal position error across trials, m.
    pub e_hpos: Vec<f64>,
    /// Horizontal RMSE over all trials and epochs from `rmse_from`.
    pub rmse: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignResult {
    pub m: usize,
    pub base_seed: u64,
    pub epochs: Vec<f64>,
    pub series: Vec<TagSeries>,
    /// Trials grouped by trial index, tags in campaign order.
    pub trials: Vec<Vec<TrialResult>>,
    pub config: HarnessConfig,
}

/// Horizontal RMSE of a set of trials over the epochs at or after `from`.
pub fn horizontal_rmse<'a>(trials: impl IntoIterator<Item = &'a TrialResult>, from: f64) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for tr in trials {
        for (t, h) in tr.t.iter().zip(&tr.hpos) {
            if *t >= from - 1e-9 {
                sum += h * h;
                n += 1;
            }
        }
    }
    if n == 0 {
        f64::NAN
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Ensemble means of the attitude and velocity errors and RMS of the
/// horizontal error, per epoch.
pub fn aggregate(tag: Tag, trials: &[&TrialResult], from: f64) -> TagSeries {
    let n = trials.first().map_or(0, |t| t.t.len());
    let m = trials.len() as f64;
    let mut e_att = vec![Vector3::zeros(); n];
    let mut e_vel = vec![Vector3::zeros(); n];
    let mut e_hpos = vec![0.0; n];
    for tr in trials {
        for k in 0..n {
            e_att[k] += tr.att[k];
            e_vel[k] += tr.vel[k];
            e_hpos[k] += tr.hpos[k] * tr.hpos[k];
        }
    }
    for k in 0..n {
        e_att[k] /= m;
        e_vel[k] /= m;
        e_hpos[k] = (e_hpos[k] / m).sqrt();
    }
    TagSeries {
        tag,
        e_att,
        e_vel,
        e_hpos,
        rmse: horizontal_rmse(trials.iter().copied(), from),
    }
}

/// Runs `m` trials of every tag. Trial `i` uses seed `(base_seed, i)` for all
/// tags, so algorithms see identical sensor data and adding trials leaves
/// earlier ones unchanged.
pub fn run_campaign(
    tags: &[Tag],
    m: usize,
    base_seed: u64,
    config: &HarnessConfig,
) -> Result<CampaignResult> {
    if m == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let scenario = Scenario::new(config)?;
    let trials: Vec<Vec<TrialResult>> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let seed = TrialSeed::new(base_seed, i);
            let (log, _) = scenario.simulate(config, seed);
            tags.iter()
                .map(|&tag| {
                    let run = run_filter(tag, config, &log)?;
                    TrialResult::score(&run, seed, |t| scenario.truth_at(t).copied())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let epochs = trials
        .first()
        .and_then(|ts| ts.first())
        .map(|t| t.t.clone())
        .unwrap_or_default();
    let series = tags
        .iter()
        .enumerate()
        .map(|(j, &tag)| {
            let per_tag: Vec<&TrialResult> = trials.iter().map(|ts| &ts[j]).collect();
            aggregate(tag, &per_tag, config.rmse_from)
        })
        .collect();
    Ok(CampaignResult {
        m,
        base_seed,
        epochs,
        series,
        trials,
        config: config.clone(),
    })
}

/// One row of the RMSE table.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub tag: Tag,
    pub trials: usize,
    pub rmse: f64,
    pub final_hpos: f64,
}

impl SummaryRow {
    pub const COLUMNS: [&'static str; 5] = ["tag", "name", "trials", "rmse_m", "final_hpos_rms_m"];
}

/// Per-algorithm RMSE table in campaign order.
pub fn summarize(result: &CampaignResult) -> Vec<SummaryRow> {
    result
        .series
        .iter()
        .map(|s| SummaryRow {
            tag: s.tag,
            trials: result.m,
            rmse: s.rmse,
            final_hpos: s.e_hpos.last().copied().unwrap_or(f64::NAN),
        })
        .collect()
}

#[cfg(test)]
mod tests;
