//! Closed-form ground-vehicle trajectory and its exact IMU increments.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{GravityModel, WorldFrame};
use crate::mech::{inverse_propagate, Euler, ImuSample, NavState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Stationary,
    /// `value`: along-track acceleration, m/s^2.
    Accelerate,
    Cruise,
    /// `value`: yaw rate, rad/s, positive to the left.
    Turn,
    /// `value`: height gained, m, with a raised-cosine vertical speed.
    Climb,
    /// `value`: along-track acceleration, m/s^2 (negative).
    Decelerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub duration: f64,
    #[serde(default)]
    pub value: f64,
}

impl Segment {
    pub fn new(kind: SegmentKind, duration: f64, value: f64) -> Self {
        Segment {
            kind,
            duration,
            value,
        }
    }
}

/// Ordered segments driven from rest at the world origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub segments: Vec<Segment>,
    /// Geodetic origin (rad, rad, m).
    pub origin: [f64; 3],
    /// Initial heading, rad counter-clockwise from East.
    pub initial_heading: f64,
}

/// The 2510 s, ~22 km drive with two double turns and a short climb.
pub fn default_trajectory() -> TrajectorySpec {
    use SegmentKind::*;
    let deg = PI / 180.0;
    let turn = 2.0 * deg;
    let s = Segment::new;
    TrajectorySpec {
        segments: vec![
            s(Stationary, 100.0, 0.0),
            s(Accelerate, 100.0, 0.1),
            s(Cruise, 200.0, 0.0),
            s(Turn, 225.0, turn),
            s(Cruise, 200.0, 0.0),
            s(Turn, 225.0, -turn),
            s(Cruise, 200.0, 0.0),
            s(Climb, 10.0, 3.5),
            s(Cruise, 200.0, 0.0),
            s(Cruise, 200.0, 0.0),
            s(Cruise, 200.0, 0.0),
            s(Turn, 225.0, turn),
            s(Turn, 225.0, -turn),
            s(Decelerate, 100.0, -0.1),
            s(Stationary, 100.0, 0.0),
        ],
        origin: [28.2 * deg, 112.9 * deg, 50.0],
        initial_heading: 0.0,
    }
}

#[derive(Clone, Copy, Debug)]
struct Start {
    t: f64,
    pos: Vector3<f64>,
    heading: f64,
    speed: f64,
}

/// Pose, velocity and attitude of a [`TrajectorySpec`] at arbitrary times.
#[derive(Clone, Debug)]
pub struct Kinematics {
    segments: Vec<Segment>,
    starts: Vec<Start>,
    end: Start,
}

impl TrajectorySpec {
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::config("trajectory.segments", "no segments"));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration > 0.0) || !s.duration.is_finite() {
                return Err(Error::config(
                    format!("trajectory.segments[{i}].duration"),
                    "must be positive",
                ));
            }
        }
        let k = self.kinematics();
        for (i, st) in k.starts.iter().chain(std::iter::once(&k.end)).enumerate() {
            if st.speed < -1e-9 {
                return Err(Error::config(
                    format!("trajectory.segments[{}]", i.saturating_sub(1)),
                    "speed becomes negative",
                ));
            }
            let stops = self.segments.get(i).map(|s| s.kind) == Some(SegmentKind::Stationary);
            if stops && st.speed.abs() > 1e-9 {
                return Err(Error::config(
                    format!("trajectory.segments[{i}]"),
                    "stationary segment entered while moving",
                ));
            }
        }
        Ok(())
    }

    pub fn kinematics(&self) -> Kinematics {
        let mut starts = Vec::with_capacity(self.segments.len());
        let mut cur = Start {
            t: 0.0,
            pos: Vector3::zeros(),
            heading: self.initial_heading,
            speed: 0.0,
        };
        for seg in &self.segments {
            starts.push(cur);
            let (pos, _, heading, speed, _) = eval(seg, &cur, seg.duration);
            cur = Start {
                t: cur.t + seg.duration,
                pos,
                heading,
                speed,
            };
        }
        Kinematics {
            segments: self.segments.clone(),
            starts,
            end: cur,
        }
    }
}

/// Returns (position, velocity, heading, horizontal speed, pitch) at `tau`
/// seconds into `seg`.
fn eval(seg: &Segment, st: &Start, tau: f64) -> (Vector3<f64>, Vector3<f64>, f64, f64, f64) {
    let dir = |psi: f64| Vector3::new(psi.cos(), psi.sin(), 0.0);
    let psi = st.heading;
    match seg.kind {
        SegmentKind::Stationary => (st.pos, Vector3::zeros(), psi, 0.0, 0.0),
        SegmentKind::Cruise => (
            st.pos + dir(psi) * (st.speed * tau),
            dir(psi) * st.speed,
            psi,
            st.speed,
            0.0,
        ),
        SegmentKind::Accelerate | SegmentKind::Decelerate => {
            let a = seg.value;
            let s = st.speed + a * tau;
            (
                st.pos + dir(psi) * (st.speed * tau + 0.5 * a * tau * tau),
                dir(psi) * s,
                psi,
                s,
                0.0,
            )
        }
        SegmentKind::Turn => {
            let w = seg.value;
            let s = st.speed;
            let h = psi + w * tau;
            let offset = if w == 0.0 {
                dir(psi) * (s * tau)
            } else {
                Vector3::new(h.sin() - psi.sin(), psi.cos() - h.cos(), 0.0) * (s / w)
            };
            (st.pos + offset, dir(h) * s, h, s, 0.0)
        }
        SegmentKind::Climb => {
            let (hgt, big_t, s) = (seg.value, seg.duration, st.speed);
            let om = 2.0 * PI / big_t;
            let vz = hgt / big_t * (1.0 - (om * tau).cos());
            let z = hgt / big_t * (tau - (om * tau).sin() / om);
            let mut pos = st.pos + dir(psi) * (s * tau);
            pos.z += z;
            let mut vel = dir(psi) * s;
            vel.z = vz;
            (pos, vel, psi, s, vz.atan2(s))
        }
    }
}

impl Kinematics {
    pub fn duration(&self) -> f64 {
        self.end.t
    }

    fn locate(&self, t: f64) -> usize {
        match self.starts.binary_search_by(|s| s.t.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    /// Truth state at `t` (clamped to the trajectory span).
    pub fn state(&self, t: f64) -> NavState {
        let t = t.clamp(0.0, self.end.t);
        let i = self.locate(t);
        let st = &self.starts[i];
        let (pos, vel, heading, _, pitch) = eval(&self.segments[i], st, t - st.t);
        NavState::new(Euler::new(0.0, pitch, heading).to_rotation(), vel, pos, t)
    }

    /// Path length, summed over chords of `step` seconds.
    pub fn path_length(&self, step: f64) -> f64 {
        let n = (self.end.t / step).round() as usize;
        (0..n)
            .map(|k| {
                let a = self.state(k as f64 * step).r_wb_w;
                let b = self.state((k + 1) as f64 * step).r_wb_w;
                (b - a).norm()
            })
            .sum()
    }
}

/// One truth epoch together with the exact increments that lead to it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    pub nav: NavState,
    /// Increments over `(t - dt, t]`; zero for the first sample.
    pub dtheta: Vector3<f64>,
    pub dvel: Vector3<f64>,
}

impl TruthSample {
    /// Mean angular rate over the interval ending at `t`.
    pub fn omega_ib_b(&self, dt: f64) -> Vector3<f64> {
        self.dtheta / dt
    }

    /// Mean specific force over the interval ending at `t`.
    pub fn f_ib_b(&self, dt: f64) -> Vector3<f64> {
        self.dvel / dt
    }

    pub fn imu(&self) -> ImuSample {
        ImuSample {
            t: self.t,
            dtheta: self.dtheta,
            dvel: self.dvel,
        }
    }
}

/// Truth sampled at a fixed rate from `t = 0` to the end of the trajectory.
#[derive(Clone, Debug)]
pub struct TruthStream {
    pub rate: f64,
    pub samples: Vec<TruthSample>,
}

impl TruthStream {
    pub fn dt(&self) -> f64 {
        1.0 / self.rate
    }

    /// Index of the sample at time `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i = (t * self.rate).round();
        (i >= 0.0 && (i as usize) < self.samples.len() && (i / self.rate - t).abs() < 1e-9)
            .then_some(i as usize)
    }
}

/// Samples the trajectory at `rate` Hz and back-computes increments that the
/// mechanization in [`crate::mech`] integrates onto the sampled truth.
pub fn sample_truth(
    spec: &TrajectorySpec,
    rate: f64,
    frame: &WorldFrame,
    gravity: &GravityModel,
) -> Result<TruthStream> {
    if !(rate > 0.0) {
        return Err(Error::config("rates.imu_hz", "must be positive"));
    }
    spec.validate()?;
    let kin = spec.kinematics();
    let n = (kin.duration() * rate).round() as usize;
    let mut samples = Vec::with_capacity(n + 1);
    let mut prev = kin.state(0.0);
    samples.push(TruthSample {
        t: 0.0,
        nav: prev,
        dtheta: Vector3::zeros(),
        dvel: Vector3::zeros(),
    });
    for i in 1..=n {
        let t = i as f64 / rate;
        let mut next = kin.state(t);
        next.t = t;
        let inc = inverse_propagate(&prev, &next, frame, gravity)?;
        samples.push(TruthSample {
            t,
            nav: next,
            dtheta: inc.dtheta,
            dvel: inc.dvel,
        });
        prev = next;
    }
    Ok(TruthStream { rate, samples })
}

