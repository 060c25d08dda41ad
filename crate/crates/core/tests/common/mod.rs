//! Finite-difference oracles for the filter Jacobians.
//!
//! The error of an estimate with respect to a truth state is computed from
//! the exact group definitions, both states are flowed forward and backward
//! under the continuous dynamics, and the rate of change of the error is
//! differentiated numerically along each error coordinate.

#![allow(dead_code)]

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use se23nav::frames::{GravityModel, WorldFrame, EARTH_RATE};
use se23nav::lie::{se23_exp, se23_log, skew, so3_exp, so3_log, Rotation, Se23Element, Twist9};
use se23nav::models::{build_f_g, build_h, GammaEvaluation, ModelContext, OdoCalib, Tag};

pub type V3 = Vector3<f64>;
pub type E21 = SVector<f64, 21>;
pub type M21 = SMatrix<f64, 21, 21>;
pub type M3x21 = SMatrix<f64, 3, 21>;

/// Navigation part of a state.
#[derive(Clone, Copy, Debug)]
pub struct Nav {
    pub c: Matrix3<f64>,
    pub v: V3,
    pub r: V3,
}

/// Earth model used by an oracle run.
#[derive(Clone, Debug)]
pub struct Setup {
    pub frame: WorldFrame,
    pub gravity: GravityModel,
    pub r0: V3,
    pub gamma_at: GammaEvaluation,
}

impl Setup {
    pub fn ctx(&self) -> ModelContext {
        ModelContext::new(self.frame.clone(), self.gravity, self.r0, self.gamma_at)
    }

    fn omega(&self) -> V3 {
        self.frame.omega_ie_w
    }

    fn g(&self, r: &V3) -> V3 {
        self.gravity.gravity_w(&self.frame, r)
    }
}

/// Real earth, normal gravity, gravitation evaluated at the current position.
pub fn setup_real_current() -> Setup {
    Setup {
        frame: WorldFrame::with_earth_rate(0.53, 1.9, 40.0, EARTH_RATE).unwrap(),
        gravity: GravityModel::normal(),
        r0: V3::new(12.0, -7.0, 1.0),
        gamma_at: GammaEvaluation::Current,
    }
}

/// Real earth with the default evaluation at the reference position.
pub fn setup_real_initial() -> Setup {
    Setup {
        gamma_at: GammaEvaluation::Initial,
        ..setup_real_current()
    }
}

/// Earth spinning 50 times faster with constant gravity, so that the
/// earth-rate couplings are large enough to be checked sharply.
pub fn setup_fast_earth() -> Setup {
    Setup {
        frame: WorldFrame::with_earth_rate(0.9, 0.0, 0.0, 50.0 * EARTH_RATE).unwrap(),
        gravity: GravityModel::constant(),
        r0: V3::new(3.0, 2.0, 0.0),
        gamma_at: GammaEvaluation::Initial,
    }
}

fn group_velocity(tag: Tag, s: &Setup, n: &Nav) -> V3 {
    match tag {
        Tag::ALgR | Tag::ALgL => n.v + s.omega().cross(&(n.r - s.r0)),
        _ => n.v,
    }
}

fn to_group(tag: Tag, s: &Setup, n: &Nav) -> Se23Element {
    Se23Element::new(
        Rotation::from_matrix_unchecked(n.c),
        group_velocity(tag, s, n),
        n.r - s.r0,
    )
}

fn from_group(tag: Tag, s: &Setup, x: &Se23Element) -> Nav {
    let r = x.rho + s.r0;
    let v = match tag {
        Tag::ALgR | Tag::ALgL => x.nu - s.omega().cross(&x.rho),
        _ => x.nu,
    };
    Nav {
        c: *x.rotation.matrix(),
        v,
        r,
    }
}

/// Exact navigation error of `est` relative to `truth`.
pub fn nav_error(tag: Tag, s: &Setup, truth: &Nav, est: &Nav) -> SVector<f64, 9> {
    match tag {
        Tag::Ekf => {
            let phi = so3_log(&Rotation::from_matrix_unchecked(truth.c * est.c.transpose())).unwrap();
            let mut e = SVector::<f64, 9>::zeros();
            e.fixed_rows_mut::<3>(0).copy_from(&phi);
            e.fixed_rows_mut::<3>(3).copy_from(&(est.v - truth.v));
            e.fixed_rows_mut::<3>(6).copy_from(&(est.r - truth.r));
            e
        }
        Tag::LgR | Tag::ALgR => {
            let x = to_group(tag, s, truth);
            let xe = to_group(tag, s, est);
            se23_log(&(x * xe.inverse())).unwrap().to_vector()
        }
        Tag::LgL | Tag::ALgL => {
            let x = to_group(tag, s, truth);
            let xe = to_group(tag, s, est);
            let z = se23_log(&(xe.inverse() * x)).unwrap();
            Twist9::new(-z.phi, z.nu, z.rho).to_vector()
        }
    }
}

/// Estimate whose exact error relative to `truth` is `e`.
pub fn inject_nav(tag: Tag, s: &Setup, truth: &Nav, e: &SVector<f64, 9>) -> Nav {
    let t = Twist9::from_vector(e);
    match tag {
        Tag::Ekf => Nav {
            c: so3_exp(&-t.phi).matrix() * truth.c,
            v: truth.v + t.nu,
            r: truth.r + t.rho,
        },
        Tag::LgR | Tag::ALgR => {
            let x = to_group(tag, s, truth);
            from_group(tag, s, &(se23_exp(&-t) * x))
        }
        Tag::LgL | Tag::ALgL => {
            let x = to_group(tag, s, truth);
            let z = Twist9::new(-t.phi, t.nu, t.rho);
            from_group(tag, s, &(x * se23_exp(&z).inverse()))
        }
    }
}

/// Flows `n` for time `t` under constant body rate `w` and specific force `f`.
pub fn flow(s: &Setup, n: &Nav, w: &V3, f: &V3, t: f64) -> Nav {
    let om = s.omega();
    let att = |tau: f64| so3_exp(&(-om * tau)).matrix() * n.c * so3_exp(&(w * tau)).matrix();
    let accel = |tau: f64, v: &V3, r: &V3| att(tau) * f + s.g(r) - 2.0 * om.cross(v);
    let steps = 8;
    let h = t / steps as f64;
    let (mut v, mut r) = (n.v, n.r);
    for k in 0..steps {
        let t0 = k as f64 * h;
        let k1v = accel(t0, &v, &r);
        let k1r = v;
        let k2v = accel(t0 + h / 2.0, &(v + k1v * h / 2.0), &(r + k1r * h / 2.0));
        let k2r = v + k1v * h / 2.0;
        let k3v = accel(t0 + h / 2.0, &(v + k2v * h / 2.0), &(r + k2r * h / 2.0));
        let k3r = v + k2v * h / 2.0;
        let k4v = accel(t0 + h, &(v + k3v * h), &(r + k3r * h));
        let k4r = v + k3v * h;
        v += (k1v + 2.0 * k2v + 2.0 * k3v + k4v) * (h / 6.0);
        r += (k1r + 2.0 * k2r + 2.0 * k3r + k4r) * (h / 6.0);
    }
    Nav { c: att(t), v, r }
}

/// A linearization point: truth state, true rates and calibration.
#[derive(Clone, Copy, Debug)]
pub struct Point {
    pub nav: Nav,
    pub w: V3,
    pub f: V3,
    pub calib: OdoCalib,
}

/// Error rate at error `e` by a fourth-order central stencil in time.
fn error_rate(tag: Tag, s: &Setup, p: &Point, e: &E21) -> E21 {
    let h = 1e-3;
    let nav_e = e.fixed_rows::<9>(0).into_owned();
    let est = inject_nav(tag, s, &p.nav, &nav_e);
    let eps = e.fixed_rows::<3>(9).into_owned();
    let nab = e.fixed_rows::<3>(12).into_owned();
    let w_est = p.w + eps;
    let f_est = p.f + nab;
    let at = |dt: f64| -> E21 {
        let tr = flow(s, &p.nav, &p.w, &p.f, dt);
        let es = flow(s, &est, &w_est, &f_est, dt);
        let mut out = E21::zeros();
        out.fixed_rows_mut::<9>(0).copy_from(&nav_error(tag, s, &tr, &es));
        out.fixed_rows_mut::<6>(9).copy_from(&e.fixed_rows::<6>(9));
        for j in 0..3 {
            out[15 + j] = e[15 + j] * (-dt / p.calib.tau[j]).exp();
        }
        out.fixed_rows_mut::<3>(18).copy_from(&e.fixed_rows::<3>(18));
        out
    };
    (at(-2.0 * h) - at(2.0 * h) + (at(h) - at(-h)) * 8.0) / (12.0 * h)
}

/// Numerical Jacobian of the error dynamics at zero error.
pub fn numeric_f(tag: Tag, s: &Setup, p: &Point) -> M21 {
    let d = 1e-4;
    let mut f = M21::zeros();
    for j in 0..21 {
        let mut e = E21::zeros();
        e[j] = d;
        let col = (error_rate(tag, s, p, &e) - error_rate(tag, s, p, &-e)) / (2.0 * d);
        f.set_column(j, &col);
    }
    f
}

/// Innovation seen by a filter holding the injected estimate.
fn innovation(tag: Tag, s: &Setup, p: &Point, w_wb: &V3, v_d: f64, e: &E21) -> V3 {
    let nav_e = e.fixed_rows::<9>(0).into_owned();
    let est = inject_nav(tag, s, &p.nav, &nav_e);
    let k_hat = p.calib.k_odo + e[15];
    let a = V3::new(0.0, p.calib.alpha_pitch - e[16], p.calib.alpha_yaw - e[17]);
    let l_hat = p.calib.lever_b - e.fixed_rows::<3>(18).into_owned();
    let pred = so3_exp(&a).matrix() * (est.c.transpose() * est.v + w_wb.cross(&l_hat));
    pred - V3::new(k_hat * v_d, 0.0, 0.0)
}

/// Numerical measurement Jacobian at zero error.
pub fn numeric_h(tag: Tag, s: &Setup, p: &Point, w_wb: &V3, v_d: f64) -> M3x21 {
    let d = 1e-5;
    let mut h = M3x21::zeros();
    for j in 0..21 {
        let mut e = E21::zeros();
        e[j] = d;
        let col = (innovation(tag, s, p, w_wb, v_d, &e) - innovation(tag, s, p, w_wb, v_d, &-e)) / (2.0 * d);
        h.set_column(j, &col);
    }
    h
}

pub fn rand_v3(rng: &mut ChaCha8Rng, scale: f64) -> V3 {
    V3::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random truth point: attitude anywhere, vehicle-like speeds and rates,
/// position within `pos_scale` of `r0`.
pub fn random_point(rng: &mut ChaCha8Rng, s: &Setup, pos_scale: f64) -> Point {
    let c = *so3_exp(&rand_v3(rng, 1.7)).matrix();
    let r = s.r0 + rand_v3(rng, pos_scale);
    let g = s.g(&r);
    let calib = OdoCalib {
        lever_b: rand_v3(rng, 1.0),
        tau: [
            rng.random_range(100.0..5000.0),
            rng.random_range(100.0..5000.0),
            rng.random_range(100.0..5000.0),
        ],
        ..OdoCalib::default()
    };
    Point {
        nav: Nav {
            c,
            v: rand_v3(rng, 15.0),
            r,
        },
        w: rand_v3(rng, 0.2),
        f: c.transpose() * (-g) + rand_v3(rng, 2.0),
        calib,
    }
}

/// Sets the truth velocity so the odometer frame sees pure forward motion
/// at `speed` (nominal calibration), returning `omega_wb^b`.
pub fn make_nonholonomic(s: &Setup, p: &mut Point, speed: f64) -> V3 {
    let w_wb = p.w - p.nav.c.transpose() * s.omega();
    let v_b = V3::new(speed, 0.0, 0.0) - w_wb.cross(&p.calib.lever_b);
    p.nav.v = p.nav.c * v_b;
    w_wb
}

pub fn rel_err<const R: usize, const C: usize>(a: &SMatrix<f64, R, C>, b: &SMatrix<f64, R, C>) -> f64 {
    (a - b).amax() / b.amax().max(1e-300)
}

pub fn to_nav_state(n: &Nav) -> se23nav::mech::NavState {
    se23nav::mech::NavState::new(Rotation::from_matrix_unchecked(n.c), n.v, n.r, 0.0)
}

/// First-order error coordinates of an estimate built as
/// `C_hat = exp(-phi) C`, `v_hat = v + dv`, `r_hat = r + dr`.
pub fn first_order_error(tag: Tag, s: &Setup, truth: &Nav, phi: &V3, dv: &V3, dr: &V3) -> SVector<f64, 9> {
    let om = s.omega();
    let p = truth.r - s.r0;
    let c_hat = so3_exp(&-phi).matrix() * truth.c;
    let (a, b, c) = match tag {
        Tag::Ekf => (*phi, *dv, *dr),
        Tag::LgR => (*phi, -dv + truth.v.cross(phi), -dr + p.cross(phi)),
        Tag::ALgR => {
            let u = truth.v + om.cross(&p);
            (*phi, -(dv + om.cross(dr)) + u.cross(phi), -dr + p.cross(phi))
        }
        Tag::LgL => (-(truth.c.transpose() * phi), -(c_hat.transpose() * dv), -(c_hat.transpose() * dr)),
        Tag::ALgL => (
            -(truth.c.transpose() * phi),
            -(c_hat.transpose() * (dv + om.cross(dr))),
            -(c_hat.transpose() * dr),
        ),
    };
    Twist9::new(a, b, c).to_vector()
}

pub fn skew3(v: &V3) -> Matrix3<f64> {
    skew(v)
}

/// Random states checked per setup.
pub const STATES: usize = 20;

pub fn check_f(tag: Tag, s: &Setup, pos_scale: f64, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let ctx = s.ctx();
    let mut worst: f64 = 0.0;
    for _ in 0..STATES {
        let p = random_point(&mut rng, s, pos_scale);
        let (f, _) = build_f_g(tag, &ctx, &to_nav_state(&p.nav), &p.w, &p.f, &p.calib);
        worst = worst.max(rel_err(&numeric_f(tag, s, &p), &f));
    }
    worst
}

pub fn check_h(tag: Tag, s: &Setup, pos_scale: f64, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let ctx = s.ctx();
    let mut worst: f64 = 0.0;
    for _ in 0..STATES {
        let mut p = random_point(&mut rng, s, pos_scale);
        let speed = rng_speed(&mut rng);
        let w_wb = make_nonholonomic(s, &mut p, speed);
        let h = build_h(tag, &ctx, &to_nav_state(&p.nav), &p.calib, &w_wb, speed);
        worst = worst.max(rel_err(&numeric_h(tag, s, &p, &w_wb, speed), &h));
    }
    worst
}

fn rng_speed(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.5..20.0)
}
