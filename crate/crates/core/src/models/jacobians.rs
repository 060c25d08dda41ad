use nalgebra::{Matrix3, Vector3};

use super::{idx, MeasMatrix, ModelContext, NoiseGain, OdoCalib, StateMatrix, Tag};
use crate::lie::skew;
use crate::mech::NavState;

fn put(m: &mut StateMatrix, r: usize, c: usize, b: &Matrix3<f64>) {
    m.fixed_view_mut::<3, 3>(r, c).copy_from(b);
}

/// Continuous-time `F` (21x21) and `G` (21x8) at the estimate `nav`, with
/// bias-compensated rates `omega_ib_b` (rad/s) and specific force `f_ib_b` (m/s^2).
pub fn build_f_g(
    tag: Tag,
    ctx: &ModelContext,
    nav: &NavState,
    omega_ib_b: &Vector3<f64>,
    f_ib_b: &Vector3<f64>,
    calib: &OdoCalib,
) -> (StateMatrix, NoiseGain) {
    let mut f = StateMatrix::zeros();
    let i3 = Matrix3::identity();
    let c = *nav.c_bw.matrix();
    let om = *ctx.omega_skew();
    let p = nav.r_wb_w - ctx.r0;
    let (a, v, r, bg, ba) = (idx::ATT, idx::VEL, idx::POS, idx::GYRO, idx::ACCEL);

    match tag {
        Tag::Ekf => {
            put(&mut f, a, a, &-om);
            put(&mut f, v, a, &skew(&(c * f_ib_b)));
            put(&mut f, v, v, &(-2.0 * om));
            put(&mut f, r, v, &i3);
            put(&mut f, a, bg, &-c);
            put(&mut f, v, ba, &c);
        }
        Tag::LgR => {
            let g = ctx.gravity.gravity_w(&ctx.frame, &nav.r_wb_w);
            let vx = skew(&nav.v_wb_w);
            let px = skew(&p);
            put(&mut f, a, a, &-om);
            put(&mut f, v, a, &(skew(&g) + vx * om));
            put(&mut f, v, v, &(-2.0 * om));
            put(&mut f, r, a, &(-px * om));
            put(&mut f, r, v, &i3);
            put(&mut f, a, bg, &-c);
            put(&mut f, v, bg, &(-vx * c));
            put(&mut f, v, ba, &-c);
            put(&mut f, r, bg, &(-px * c));
        }
        Tag::ALgR => {
            let u = ctx.group_velocity(tag, nav);
            let k = ctx.augmented_gravity(&nav.r_wb_w);
            put(&mut f, a, a, &-om);
            put(&mut f, v, a, &skew(&k));
            put(&mut f, v, v, &-om);
            put(&mut f, r, v, &i3);
            put(&mut f, r, r, &-om);
            put(&mut f, a, bg, &-c);
            put(&mut f, v, bg, &(-skew(&u) * c));
            put(&mut f, v, ba, &-c);
            put(&mut f, r, bg, &(-skew(&p) * c));
        }
        Tag::LgL | Tag::ALgL => {
            let wx = skew(omega_ib_b);
            put(&mut f, a, a, &-wx);
            put(&mut f, v, a, &skew(f_ib_b));
            put(&mut f, r, v, &i3);
            if tag == Tag::LgL {
                let wie_b = c.transpose() * ctx.frame.omega_ie_w;
                put(&mut f, v, v, &-skew(&(omega_ib_b + wie_b)));
                put(&mut f, r, r, &-skew(&(omega_ib_b - wie_b)));
            } else {
                put(&mut f, v, v, &-wx);
                put(&mut f, r, r, &-wx);
            }
            put(&mut f, a, bg, &i3);
            put(&mut f, v, ba, &-i3);
        }
    }

    for (j, tau) in calib.tau.iter().enumerate() {
        f[(idx::ODO_K + j, idx::ODO_K + j)] = -1.0 / tau;
    }

    let mut g = NoiseGain::zeros();
    g.fixed_view_mut::<9, 6>(0, 0)
        .copy_from(&f.fixed_view::<9, 6>(0, idx::GYRO));
    g[(idx::ODO_K, 6)] = calib.tau[0];
    g[(idx::ODO_PITCH, 7)] = calib.tau[1];
    (f, g)
}

/// `M_v^m`: the scale-factor column and the pitch/yaw installation columns.
pub fn m_v_m(v_d: f64) -> Matrix3<f64> {
    Matrix3::new(-v_d, 0.0, 0.0, 0.0, 0.0, -v_d, 0.0, v_d, 0.0)
}

/// Odometer-frame velocity predicted from the navigation solution:
/// `C_b^m (C^T v + omega_wb^b x L)`.
pub fn predict_measurement(
    nav: &NavState,
    calib: &OdoCalib,
    omega_wb_b: &Vector3<f64>,
) -> Vector3<f64> {
    calib.c_bm() * (nav.c_bw.transpose() * nav.v_wb_w + omega_wb_b.cross(&calib.lever_b))
}

/// Measurement matrix (3x21) for the innovation
/// `predict_measurement - k_odo [v_D, 0, 0]`.
pub fn build_h(
    tag: Tag,
    ctx: &ModelContext,
    nav: &NavState,
    calib: &OdoCalib,
    omega_wb_b: &Vector3<f64>,
    v_d: f64,
) -> MeasMatrix {
    let mut h = MeasMatrix::zeros();
    let c_bm = *calib.c_bm().matrix();
    let c_wm = c_bm * nav.c_bw.matrix().transpose();
    let mut set = |c: usize, b: &Matrix3<f64>| h.fixed_view_mut::<3, 3>(0, c).copy_from(b);

    match tag {
        Tag::Ekf => {
            set(idx::ATT, &(-c_wm * skew(&nav.v_wb_w)));
            set(idx::VEL, &c_wm);
        }
        Tag::LgR => set(idx::VEL, &-c_wm),
        Tag::ALgR => {
            set(idx::VEL, &-c_wm);
            set(idx::POS, &(c_wm * ctx.omega_skew()));
        }
        Tag::LgL | Tag::ALgL => {
            let v_m = c_wm * nav.v_wb_w;
            set(idx::ATT, &(skew(&v_m) * c_bm));
            set(idx::VEL, &-c_bm);
            if tag == Tag::ALgL {
                let wie_b = nav.c_bw.transpose() * ctx.frame.omega_ie_w;
                set(idx::POS, &(c_bm * skew(&wie_b)));
            }
        }
    }
    set(idx::ODO_K, &m_v_m(v_d));
    set(idx::ODO_LEVER, &(-c_bm * skew(omega_wb_b)));
    h
}
