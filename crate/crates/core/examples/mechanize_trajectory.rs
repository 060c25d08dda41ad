//! Samples the default drive, back-computes exact IMU increments and
//! mechanizes them forward again.

use se23nav::frames::{make_world_frame, GravityModel};
use se23nav::mech::Strapdown;
use se23nav::sim::{default_trajectory, sample_truth};

fn main() -> se23nav::Result<()> {
    let spec = default_trajectory();
    let kin = spec.kinematics();
    println!(
        "{} segments, {} s, path {:.2} km",
        spec.segments.len(),
        spec.duration(),
        kin.path_length(1.0) / 1000.0
    );
    let o = spec.origin;
    let frame = make_world_frame(o[0], o[1], o[2])?;
    let gravity = GravityModel::normal();
    let truth = sample_truth(&spec, 200.0, &frame, &gravity)?;

    let mut sd = Strapdown::new(frame, gravity);
    let mut nav = truth.samples[0].nav;
    let mut worst: f64 = 0.0;
    for (k, s) in truth.samples.iter().enumerate().skip(1) {
        nav = sd.step(&nav, &s.imu())?;
        worst = worst.max((nav.r_wb_w - s.nav.r_wb_w).norm());
        if k % 100_000 == 0 {
            let e = s.nav.euler();
            println!(
                "t {:>6.0} s  pos [{:>9.1} {:>9.1} {:>5.1}] m  yaw {:>7.1} deg",
                s.t,
                s.nav.r_wb_w.x,
                s.nav.r_wb_w.y,
                s.nav.r_wb_w.z,
                e.yaw.to_degrees()
            );
        }
    }
    println!("largest position departure from truth: {worst:.2e} m");
    Ok(())
}
