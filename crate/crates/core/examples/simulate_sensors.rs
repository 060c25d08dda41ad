//! Draws one trial's sensor errors and shows what they do to the raw
//! IMU and odometer streams.

use se23nav::harness::{HarnessConfig, Scenario};
use se23nav::sim::TrialSeed;

fn main() -> se23nav::Result<()> {
    let config = HarnessConfig::default();
    let scenario = Scenario::new(&config)?;
    let (log, draws) = scenario.simulate(&config, TrialSeed::new(7, 0));
    let dt = scenario.truth.dt();
    println!("gyro bias   {:?} deg/h", (draws.gyro_bias * (3600.0_f64).to_degrees()).as_slice());
    println!("accel bias  {:?} ug", (draws.accel_bias / 9.80665e-6).as_slice());
    let e = draws.attitude_error;
    println!(
        "initial attitude error roll {:.3} pitch {:.3} yaw {:.2} deg",
        e.roll.to_degrees(),
        e.pitch.to_degrees(),
        e.yaw.to_degrees()
    );

    let (mut peak_f, mut peak_w) = (0.0_f64, 0.0_f64);
    for (m, t) in log.imu.iter().zip(&scenario.truth.samples[1..]) {
        peak_f = peak_f.max(((m.dvel - t.dvel) / dt).amax());
        peak_w = peak_w.max(((m.dtheta - t.dtheta) / dt).amax());
    }
    println!("largest specific-force error {peak_f:.3} m/s^2, rate error {:.4} deg/s", peak_w.to_degrees());

    for o in log.odo.iter().step_by(300) {
        let truth = scenario.truth_at(o.t).expect("truth");
        println!(
            "t {:>5.0} s  odometer {:>7.3} m/s  true speed {:>7.3} m/s",
            o.t,
            o.v_d,
            truth.v_wb_w.norm()
        );
    }
    Ok(())
}
