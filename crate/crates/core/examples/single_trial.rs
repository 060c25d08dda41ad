//! One seeded Monte-Carlo trial of every algorithm on the default drive,
//! compared against free-inertial integration of the same IMU data.

use std::time::Instant;

use se23nav::harness::{nav_errors, run_filter, run_free_inertial, HarnessConfig, Scenario, TrialResult};
use se23nav::models::Tag;
use se23nav::sim::TrialSeed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    let config = HarnessConfig::default();
    let t0 = Instant::now();
    let scenario = Scenario::new(&config)?;
    let trial = TrialSeed::new(seed, 0);
    let (log, draws) = scenario.simulate(&config, trial);
    println!("simulated in {:.2?}; yaw error {:.2} deg", t0.elapsed(), draws.attitude_error.yaw.to_degrees());

    let free = run_free_inertial(&config, &log)?;
    let last = free.last().expect("odometer epochs");
    let (_, _, drift) = nav_errors(&last.nav, scenario.truth_at(last.t).expect("truth"));
    println!("free inertial final horizontal error {drift:.1} m");

    for tag in Tag::ALL {
        let t0 = Instant::now();
        let run = run_filter(tag, &config, &log)?;
        let res = TrialResult::score(&run, trial, |t| scenario.truth_at(t).copied())?;
        let rmse = se23nav::harness::horizontal_rmse([&res], config.rmse_from);
        let mean_nis = res.nis.iter().sum::<f64>() / res.nis.len() as f64;
        println!(
            "{:<12} rmse {:>8.2} m  final {:>8.2} m  mean NIS {:>6.2}  ({:.2?})",
            tag.display_name(),
            rmse,
            res.hpos.last().copied().unwrap_or(f64::NAN),
            mean_nis,
            t0.elapsed()
        );
    }
    Ok(())
}
