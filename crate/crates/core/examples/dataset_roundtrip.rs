//! Exports a simulated trial in the CSV dataset format, reads it back and
//! runs a filter on both copies.

use se23nav::cli::commands::{run_dataset, simulated_dataset};
use se23nav::cli::{read_dataset, write_dataset};
use se23nav::harness::{horizontal_rmse, HarnessConfig};
use se23nav::models::Tag;
use se23nav::sim::TrialSeed;

fn main() -> se23nav::Result<()> {
    let config = HarnessConfig::default();
    let seed = TrialSeed::new(3, 0);
    let data = simulated_dataset(&config, seed)?;
    let dir = std::env::temp_dir().join("se23nav-dataset-example");
    write_dataset(&dir, &data)?;
    let back = read_dataset(&dir)?;
    println!("wrote and re-read {} IMU rows; identical: {}", back.log.imu.len(), back == data);

    let a = run_dataset(&config, &data, Tag::ALgR, seed)?.errors.expect("truth");
    let b = run_dataset(&config, &back, Tag::ALgR, seed)?.errors.expect("truth");
    println!(
        "A-RSE horizontal RMSE in memory {:.6} m, from disk {:.6} m",
        horizontal_rmse([&a], config.rmse_from),
        horizontal_rmse([&b], config.rmse_from)
    );
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
