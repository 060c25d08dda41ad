//! Monte-Carlo comparison of the five filters on the default drive.
//!
//! `cargo run --release --example monte_carlo -- [trials] [seed]`

use std::time::Instant;

use se23nav::harness::{run_campaign, summarize, HarnessConfig};
use se23nav::models::Tag;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().map_or(Ok(20), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(2024), |s| s.parse())?;
    let config = HarnessConfig::default();
    let t0 = Instant::now();
    let result = run_campaign(&Tag::ALL, m, seed, &config)?;
    println!("{m} trials in {:.1?}", t0.elapsed());
    for row in summarize(&result) {
        println!(
            "{:<12} horizontal RMSE {:>7.2} m   final RMS {:>7.2} m",
            row.tag.display_name(),
            row.rmse,
            row.final_hpos
        );
    }
    Ok(())
}
