use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use se23nav::cli::{self, commands, CampaignConfig};
use se23nav::models::Tag;

#[derive(Parser)]
#[command(name = "se23nav", version, about = "SINS/odometer navigation filters on SE2(3)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one seeded simulated trial as a dataset directory.
    Simulate {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run one filter over a dataset directory.
    Run {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        data: PathBuf,
        #[arg(short, long, default_value = "A_LG_R")]
        tag: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run a Monte-Carlo campaign and write its tables.
    Campaign {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Override the number of trials.
        #[arg(short = 'm', long)]
        trials: Option<usize>,
        /// Twenty trials.
        #[arg(long)]
        quick: bool,
    },
    /// Recompute the summary table of a campaign directory.
    Report { dir: PathBuf },
}

fn load(path: &Option<PathBuf>) -> se23nav::Result<CampaignConfig> {
    match path {
        Some(p) => CampaignConfig::load(p),
        None => Ok(CampaignConfig::default()),
    }
}

fn execute(cmd: Command) -> se23nav::Result<()> {
    match cmd {
        Command::Simulate { config, trial, out } => {
            let data = cli::simulate(&load(&config)?, trial, &out)?;
            println!("wrote {} IMU and {} odometer samples to {}", data.log.imu.len(), data.log.odo.len(), out.display());
        }
        Command::Run { config, data, tag, out } => {
            let tag: Tag = tag.parse()?;
            let res = cli::run(&load(&config)?, &data, tag, &out)?;
            match &res.errors {
                Some(tr) => println!(
                    "{}: {} epochs, horizontal RMSE {:.3} m",
                    tag.display_name(),
                    tr.t.len(),
                    se23nav::harness::horizontal_rmse([tr], 0.0)
                ),
                None => println!("{}: {} epochs, no truth", tag.display_name(), res.run.epochs.len()),
            }
        }
        Command::Campaign { config, out, trials, quick } => {
            let mut cfg = load(&config)?;
            if quick {
                cfg.trials = 20;
            }
            if let Some(m) = trials {
                cfg.trials = m;
            }
            cfg.validate()?;
            let result = cli::campaign(&cfg, out.as_deref())?;
            print!("{}", commands::format_summary(&se23nav::harness::summarize(&result)));
        }
        Command::Report { dir } => {
            print!("{}", commands::format_summary(&cli::report(&dir)?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match execute(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
