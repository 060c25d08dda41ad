//! Configuration, dataset persistence and the command implementations
//! behind the `se23nav` binary.

pub mod commands;
pub mod config;
pub mod dataset;

pub use commands::{campaign, report, run, simulate};
pub use config::CampaignConfig;
pub use dataset::{read_dataset, write_dataset, DatasetLog};
