//! SINS/odometer integrated navigation in an earth-fixed world frame.
//!
//! Five error-state Kalman filters share one strapdown mechanization: the
//! classical attitude/velocity/position EKF and four filters whose
//! navigation error lives on the SE2(3) matrix Lie group (left or right
//! invariant, with or without the inertial-velocity augmentation). The crate
//! also ships a ground-vehicle simulator and a Monte-Carlo harness that
//! compares the filters on identical sensor data.

pub mod cli;
pub mod error;
pub mod frames;
pub mod harness;
pub mod kalman;
pub mod lie;
pub mod mech;
pub mod models;
pub mod sim;

pub use error::{Error, Result};
