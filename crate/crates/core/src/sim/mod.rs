//! Trajectory generation and sensor synthesis.

mod sensors;
mod trajectory;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub use sensors::{
    draw_trial, synthesize_imu, synthesize_odo, ErrorBudget, GaussMarkov, OdoSample, TrialDraws,
    Vibration, VibrationChannel, VibrationConfig, STANDARD_GRAVITY,
};
pub use trajectory::{
    default_trajectory, sample_truth, Kinematics, Segment, SegmentKind, TrajectorySpec,
    TruthSample, TruthStream,
};

/// Campaign seed plus trial index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrialSeed {
    pub base: u64,
    pub trial: u64,
}

impl TrialSeed {
    pub fn new(base: u64, trial: u64) -> Self {
        TrialSeed { base, trial }
    }
}

/// Independent random streams of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RngPurpose {
    Draws = 0,
    Imu = 1,
    Odo = 2,
    OdoDrift = 3,
}

const PURPOSES: u64 = 4;

/// Generator for one purpose of one trial. Streams of different trials never
/// overlap, so adding trials leaves earlier ones untouched.
pub fn trial_rng(seed: TrialSeed, purpose: RngPurpose) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed.base);
    rng.set_stream(seed.trial * PURPOSES + purpose as u64);
    rng
}
