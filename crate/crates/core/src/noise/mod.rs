//! Stochastic trajectory noise: calibration data, timed scheduling and
//! per-shot sampling of damping, dephasing, drift and gate errors.

pub mod calibration;
pub mod engine;
pub mod schedule;
pub mod trajectory;

pub use calibration::{derive_tphi, DeviceCalibration, DurationModel, QubitNoiseParams};
pub use engine::{
    derive_seed, idle_channel_sample, run_shots, shot_rng, simulate_noisy_shot, NoisyProgram,
};
pub use schedule::{schedule, Layer, ScheduledCircuit};
pub use trajectory::{IdleChannel, NoiseEvent, Occupancy, TrajectoryState};
