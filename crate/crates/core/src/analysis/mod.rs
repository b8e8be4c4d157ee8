//! Fidelity scoring, decay fitting, the noiseless phase-estimation
//! distribution and trend statistics.

pub mod fidelity;
pub mod fit;
pub mod qpe;
pub mod trend;

pub use fidelity::{binomial_stderr, fidelity, FidelityReport};
pub use fit::{
    damped_cosine, fit_damped_cosine, fit_decay, fit_exponential, FitModel, FitResult, FitStatus,
    Sample,
};
pub use qpe::{nearest_perfect_phase, theoretical_qpe_distribution};
pub use trend::{mann_kendall, separation, MannKendall};
