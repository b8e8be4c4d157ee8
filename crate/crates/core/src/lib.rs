//! Simulation toolkit for connectivity-constrained small quantum algorithms
//! on a 20-qubit device: circuit construction on restricted
//! geometries, trajectory noise, fidelity scoring and decay fitting.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod builder;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod noise;
pub mod report;
pub mod state;
pub mod topology;

pub use circuit::{Circuit, GateKind, GateOp, Role};
pub use error::{Error, Result};
pub use state::{Counts, StateVector};
