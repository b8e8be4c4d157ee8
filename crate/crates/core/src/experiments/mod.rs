//! End-to-end experiment families: build circuits, schedule them, run noisy
//! shots and reduce the counts to fidelity tables and fits.
//!
//! Every (placement, parameter point) cell gets its own seed derived from the
//! master seed and the cell coordinates, so cells run in parallel and results
//! do not depend on scheduling.

mod chain;
mod coherence;
mod qft;
mod survey;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{binomial_stderr, fidelity, FidelityReport, FitResult};
use crate::builder::{BuiltCircuit, ResetStrategy};
use crate::error::{Error, Result};
use crate::noise::{derive_seed, run_shots, schedule, DeviceCalibration};
use crate::topology::{CouplingGraph, GeometryKind, GeometryPlacement, Orientations};

pub use chain::{run_cnot_chain_sweep, ChainSweep};
pub use coherence::{run_t1, run_t2_echo, run_t2_ramsey, CoherenceRun};
pub use qft::{default_phase_grid, ratio_spread, run_qft_perfect_phases, run_qpe_phase_sweep, PhaseRun, PlacedTable};
pub use survey::{run_ccnot_survey, CcnotSurvey, SurveyCell, SurveyGroup};

pub const DEFAULT_SHOTS: u64 = 8000;
pub const DEFAULT_SEED: u64 = 1;

/// Coupling graph, calibration and chain orientations of the device being
/// simulated.
#[derive(Debug, Clone)]
pub struct Device {
    pub graph: CouplingGraph,
    pub calibration: DeviceCalibration,
    pub orientations: Orientations,
}

impl Device {
    pub fn new(
        graph: CouplingGraph,
        calibration: DeviceCalibration,
        orientations: Orientations,
    ) -> Result<Self> {
        if calibration.n_qubits() < graph.n_qubits() {
            return Err(Error::MissingCalibration(calibration.n_qubits()));
        }
        Ok(Device {
            graph,
            calibration,
            orientations,
        })
    }

    /// The shipped 20-qubit map, default calibration and orientations.
    pub fn poughkeepsie() -> Self {
        Device {
            graph: CouplingGraph::poughkeepsie(),
            calibration: DeviceCalibration::default_device(),
            orientations: Orientations::shipped(),
        }
    }

    pub fn with_calibration(mut self, calibration: DeviceCalibration) -> Result<Self> {
        if calibration.n_qubits() < self.graph.n_qubits() {
            return Err(Error::MissingCalibration(calibration.n_qubits()));
        }
        self.calibration = calibration;
        Ok(self)
    }

    pub fn noiseless(&self) -> Self {
        Device {
            calibration: self.calibration.without_noise(),
            ..self.clone()
        }
    }
}

/// Which placements a QFT or QPE run uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementSelector {
    All,
    /// The `k` best by Toffoli-survey f1 computed in the same run.
    TopK(usize),
    Explicit(Vec<GeometryPlacement>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub shots: u64,
    pub seed: u64,
    /// Delays in μs for coherence runs, phases in radians for phase sweeps.
    /// `None` picks a default grid.
    pub grid: Option<Vec<f64>>,
    /// Device qubit for coherence runs.
    pub qubit: usize,
    pub strategies: Vec<ResetStrategy>,
    pub placements: PlacementSelector,
    /// Orientation ids for chain sweeps; `None` means all.
    pub orientations: Option<Vec<usize>>,
    /// Longest chain (in CNOTs) for chain sweeps; `None` uses the full path.
    pub max_length: Option<usize>,
    /// Geometries for QFT and QPE runs; `None` uses the family default.
    pub geometries: Option<Vec<GeometryKind>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            shots: DEFAULT_SHOTS,
            seed: DEFAULT_SEED,
            grid: None,
            qubit: 0,
            strategies: ResetStrategy::ALL.to_vec(),
            placements: PlacementSelector::TopK(3),
            orientations: None,
            max_length: None,
            geometries: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::ZeroShots);
        }
        if let Some(grid) = &self.grid {
            if grid.is_empty() {
                return Err(Error::Config("grid is empty".into()));
            }
            if grid.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("grid has non-finite values".into()));
            }
            if grid.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Config("grid must be sorted ascending".into()));
            }
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("no reset strategies selected".into()));
        }
        if let PlacementSelector::TopK(0) = self.placements {
            return Err(Error::Config("top-k needs k ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub independent_var: f64,
    pub f1: f64,
    pub f1_stderr: f64,
    pub f2: f64,
    pub f2_stderr: f64,
    pub shots: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Noiseless expectation of `f1`, where one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<f64>,
}

impl ResultRow {
    pub fn new(independent_var: f64, f1: f64, f2: f64, shots: u64) -> Self {
        ResultRow {
            independent_var,
            f1,
            f1_stderr: binomial_stderr(f1, shots),
            f2,
            f2_stderr: binomial_stderr(f2, shots),
            shots,
            label: None,
            theory: None,
        }
    }

    pub fn from_report(independent_var: f64, r: &FidelityReport) -> Self {
        ResultRow::new(independent_var, r.f1, r.f2, r.shots)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_theory(mut self, theory: f64) -> Self {
        self.theory = Some(theory);
        self
    }

    /// Measured over noiseless `f1`.
    pub fn ratio(&self) -> Option<f64> {
        self.theory.filter(|&t| t > 0.0).map(|t| self.f1 / t)
    }
}

/// Mean of equal-shot rows, treated as one pooled binomial sample.
pub(crate) fn pooled_row(independent_var: f64, rows: &[&ResultRow]) -> ResultRow {
    let shots: u64 = rows.iter().map(|r| r.shots).sum();
    let w = |f: fn(&ResultRow) -> f64| -> f64 {
        rows.iter().map(|r| f(r) * r.shots as f64).sum::<f64>() / shots.max(1) as f64
    };
    ResultRow::new(independent_var, w(|r| r.f1), w(|r| r.f2), shots)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub experiment: String,
    pub seed: u64,
    pub calibration_hash: String,
    pub provenance: String,
    pub tool_version: String,
}

impl TableMetadata {
    pub fn new(experiment: &str, seed: u64, calibration: &DeviceCalibration) -> Self {
        let hash = calibration.hash_hex();
        let version = env!("CARGO_PKG_VERSION");
        TableMetadata {
            experiment: experiment.to_string(),
            seed,
            provenance: format!("nisq-lab/{version} {experiment} seed={seed} cal={}", &hash[..12]),
            calibration_hash: hash,
            tool_version: version.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    /// File-name-safe identifier.
    pub name: String,
    /// What `independent_var` measures.
    pub independent_var: String,
    pub unit: String,
    pub rows: Vec<ResultRow>,
    #[serde(default)]
    pub fit: Option<FitResult>,
    pub metadata: TableMetadata,
    #[serde(default)]
    pub extras: BTreeMap<String, serde_json::Value>,
}

impl ResultTable {
    pub fn new(
        name: impl Into<String>,
        independent_var: &str,
        unit: &str,
        metadata: TableMetadata,
    ) -> Self {
        ResultTable {
            name: name.into(),
            independent_var: independent_var.to_string(),
            unit: unit.to_string(),
            rows: Vec::new(),
            fit: None,
            metadata,
            extras: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.extras.insert(key.to_string(), value.into());
        self
    }

    pub fn f1s(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.f1).collect()
    }

    pub fn f2s(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.f2).collect()
    }

    /// Pooled mean of all rows.
    pub fn mean_row(&self) -> Option<ResultRow> {
        if self.rows.is_empty() {
            return None;
        }
        let refs: Vec<&ResultRow> = self.rows.iter().collect();
        Some(pooled_row(f64::NAN, &refs))
    }
}

/// One circuit to run and the computational string it should produce.
pub(crate) struct Cell {
    pub built: BuiltCircuit,
    pub q_prime: String,
    pub seed: u64,
}

impl Cell {
    pub fn new(built: BuiltCircuit, q_prime: impl Into<String>, master: u64, coords: &[u64]) -> Self {
        Cell {
            built,
            q_prime: q_prime.into(),
            seed: derive_seed(master, coords),
        }
    }

    /// Cell scored against the builder's expected classical output.
    pub fn expected(built: BuiltCircuit, master: u64, coords: &[u64]) -> Result<Self> {
        let q = built
            .expected
            .clone()
            .ok_or_else(|| Error::InvalidState("circuit has no classical expected output".into()))?;
        Ok(Cell::new(built, q, master, coords))
    }
}

pub(crate) fn run_cell(device: &Device, cell: &Cell, shots: u64) -> Result<FidelityReport> {
    let circuit = cell.built.circuit.with_measure_all();
    let sched = schedule(&circuit, device.calibration.durations());
    let counts = run_shots(&sched, &device.calibration, shots, cell.seed)?;
    fidelity(&counts, circuit.roles(), &cell.q_prime, &cell.built.ancilla_target)
}

pub(crate) fn run_cells(device: &Device, cells: &[Cell], shots: u64) -> Result<Vec<FidelityReport>> {
    cells.par_iter().map(|c| run_cell(device, c, shots)).collect()
}

/// Family tags mixed into cell seeds.
pub(crate) mod family {
    pub const T1: u64 = 1;
    pub const RAMSEY: u64 = 2;
    pub const ECHO: u64 = 3;
    pub const CHAIN: u64 = 4;
    pub const SURVEY: u64 = 5;
    pub const QFT: u64 = 6;
    pub const QPE: u64 = 7;
}

pub(crate) fn strategy_index(s: ResetStrategy) -> u64 {
    ResetStrategy::ALL.iter().position(|&x| x == s).unwrap_or(0) as u64
}
