//! Single-qubit T1, Ramsey and echo runs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{family, run_cells, Cell, Device, ExperimentConfig, ResultRow, ResultTable, TableMetadata};
use crate::analysis::{fit_damped_cosine, fit_decay, fit_exponential, FitResult, Sample};
use crate::builder::BuiltCircuit;
use crate::circuit::{Circuit, GateOp, Role};
use crate::error::{Error, Result};

const US: f64 = 1e-6;
/// Grid span used when the relevant time constant is infinite.
const FALLBACK_SPAN_US: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRun {
    /// Rows are indexed by delay in μs; `f1` is the scored probability.
    pub table: ResultTable,
    pub fit: FitResult,
    /// Set when the grid stops short of twice the configured time constant.
    pub grid_too_narrow: bool,
}

fn linspace(end: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| end * i as f64 / (n - 1) as f64).collect()
}

fn round_grid(grid: Vec<f64>) -> Vec<f64> {
    grid.into_iter().map(|v| (v * 1e3).round() / 1e3).collect()
}

fn single_wire(qubit: usize, ops: Vec<GateOp>) -> Result<BuiltCircuit> {
    let mut circuit = Circuit::from_ops(1, ops)?;
    circuit.set_roles(vec![Role::Target])?;
    circuit.set_physical(vec![qubit])?;
    Ok(BuiltCircuit {
        circuit,
        placement: None,
        ancilla_target: String::new(),
        expected: None,
    })
}

struct Sweep<'a> {
    name: &'static str,
    family: u64,
    q_prime: &'static str,
    circuit: &'a dyn Fn(f64) -> Vec<GateOp>,
}

fn sweep(device: &Device, cfg: &ExperimentConfig, grid: &[f64], s: Sweep) -> Result<ResultTable> {
    let cells = grid
        .iter()
        .enumerate()
        .map(|(i, &dt_us)| {
            let built = single_wire(cfg.qubit, (s.circuit)(dt_us * US))?;
            Ok(Cell::new(built, s.q_prime, cfg.seed, &[s.family, cfg.qubit as u64, i as u64]))
        })
        .collect::<Result<Vec<_>>>()?;
    let reports = run_cells(device, &cells, cfg.shots)?;
    let mut table = ResultTable::new(
        s.name,
        "delay",
        "us",
        TableMetadata::new(s.name, cfg.seed, &device.calibration),
    )
    .with_extra("qubit", cfg.qubit);
    table.rows = grid
        .iter()
        .zip(&reports)
        .map(|(&t, r)| ResultRow::from_report(t, r))
        .collect();
    Ok(table)
}

fn samples(table: &ResultTable) -> Vec<Sample> {
    table
        .rows
        .iter()
        .map(|r| Sample::new(r.independent_var, r.f1, r.shots))
        .collect()
}

fn prepare(device: &Device, cfg: &ExperimentConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.qubit >= device.graph.n_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit: cfg.qubit,
            n_qubits: device.graph.n_qubits(),
        });
    }
    if cfg.grid.as_ref().is_some_and(|g| g[0] < 0.0) {
        return Err(Error::Config("delays must be non-negative".into()));
    }
    Ok(())
}

fn us_or_fallback(seconds: f64) -> f64 {
    if seconds.is_finite() {
        seconds / US
    } else {
        FALLBACK_SPAN_US
    }
}

fn finite_json(v: f64) -> serde_json::Value {
    if v.is_finite() {
        v.into()
    } else {
        serde_json::Value::Null
    }
}

/// `X`, delay, measure. Survival of `|1⟩` is fitted to `e^{−t/T}`.
pub fn run_t1(device: &Device, cfg: &ExperimentConfig) -> Result<CoherenceRun> {
    prepare(device, cfg)?;
    let t1_us = us_or_fallback(device.calibration.qubit(cfg.qubit)?.t1());
    let grid = cfg
        .grid
        .clone()
        .unwrap_or_else(|| round_grid(linspace(3.0 * t1_us, 8)));
    let mut table = sweep(
        device,
        cfg,
        &grid,
        Sweep {
            name: "t1",
            family: family::T1,
            q_prime: "1",
            circuit: &|dt| vec![GateOp::x(0), GateOp::delay(0, dt)],
        },
    )?;
    let fit = fit_exponential(&samples(&table))?;
    let configured = device.calibration.qubit(cfg.qubit)?.t1() / US;
    let fitted = fit.param("T");
    table = table
        .with_extra("configured_t1_us", finite_json(configured))
        .with_extra("fitted_t1_us", finite_json(fitted.unwrap_or(f64::NAN)));
    let grid_too_narrow = configured.is_finite() && *grid.last().unwrap() < 2.0 * configured;
    table.fit = Some(fit.clone());
    Ok(CoherenceRun {
        table,
        fit,
        grid_too_narrow,
    })
}

/// `H`, delay, `H`. `P(|0⟩)` is fitted to a drifting, decaying cosine.
pub fn run_t2_ramsey(device: &Device, cfg: &ExperimentConfig) -> Result<CoherenceRun> {
    prepare(device, cfg)?;
    let params = *device.calibration.qubit(cfg.qubit)?;
    let grid = cfg.grid.clone().unwrap_or_else(|| {
        let t2 = us_or_fallback(params.t2());
        let omega = params.omega().abs() * US;
        let period = if omega > 0.0 { 2.0 * PI / omega } else { f64::INFINITY };
        let span = (2.0 * t2).max(if period.is_finite() { 2.0 * period } else { 0.0 });
        let n = if period.is_finite() {
            ((span / (period / 10.0)).ceil() as usize + 1).clamp(41, 201)
        } else {
            41
        };
        round_grid(linspace(span, n))
    });
    let mut table = sweep(
        device,
        cfg,
        &grid,
        Sweep {
            name: "t2-ramsey",
            family: family::RAMSEY,
            q_prime: "0",
            circuit: &|dt| vec![GateOp::h(0), GateOp::delay(0, dt), GateOp::h(0)],
        },
    )?;
    let fit = fit_damped_cosine(&samples(&table))?;
    table = table
        .with_extra("configured_t2_us", finite_json(params.t2() / US))
        .with_extra("configured_omega_rad_per_us", params.omega() * US)
        .with_extra("fitted_tphi_us", finite_json(fit.param("tphi").unwrap_or(f64::NAN)))
        .with_extra(
            "fitted_omega_rad_per_us",
            finite_json(fit.param("omega").unwrap_or(f64::NAN)),
        );
    let grid_too_narrow = params.t2().is_finite() && *grid.last().unwrap() < 2.0 * params.t2() / US;
    table.fit = Some(fit.clone());
    Ok(CoherenceRun {
        table,
        fit,
        grid_too_narrow,
    })
}

/// `H`, half delay, `X`, half delay, `H`. `P(|0⟩)` is fitted to a decay
/// toward ½.
pub fn run_t2_echo(device: &Device, cfg: &ExperimentConfig) -> Result<CoherenceRun> {
    prepare(device, cfg)?;
    let t2 = device.calibration.qubit(cfg.qubit)?.t2();
    let grid = cfg
        .grid
        .clone()
        .unwrap_or_else(|| round_grid(linspace(3.0 * us_or_fallback(t2), 16)));
    let mut table = sweep(
        device,
        cfg,
        &grid,
        Sweep {
            name: "t2-echo",
            family: family::ECHO,
            q_prime: "0",
            circuit: &|dt| {
                vec![
                    GateOp::h(0),
                    GateOp::delay(0, dt / 2.0),
                    GateOp::x(0),
                    GateOp::delay(0, dt / 2.0),
                    GateOp::h(0),
                ]
            },
        },
    )?;
    let fit = fit_decay(&samples(&table), 0.5)?;
    table = table
        .with_extra("configured_t2_us", finite_json(t2 / US))
        .with_extra("fitted_t2_echo_us", finite_json(fit.param("T").unwrap_or(f64::NAN)));
    let grid_too_narrow = t2.is_finite() && *grid.last().unwrap() < 2.0 * t2 / US;
    table.fit = Some(fit.clone());
    Ok(CoherenceRun {
        table,
        fit,
        grid_too_narrow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::FitStatus;

    fn quick(qubit: usize, grid: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            shots: 400,
            qubit,
            grid: Some(grid),
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_t1_survives_and_fit_fails() {
        let d = Device::poughkeepsie().noiseless();
        let run = run_t1(&d, &quick(3, vec![0.0, 50.0, 100.0])).unwrap();
        assert!(run.table.rows.iter().all(|r| r.f1 == 1.0));
        assert_eq!(run.fit.status, FitStatus::Failed);
        assert!(!run.fit.diagnostics.is_empty());
    }

    #[test]
    fn narrow_grid_is_flagged() {
        let d = Device::poughkeepsie();
        let run = run_t1(&d, &quick(0, vec![0.0, 5.0, 10.0])).unwrap();
        assert!(run.grid_too_narrow);
    }

    #[test]
    fn default_grids_cover_two_time_constants() {
        let d = Device::poughkeepsie();
        let cfg = ExperimentConfig {
            shots: 50,
            qubit: 5,
            ..Default::default()
        };
        assert!(!run_t1(&d, &cfg).unwrap().grid_too_narrow);
        assert!(!run_t2_echo(&d, &cfg).unwrap().grid_too_narrow);
        assert!(!run_t2_ramsey(&d, &cfg).unwrap().grid_too_narrow);
    }

    #[test]
    fn bad_qubit_and_negative_delay() {
        let d = Device::poughkeepsie();
        assert!(run_t1(&d, &quick(40, vec![0.0])).is_err());
        assert!(run_t1(&d, &quick(0, vec![-1.0, 0.0])).is_err());
    }
}
