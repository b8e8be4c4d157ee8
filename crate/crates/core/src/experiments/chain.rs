//! CNOT chains of every length along each path orientation.

use serde::{Deserialize, Serialize};

use super::{
    family, pooled_row, run_cells, strategy_index, Cell, Device, ExperimentConfig, ResultRow,
    ResultTable, TableMetadata,
};
use crate::builder::{cnot_chain, ControlPrep, ResetStrategy};
use crate::error::{Error, Result};
use crate::topology::chain_paths;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSweep {
    /// One table per (orientation, strategy); rows indexed by chain length.
    pub per_orientation: Vec<(usize, ResetStrategy, ResultTable)>,
    /// Pooled over orientations, one per strategy.
    pub mean: Vec<(ResetStrategy, ResultTable)>,
}

impl ChainSweep {
    pub fn table(&self, orientation: usize, strategy: ResetStrategy) -> Option<&ResultTable> {
        self.per_orientation
            .iter()
            .find(|(o, s, _)| *o == orientation && *s == strategy)
            .map(|(_, _, t)| t)
    }

    pub fn mean(&self, strategy: ResetStrategy) -> Option<&ResultTable> {
        self.mean.iter().find(|(s, _)| *s == strategy).map(|(_, t)| t)
    }

    pub fn tables(&self) -> Vec<&ResultTable> {
        self.per_orientation
            .iter()
            .map(|(_, _, t)| t)
            .chain(self.mean.iter().map(|(_, t)| t))
            .collect()
    }
}

/// For each orientation, strategy and length `1..=max`, a chain with its
/// control in `|1⟩` scored on control and target (`f1`) and ancilla (`f2`).
pub fn run_cnot_chain_sweep(device: &Device, cfg: &ExperimentConfig) -> Result<ChainSweep> {
    cfg.validate()?;
    let ids: Vec<usize> = cfg
        .orientations
        .clone()
        .unwrap_or_else(|| device.orientations.ids().collect());
    if ids.is_empty() {
        return Err(Error::Config("no orientations selected".into()));
    }
    let paths = ids
        .iter()
        .map(|&id| chain_paths(&device.graph, &device.orientations, id))
        .collect::<Result<Vec<_>>>()?;
    let longest = paths.iter().map(|p| p.len() - 1).min().unwrap_or(0);
    let max_len = cfg.max_length.unwrap_or(longest);
    if max_len == 0 || max_len > longest {
        return Err(Error::Config(format!(
            "chain length must be in 1..={longest}, got {max_len}"
        )));
    }

    let mut keys = Vec::new();
    let mut cells = Vec::new();
    for (&id, path) in ids.iter().zip(&paths) {
        for &s in &cfg.strategies {
            for len in 1..=max_len {
                let built = cnot_chain(&device.graph, &path[..=len], s, ControlPrep::One)?;
                let coords = [family::CHAIN, id as u64, strategy_index(s), len as u64];
                cells.push(Cell::expected(built, cfg.seed, &coords)?);
                keys.push((id, s, len));
            }
        }
    }
    let reports = run_cells(device, &cells, cfg.shots)?;

    let meta = || TableMetadata::new("cnot-chain", cfg.seed, &device.calibration);
    let mut per_orientation = Vec::new();
    for (&id, path) in ids.iter().zip(&paths) {
        for &s in &cfg.strategies {
            let mut t = ResultTable::new(
                format!("cnot-chain_orientation-{id}_{s}"),
                "chain_length",
                "cnots",
                meta(),
            )
            .with_extra("orientation", id)
            .with_extra("strategy", s.name())
            .with_extra("path", path[..=max_len].to_vec());
            t.rows = keys
                .iter()
                .zip(&reports)
                .filter(|((o, st, _), _)| *o == id && *st == s)
                .map(|((_, _, len), r)| ResultRow::from_report(*len as f64, r))
                .collect();
            per_orientation.push((id, s, t));
        }
    }

    let mean = cfg
        .strategies
        .iter()
        .map(|&s| {
            let mut t = ResultTable::new(
                format!("cnot-chain_mean_{s}"),
                "chain_length",
                "cnots",
                meta(),
            )
            .with_extra("strategy", s.name())
            .with_extra("orientations", ids.clone());
            t.rows = (0..max_len)
                .map(|i| {
                    let rows: Vec<&ResultRow> = per_orientation
                        .iter()
                        .filter(|(_, st, _)| *st == s)
                        .map(|(_, _, tab)| &tab.rows[i])
                        .collect();
                    pooled_row((i + 1) as f64, &rows)
                })
                .collect();
            (s, t)
        })
        .collect();

    Ok(ChainSweep {
        per_orientation,
        mean,
    })
}
