//! Toffoli on every enumerated placement of each geometry.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    family, pooled_row, run_cells, Cell, Device, ExperimentConfig, ResultRow, ResultTable,
    TableMetadata,
};
use crate::builder::{ccnot_on_geometry, CcnotInput, ResetStrategy};
use crate::error::Result;
use crate::topology::{
    enumerate_linear_triples, enumerate_ring_placements, enumerate_stars, GeometryKind,
    GeometryPlacement,
};

/// Controls in `|1⟩`, target in `|0⟩`.
const SURVEY_INPUT: u8 = 0b110;

/// Geometry and reset combination the survey compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurveyGroup {
    Linear3,
    Star4XReset,
    Star4CnotReset,
    Ring6ThreeChain,
    Ring6OneChains,
}

impl SurveyGroup {
    pub const ALL: [SurveyGroup; 5] = [
        SurveyGroup::Linear3,
        SurveyGroup::Star4XReset,
        SurveyGroup::Star4CnotReset,
        SurveyGroup::Ring6ThreeChain,
        SurveyGroup::Ring6OneChains,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurveyGroup::Linear3 => "linear3",
            SurveyGroup::Star4XReset => "star4-x-reset",
            SurveyGroup::Star4CnotReset => "star4-cnot-reset",
            SurveyGroup::Ring6ThreeChain => "ring6-3chain",
            SurveyGroup::Ring6OneChains => "ring6-1chains",
        }
    }

    pub fn reset(self) -> ResetStrategy {
        match self {
            SurveyGroup::Linear3 => ResetStrategy::None,
            SurveyGroup::Star4CnotReset => ResetStrategy::CnotReset,
            _ => ResetStrategy::XReset,
        }
    }

    /// Placements grouped by combination; each inner list holds the target
    /// variants run for that combination.
    fn combinations(self, device: &Device) -> Result<Vec<Vec<GeometryPlacement>>> {
        let g = &device.graph;
        Ok(match self {
            SurveyGroup::Linear3 => enumerate_linear_triples(g)
                .iter()
                .map(|p| p.target_variants())
                .collect(),
            SurveyGroup::Star4XReset | SurveyGroup::Star4CnotReset => enumerate_stars(g)
                .iter()
                .map(|p| p.target_variants())
                .collect(),
            SurveyGroup::Ring6ThreeChain | SurveyGroup::Ring6OneChains => {
                let kind = if self == SurveyGroup::Ring6ThreeChain {
                    GeometryKind::Ring6ThreeChain
                } else {
                    GeometryKind::Ring6OneChains
                };
                let all = enumerate_ring_placements(g, kind)?;
                let mut rings: Vec<Vec<GeometryPlacement>> = Vec::new();
                for p in all {
                    let mut key = p.wires();
                    key.sort_unstable();
                    match rings.iter_mut().find(|r| {
                        let mut k = r[0].wires();
                        k.sort_unstable();
                        k == key
                    }) {
                        Some(r) => r.push(p),
                        None => rings.push(vec![p]),
                    }
                }
                rings
            }
        })
    }
}

impl fmt::Display for SurveyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn placement_label(p: &GeometryPlacement) -> String {
    let join = |v: &[usize]| {
        v.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("-")
    };
    if p.ancilla.is_empty() {
        format!("{}:{}", p.kind.name(), join(&p.computational))
    } else {
        format!(
            "{}:{}|{}",
            p.kind.name(),
            join(&p.computational),
            join(&p.ancilla)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyCell {
    pub group: SurveyGroup,
    pub combination: usize,
    pub placement: GeometryPlacement,
    pub reset: ResetStrategy,
    pub cnot_count: usize,
    pub row: ResultRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcnotSurvey {
    pub cells: Vec<SurveyCell>,
    /// All cells, per-group best tables (max and mean over target
    /// variants) and a per-group summary.
    pub tables: Vec<ResultTable>,
}

impl CcnotSurvey {
    pub fn group_cells(&self, group: SurveyGroup) -> impl Iterator<Item = &SurveyCell> {
        self.cells.iter().filter(move |c| c.group == group)
    }

    /// Pooled mean over every cell of `group`.
    pub fn group_mean(&self, group: SurveyGroup) -> Option<ResultRow> {
        let rows: Vec<&ResultRow> = self.group_cells(group).map(|c| &c.row).collect();
        (!rows.is_empty()).then(|| pooled_row(f64::NAN, &rows))
    }

    /// Best cell of each combination in `group`, ordered by descending `f1`
    /// (ties broken by combination index).
    pub fn ranked(&self, group: SurveyGroup) -> Vec<&SurveyCell> {
        let mut best: Vec<&SurveyCell> = Vec::new();
        for c in self.group_cells(group) {
            match best.iter_mut().find(|b| b.combination == c.combination) {
                Some(b) if c.row.f1 > b.row.f1 => *b = c,
                Some(_) => {}
                None => best.push(c),
            }
        }
        best.sort_by(|a, b| {
            b.row
                .f1
                .total_cmp(&a.row.f1)
                .then(a.combination.cmp(&b.combination))
        });
        best
    }

    pub fn table(&self, name: &str) -> Option<&ResultTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Every survey group on every placement and target variant.
pub fn run_ccnot_survey(device: &Device, cfg: &ExperimentConfig) -> Result<CcnotSurvey> {
    run_survey_groups(device, cfg, &SurveyGroup::ALL)
}

pub(crate) fn run_survey_groups(
    device: &Device,
    cfg: &ExperimentConfig,
    groups: &[SurveyGroup],
) -> Result<CcnotSurvey> {
    cfg.validate()?;
    let mut meta_cells = Vec::new();
    let mut cells = Vec::new();
    for &group in groups {
        let gi = SurveyGroup::ALL.iter().position(|&g| g == group).unwrap() as u64;
        for (ci, variants) in group.combinations(device)?.into_iter().enumerate() {
            for (vi, p) in variants.into_iter().enumerate() {
                let built = ccnot_on_geometry(
                    &device.graph,
                    &p,
                    group.reset(),
                    CcnotInput::Basis(SURVEY_INPUT),
                )?;
                let coords = [family::SURVEY, gi, ci as u64, vi as u64];
                meta_cells.push((group, ci, p, built.cnot_count()));
                cells.push(Cell::expected(built, cfg.seed, &coords)?);
            }
        }
    }
    let reports = run_cells(device, &cells, cfg.shots)?;
    let cells: Vec<SurveyCell> = meta_cells
        .into_iter()
        .zip(&reports)
        .enumerate()
        .map(|(i, ((group, combination, placement, cnot_count), r))| SurveyCell {
            group,
            combination,
            reset: group.reset(),
            cnot_count,
            row: ResultRow::from_report(i as f64, r)
                .with_label(format!("{} {}", group.name(), placement_label(&placement))),
            placement,
        })
        .collect();

    let meta = || TableMetadata::new("ccnot-survey", cfg.seed, &device.calibration);
    let mut tables = Vec::new();
    let mut all = ResultTable::new("ccnot-survey_cells", "cell", "index", meta());
    all.rows = cells.iter().map(|c| c.row.clone()).collect();
    tables.push(all);

    let mut summary = ResultTable::new("ccnot-survey_summary", "group", "index", meta());
    for &group in groups {
        let n_comb = cells
            .iter()
            .filter(|c| c.group == group)
            .map(|c| c.combination + 1)
            .max()
            .unwrap_or(0);
        let mut best_max = ResultTable::new(
            format!("ccnot-survey_{group}_best-max"),
            "combination",
            "index",
            meta(),
        )
        .with_extra("aggregate", "max-over-targets");
        let mut best_mean = ResultTable::new(
            format!("ccnot-survey_{group}_best-mean"),
            "combination",
            "index",
            meta(),
        )
        .with_extra("aggregate", "mean-over-targets");
        for ci in 0..n_comb {
            let variants: Vec<&SurveyCell> = cells
                .iter()
                .filter(|c| c.group == group && c.combination == ci)
                .collect();
            let top = variants
                .iter()
                .copied()
                .reduce(|a, b| if b.row.f1 > a.row.f1 { b } else { a })
                .expect("every combination has a variant");
            let label = top.row.label.clone().unwrap_or_default();
            best_max.rows.push(
                ResultRow::new(ci as f64, top.row.f1, top.row.f2, top.row.shots)
                    .with_label(label.clone()),
            );
            let rows: Vec<&ResultRow> = variants.iter().map(|c| &c.row).collect();
            best_mean
                .rows
                .push(pooled_row(ci as f64, &rows).with_label(label));
        }
        tables.push(best_max);
        tables.push(best_mean);
        let rows: Vec<&ResultRow> = cells
            .iter()
            .filter(|c| c.group == group)
            .map(|c| &c.row)
            .collect();
        let gi = SurveyGroup::ALL.iter().position(|&g| g == group).unwrap();
        summary
            .rows
            .push(pooled_row(gi as f64, &rows).with_label(group.name()));
    }
    tables.push(summary);
    Ok(CcnotSurvey { cells, tables })
}
