//! Inverse QFT on perfect phases and phase-estimation sweeps.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::survey::run_survey_groups;
use super::{
    family, pooled_row, run_cells, CcnotSurvey, Cell, Device, ExperimentConfig, PlacementSelector,
    ResultRow, ResultTable, SurveyCell, SurveyGroup, TableMetadata,
};
use crate::analysis::{nearest_perfect_phase, theoretical_qpe_distribution};
use crate::builder::{qpe_circuit, qpe_outcome_label};
use crate::error::{Error, Result};
use crate::topology::{
    enumerate_linear_triples, enumerate_ring_placements, enumerate_stars, GeometryKind,
    GeometryPlacement,
};

const QFT_GEOMETRIES: [GeometryKind; 3] = [
    GeometryKind::Linear3Cct,
    GeometryKind::Star4,
    GeometryKind::Ring6ThreeChain,
];
const QPE_GEOMETRIES: [GeometryKind; 2] = [GeometryKind::Linear3Cct, GeometryKind::Star4];

/// One placement's results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedTable {
    pub kind: GeometryKind,
    /// 1-based position in the selection.
    pub rank: usize,
    pub placement: GeometryPlacement,
    pub cnot_count: usize,
    pub table: ResultTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRun {
    /// The survey used for top-k selection, when one ran.
    pub survey: Option<CcnotSurvey>,
    pub placed: Vec<PlacedTable>,
    /// Per-geometry means and a summary.
    pub aggregates: Vec<ResultTable>,
}

impl PhaseRun {
    pub fn tables(&self) -> Vec<&ResultTable> {
        self.placed
            .iter()
            .map(|p| &p.table)
            .chain(&self.aggregates)
            .collect()
    }

    pub fn for_kind(&self, kind: GeometryKind) -> impl Iterator<Item = &PlacedTable> {
        self.placed.iter().filter(move |p| p.kind == kind)
    }

    /// Pooled mean over every row of every placement of `kind`.
    pub fn kind_mean(&self, kind: GeometryKind) -> Option<ResultRow> {
        let rows: Vec<&ResultRow> = self.for_kind(kind).flat_map(|p| &p.table.rows).collect();
        (!rows.is_empty()).then(|| pooled_row(f64::NAN, &rows))
    }
}

/// Mean of measured/noiseless `f1` over the rows and its standard deviation
/// relative to that mean.
pub fn ratio_spread(table: &ResultTable) -> Option<(f64, f64)> {
    let ratios: Vec<f64> = table.rows.iter().filter_map(ResultRow::ratio).collect();
    if ratios.is_empty() {
        return None;
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt() / mean))
}

fn check_kind(kind: GeometryKind) -> Result<()> {
    if QFT_GEOMETRIES.contains(&kind) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("inverse QFT runs on {}", kind.name())))
    }
}

/// Linear placements are run as the line `end – center – end`.
fn as_qft_placement(p: &GeometryPlacement) -> GeometryPlacement {
    match p.line() {
        Some(line) => GeometryPlacement::new(GeometryKind::Linear3Cct, line.to_vec(), Vec::new())
            .expect("a line is a valid linear placement"),
        None => p.clone(),
    }
}

fn survey_groups(kind: GeometryKind) -> &'static [SurveyGroup] {
    match kind {
        GeometryKind::Linear3Cct | GeometryKind::Linear3Ctc => &[SurveyGroup::Linear3],
        GeometryKind::Star4 => &[SurveyGroup::Star4XReset, SurveyGroup::Star4CnotReset],
        _ => &[SurveyGroup::Ring6ThreeChain],
    }
}

/// Rings rank every placement on its own, since each target position puts
/// the computational qubits elsewhere; triples and stars rank by their best
/// target variant.
fn top_k(survey: &CcnotSurvey, kind: GeometryKind, k: usize) -> Vec<GeometryPlacement> {
    let mut best: Vec<&SurveyCell> = Vec::new();
    for &g in survey_groups(kind) {
        if kind == GeometryKind::Ring6ThreeChain {
            best.extend(survey.group_cells(g));
            continue;
        }
        for c in survey.ranked(g) {
            match best.iter_mut().find(|b| b.combination == c.combination) {
                Some(b) if c.row.f1 > b.row.f1 => *b = c,
                Some(_) => {}
                None => best.push(c),
            }
        }
    }
    best.sort_by(|a, b| {
        b.row
            .f1
            .total_cmp(&a.row.f1)
            .then(a.combination.cmp(&b.combination))
    });
    best.iter()
        .take(k)
        .map(|c| as_qft_placement(&c.placement))
        .collect()
}

type Selection = (Option<CcnotSurvey>, Vec<(GeometryKind, Vec<GeometryPlacement>)>);

fn select(device: &Device, cfg: &ExperimentConfig, default: &[GeometryKind]) -> Result<Selection> {
    let kinds: Vec<GeometryKind> = match (&cfg.geometries, &cfg.placements) {
        (Some(k), _) => k.clone(),
        (None, PlacementSelector::Explicit(ps)) => {
            let mut k: Vec<GeometryKind> = Vec::new();
            for p in ps {
                let kind = as_qft_placement(p).kind;
                if !k.contains(&kind) {
                    k.push(kind);
                }
            }
            k
        }
        (None, _) => default.to_vec(),
    };
    if kinds.is_empty() {
        return Err(Error::Config("no geometries selected".into()));
    }
    for &k in &kinds {
        check_kind(k)?;
    }
    let g = &device.graph;
    match &cfg.placements {
        PlacementSelector::All => {
            let sel = kinds
                .iter()
                .map(|&kind| {
                    let ps = match kind {
                        GeometryKind::Star4 => enumerate_stars(g),
                        GeometryKind::Ring6ThreeChain => enumerate_ring_placements(g, kind)?,
                        _ => enumerate_linear_triples(g)
                            .iter()
                            .map(as_qft_placement)
                            .collect(),
                    };
                    Ok((kind, ps))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((None, sel))
        }
        PlacementSelector::Explicit(ps) => {
            let sel = kinds
                .iter()
                .map(|&kind| {
                    let chosen: Vec<GeometryPlacement> = ps
                        .iter()
                        .map(as_qft_placement)
                        .filter(|p| p.kind == kind)
                        .collect();
                    if chosen.is_empty() {
                        return Err(Error::Config(format!(
                            "no explicit placement of kind {}",
                            kind.name()
                        )));
                    }
                    for p in &chosen {
                        p.validate(g)?;
                    }
                    Ok((kind, chosen))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((None, sel))
        }
        PlacementSelector::TopK(k) => {
            let mut groups: Vec<SurveyGroup> = Vec::new();
            for &kind in &kinds {
                for &grp in survey_groups(kind) {
                    if !groups.contains(&grp) {
                        groups.push(grp);
                    }
                }
            }
            groups.sort();
            let survey = run_survey_groups(device, cfg, &groups)?;
            let sel = kinds
                .iter()
                .map(|&kind| (kind, top_k(&survey, kind, *k)))
                .collect();
            Ok((Some(survey), sel))
        }
    }
}

struct Point {
    x: f64,
    phi: f64,
    label: String,
    theory: Option<f64>,
}

fn run_phases(
    device: &Device,
    cfg: &ExperimentConfig,
    experiment: &str,
    fam: u64,
    default_kinds: &[GeometryKind],
    points: &[Point],
) -> Result<PhaseRun> {
    cfg.validate()?;
    let (survey, selection) = select(device, cfg, default_kinds)?;
    let mut keys = Vec::new();
    let mut cells = Vec::new();
    for (kind, placements) in &selection {
        for (rank, p) in placements.iter().enumerate() {
            for (i, pt) in points.iter().enumerate() {
                let built = qpe_circuit(&device.graph, Some(p), pt.phi)?;
                let coords = [fam, *kind as u64, rank as u64, i as u64];
                cells.push(Cell::new(built, pt.label.clone(), cfg.seed, &coords));
            }
            keys.push((*kind, rank, p.clone()));
        }
    }
    let reports = run_cells(device, &cells, cfg.shots)?;

    let meta = || TableMetadata::new(experiment, cfg.seed, &device.calibration);
    let mut placed = Vec::new();
    for (j, (kind, rank, placement)) in keys.into_iter().enumerate() {
        let chunk = &reports[j * points.len()..(j + 1) * points.len()];
        let cnot_count = cells[j * points.len()].built.cnot_count();
        let mut table = ResultTable::new(
            format!("{experiment}_{}_{}", kind.name(), rank + 1),
            "phase",
            "rad",
            meta(),
        )
        .with_extra("geometry", kind.name())
        .with_extra("placement", placement.wires())
        .with_extra("cnot_count", cnot_count);
        table.rows = points
            .iter()
            .zip(chunk)
            .map(|(pt, r)| {
                let row = ResultRow::from_report(pt.x, r).with_label(pt.label.clone());
                match pt.theory {
                    Some(t) => row.with_theory(t),
                    None => row,
                }
            })
            .collect();
        if let Some((mean, spread)) = ratio_spread(&table) {
            table = table
                .with_extra("ratio_mean", mean)
                .with_extra("ratio_rel_spread", spread);
        }
        placed.push(PlacedTable {
            kind,
            rank: rank + 1,
            placement,
            cnot_count,
            table,
        });
    }

    let mut aggregates = Vec::new();
    let mut summary = ResultTable::new(format!("{experiment}_summary"), "geometry", "index", meta());
    for (kind, _) in &selection {
        let tables: Vec<&PlacedTable> = placed.iter().filter(|p| p.kind == *kind).collect();
        let mut mean = ResultTable::new(
            format!("{experiment}_{}_mean", kind.name()),
            "phase",
            "rad",
            meta(),
        )
        .with_extra("geometry", kind.name())
        .with_extra("placements", tables.len())
        .with_extra("cnot_count", tables[0].cnot_count);
        mean.rows = points
            .iter()
            .enumerate()
            .map(|(i, pt)| {
                let rows: Vec<&ResultRow> = tables.iter().map(|t| &t.table.rows[i]).collect();
                let row = pooled_row(pt.x, &rows).with_label(pt.label.clone());
                match pt.theory {
                    Some(t) => row.with_theory(t),
                    None => row,
                }
            })
            .collect();
        let all: Vec<&ResultRow> = tables.iter().flat_map(|t| &t.table.rows).collect();
        summary
            .rows
            .push(pooled_row(*kind as u64 as f64, &all).with_label(kind.name()));
        aggregates.push(mean);
    }
    aggregates.push(summary);
    Ok(PhaseRun {
        survey,
        placed,
        aggregates,
    })
}

/// Phase `kπ/4` for `k = 0..8` through each geometry's inverse QFT, scored
/// against the outcome that phase should read out.
pub fn run_qft_perfect_phases(device: &Device, cfg: &ExperimentConfig) -> Result<PhaseRun> {
    let points: Vec<Point> = (0..8)
        .map(|k| Point {
            x: k as f64 * FRAC_PI_4,
            phi: k as f64 * FRAC_PI_4,
            label: qpe_outcome_label(k),
            theory: Some(1.0),
        })
        .collect();
    run_phases(device, cfg, "qft-perfect", family::QFT, &QFT_GEOMETRIES, &points)
}

/// Default phase grid: `0` to `2π` (exclusive) in steps of `π/16`.
pub fn default_phase_grid() -> Vec<f64> {
    (0..32).map(|i| i as f64 * PI / 16.0).collect()
}

/// Phase estimation over a phase grid, scored against the nearest perfect
/// phase's outcome and compared with the noiseless probability of it.
pub fn run_qpe_phase_sweep(device: &Device, cfg: &ExperimentConfig) -> Result<PhaseRun> {
    let grid = cfg.grid.clone().unwrap_or_else(default_phase_grid);
    let points: Vec<Point> = grid
        .iter()
        .map(|&phi| {
            let k = nearest_perfect_phase(phi);
            Point {
                x: phi,
                phi,
                label: qpe_outcome_label(k),
                theory: Some(theoretical_qpe_distribution(phi)[k]),
            }
        })
        .collect();
    let cfg = ExperimentConfig {
        placements: match &cfg.placements {
            PlacementSelector::TopK(3) if cfg.geometries.is_none() => PlacementSelector::TopK(1),
            p => p.clone(),
        },
        ..cfg.clone()
    };
    run_phases(device, &cfg, "qpe-sweep", family::QPE, &QPE_GEOMETRIES, &points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        ExperimentConfig {
            shots: 64,
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_perfect_phases_read_out_exactly() {
        let d = Device::poughkeepsie().noiseless();
        let cfg = ExperimentConfig {
            placements: PlacementSelector::TopK(1),
            ..quick()
        };
        let run = run_qft_perfect_phases(&d, &cfg).unwrap();
        assert_eq!(run.placed.len(), 3);
        for p in &run.placed {
            assert!(p.table.rows.iter().all(|r| r.f1 == 1.0 && r.f2 == 1.0));
        }
        let linear = run.for_kind(GeometryKind::Linear3Cct).next().unwrap();
        let star = run.for_kind(GeometryKind::Star4).next().unwrap();
        assert_eq!(linear.cnot_count, star.cnot_count + 2);
    }

    #[test]
    fn explicit_selection_and_unsupported_kind() {
        let d = Device::poughkeepsie().noiseless();
        let star = enumerate_stars(&d.graph)[0].clone();
        let cfg = ExperimentConfig {
            placements: PlacementSelector::Explicit(vec![star.clone()]),
            grid: Some(vec![0.0, PI / 8.0]),
            ..quick()
        };
        let run = run_qpe_phase_sweep(&d, &cfg).unwrap();
        assert!(run.survey.is_none());
        assert_eq!(run.placed.len(), 1);
        assert_eq!(run.placed[0].placement, star);
        let cfg = ExperimentConfig {
            geometries: Some(vec![GeometryKind::Ring6OneChains]),
            ..quick()
        };
        assert!(matches!(
            run_qft_perfect_phases(&d, &cfg),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn ratio_spread_of_constant_ratio_is_zero() {
        let meta = TableMetadata::new("x", 0, &Device::poughkeepsie().calibration);
        let mut t = ResultTable::new("x", "phase", "rad", meta);
        t.rows = vec![
            ResultRow::new(0.0, 0.7, 0.7, 10).with_theory(1.0),
            ResultRow::new(1.0, 0.35, 0.35, 10).with_theory(0.5),
        ];
        let (mean, spread) = ratio_spread(&t).unwrap();
        assert!((mean - 0.7).abs() < 1e-12 && spread < 1e-12);
    }
}
