//! Result persistence: CSV and JSON tables, fit sidecars, the run manifest
//! and static SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{damped_cosine, FitModel, FitResult};
use crate::error::{Error, Result};
use crate::experiments::ResultTable;

/// Versioned CSV schema. Changing it is a breaking change.
pub const CSV_HEADER: &str = "independent_var,f1,f1_stderr,f2,f2_stderr,shots";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}; use csv or json"))),
        }
    }
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Identifies a run; written before any result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Calibration file, or `None` for the shipped default.
    pub config_path: Option<String>,
    pub topology_path: Option<String>,
    pub output_dir: String,
    pub seed: u64,
    pub shots: u64,
    pub tool_version: String,
    pub calibration_hash: String,
    /// Result files of the run, relative to `output_dir`.
    pub files: Vec<String>,
}

/// Fit sidecar written next to a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub model: FitModel,
    pub params: std::collections::BTreeMap<String, Option<f64>>,
    pub r_squared: Option<f64>,
    pub manifest: String,
}

impl FitSummary {
    pub fn new(fit: &FitResult) -> Self {
        FitSummary {
            model: fit.model,
            params: fit.params.clone(),
            r_squared: fit.r_squared,
            manifest: MANIFEST_FILE.to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    manifest: String,
    table: ResultTable,
}

/// `f` with six decimals and a dot separator.
fn num(f: f64) -> String {
    format!("{f:.6}")
}

pub fn to_csv(table: &ResultTable) -> String {
    let mut s = String::with_capacity(64 * (table.rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            num(r.independent_var),
            num(r.f1),
            num(r.f1_stderr),
            num(r.f2),
            num(r.f2_stderr),
            r.shots
        );
    }
    s
}

pub fn to_json(table: &ResultTable) -> Result<String> {
    let file = TableFile {
        manifest: MANIFEST_FILE.to_string(),
        table: table.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

pub fn from_json(s: &str) -> Result<ResultTable> {
    Ok(serde_json::from_str::<TableFile>(s)?.table)
}

/// File names `write_table` produces for `table`.
pub fn table_files(table: &ResultTable, format: OutputFormat, plot: bool) -> Vec<String> {
    let mut files = vec![format!("{}.{}", table.name, format.extension())];
    if table.fit.is_some() {
        files.push(format!("{}.fit.json", table.name));
    }
    if plot && !table.rows.is_empty() {
        files.push(format!("{}.svg", table.name));
    }
    files
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `table` (and its fit sidecar and plot) into `dir`.
pub fn write_table(
    table: &ResultTable,
    format: OutputFormat,
    plot: bool,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let main = dir.join(format!("{}.{}", table.name, format.extension()));
    match format {
        OutputFormat::Csv => write(&main, &to_csv(table))?,
        OutputFormat::Json => write(&main, &to_json(table)?)?,
    }
    out.push(main);
    if let Some(fit) = &table.fit {
        let path = dir.join(format!("{}.fit.json", table.name));
        write(&path, &(serde_json::to_string_pretty(&FitSummary::new(fit))? + "\n"))?;
        out.push(path);
    }
    if plot && !table.rows.is_empty() {
        let path = dir.join(format!("{}.svg", table.name));
        write(&path, &plot_svg(table)?)?;
        out.push(path);
    }
    Ok(out)
}

/// Writes the manifest, then every table. Returns all paths written.
pub fn write_run(
    manifest: &mut RunManifest,
    tables: &[&ResultTable],
    format: OutputFormat,
    plot: bool,
) -> Result<Vec<PathBuf>> {
    let dir = PathBuf::from(&manifest.output_dir);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    manifest.files = tables
        .iter()
        .flat_map(|t| table_files(t, format, plot))
        .collect();
    let manifest_path = dir.join(MANIFEST_FILE);
    write(&manifest_path, &(serde_json::to_string_pretty(manifest)? + "\n"))?;
    let mut out = vec![manifest_path];
    for t in tables {
        out.extend(write_table(t, format, plot, &dir)?);
    }
    Ok(out)
}

/// How a table is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotStyle {
    /// `f1` points with a dashed fitted curve.
    Decay,
    /// `f1` and `f2` point series.
    Fidelity,
    /// Measured `f1` points against a dashed noiseless curve.
    Phase,
}

impl PlotStyle {
    pub fn for_table(table: &ResultTable) -> Self {
        if table.rows.iter().any(|r| r.theory.is_some()) {
            PlotStyle::Phase
        } else if table.fit.is_some() {
            PlotStyle::Decay
        } else {
            PlotStyle::Fidelity
        }
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

struct Frame {
    x0: f64,
    x1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let span = if self.x1 > self.x0 { self.x1 - self.x0 } else { 1.0 };
        LEFT + (x - self.x0) / span * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - y.clamp(0.0, 1.0) * (H - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fit_curve(fit: &FitResult, t: f64) -> Option<f64> {
    match fit.model {
        FitModel::Exponential => {
            let tau = fit.param("T")?;
            let floor = fit.param("floor").unwrap_or(0.0);
            Some(floor + (1.0 - floor) * (-t / tau).exp())
        }
        FitModel::DampedCosine => Some(damped_cosine(t, fit.param("tphi")?, fit.param("omega")?)),
    }
}

fn scatter(s: &mut String, frame: &Frame, name: &str, color: &str, pts: &[(f64, f64, f64)]) {
    let _ = writeln!(s, r#"<g class="series" data-name="{name}" fill="{color}" stroke="{color}">"#);
    for &(x, y, e) in pts {
        let (cx, cy) = (frame.px(x), frame.py(y));
        if e > 0.0 {
            let _ = writeln!(
                s,
                r#"<line class="errorbar" x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}"/>"#,
                frame.py(y + e),
                frame.py(y - e)
            );
        }
        let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3"/>"#);
    }
    s.push_str("</g>\n");
}

fn dashed(s: &mut String, frame: &Frame, class: &str, name: &str, pts: &[(f64, f64)]) {
    let d: Vec<String> = pts
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            format!(
                "{}{:.2},{:.2}",
                if i == 0 { "M" } else { "L" },
                frame.px(x),
                frame.py(y)
            )
        })
        .collect();
    let _ = writeln!(
        s,
        r##"<path class="{class}" data-name="{name}" d="{}" fill="none" stroke="#444" stroke-width="1.5" stroke-dasharray="6,4"/>"##,
        d.join(" ")
    );
}

/// Scatter plot with error bars and, where available, a dashed fitted or
/// noiseless curve. Output depends only on the table.
pub fn plot_svg(table: &ResultTable) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::InvalidState(format!("table {} has no rows", table.name)));
    }
    let style = PlotStyle::for_table(table);
    let xs: Vec<f64> = table.rows.iter().map(|r| r.independent_var).collect();
    let frame = Frame {
        x0: xs.iter().copied().fold(f64::INFINITY, f64::min),
        x1: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        "<desc>{} | manifest: {}</desc>",
        escape(&table.metadata.provenance),
        MANIFEST_FILE
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="18" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(&table.name)
    );

    // Axes, ticks and labels.
    let (ax0, ax1, ay0, ay1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black"><line x1="{ax0}" y1="{ay0}" x2="{ax1}" y2="{ay0}"/><line x1="{ax0}" y1="{ay0}" x2="{ax0}" y2="{ay1}"/></g>"#
    );
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let py = frame.py(y);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y:.1}</text>"#,
            LEFT - 6.0,
            py + 4.0
        );
        let x = frame.x0 + (frame.x1 - frame.x0) * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            frame.px(x),
            ay0 + 16.0,
            format_tick(x)
        );
    }
    let _ = writeln!(
        s,
        r#"<text class="xlabel" x="{:.1}" y="{:.1}" text-anchor="middle">{} ({})</text>"#,
        (ax0 + ax1) / 2.0,
        H - 12.0,
        escape(&table.independent_var),
        escape(&table.unit)
    );
    let ylabel = match style {
        PlotStyle::Decay => "probability",
        _ => "fidelity",
    };
    let _ = writeln!(
        s,
        r#"<text class="ylabel" x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{ylabel}</text>"#,
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0
    );

    let f1: Vec<(f64, f64, f64)> = table
        .rows
        .iter()
        .map(|r| (r.independent_var, r.f1, r.f1_stderr))
        .collect();
    match style {
        PlotStyle::Decay => {
            scatter(&mut s, &frame, "f1", "#1f77b4", &f1);
            if let Some(fit) = table.fit.as_ref().filter(|f| f.succeeded()) {
                let pts: Vec<(f64, f64)> = (0..=200)
                    .filter_map(|i| {
                        let t = frame.x0 + (frame.x1 - frame.x0) * i as f64 / 200.0;
                        fit_curve(fit, t).map(|y| (t, y))
                    })
                    .collect();
                if !pts.is_empty() {
                    dashed(&mut s, &frame, "fit", "fit", &pts);
                }
            }
        }
        PlotStyle::Fidelity => {
            scatter(&mut s, &frame, "f1", "#1f77b4", &f1);
            if table.rows.iter().any(|r| r.f2 != r.f1) {
                let f2: Vec<(f64, f64, f64)> = table
                    .rows
                    .iter()
                    .map(|r| (r.independent_var, r.f2, r.f2_stderr))
                    .collect();
                scatter(&mut s, &frame, "f2", "#d62728", &f2);
            }
        }
        PlotStyle::Phase => {
            scatter(&mut s, &frame, "measured", "#1f77b4", &f1);
            let theory: Vec<(f64, f64)> = table
                .rows
                .iter()
                .filter_map(|r| r.theory.map(|t| (r.independent_var, t)))
                .collect();
            dashed(&mut s, &frame, "series theory", "theoretical", &theory);
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn format_tick(x: f64) -> String {
    if x.abs() >= 100.0 || x == x.round() {
        format!("{x:.0}")
    } else {
        format!("{x:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ResultRow, TableMetadata};
    use crate::noise::DeviceCalibration;

    fn table(rows: Vec<ResultRow>) -> ResultTable {
        let meta = TableMetadata::new("t1", 7, &DeviceCalibration::default_device());
        let mut t = ResultTable::new("t1", "delay", "us", meta);
        t.rows = rows;
        t
    }

    #[test]
    fn one_row_csv_has_two_lines() {
        let csv = to_csv(&table(vec![ResultRow::new(0.0, 0.8, 0.8, 8000)]));
        assert_eq!(
            csv,
            "independent_var,f1,f1_stderr,f2,f2_stderr,shots\n\
             0.000000,0.800000,0.004472,0.800000,0.004472,8000\n"
        );
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut t = table(vec![
            ResultRow::new(0.1, 1.0 / 3.0, 0.25, 8000).with_theory(0.4105),
            ResultRow::new(2.5, 0.123456789, 0.1, 7).with_label("x"),
        ]);
        t = t.with_extra("note", "n");
        let back = from_json(&to_json(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn format_parses() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert!("xml".parse::<OutputFormat>().is_err());
    }

    #[test]
    fn empty_table_cannot_be_plotted() {
        assert!(plot_svg(&table(Vec::new())).is_err());
    }

    #[test]
    fn phase_plot_has_two_series() {
        let t = table(vec![
            ResultRow::new(0.0, 0.7, 0.7, 100).with_theory(1.0),
            ResultRow::new(0.2, 0.3, 0.3, 100).with_theory(0.41),
        ]);
        let svg = plot_svg(&t).unwrap();
        assert_eq!(svg.matches("data-name=").count(), 2);
        assert!(svg.contains(r#"data-name="theoretical""#));
        assert!(svg.contains("stroke-dasharray"));
    }
}
