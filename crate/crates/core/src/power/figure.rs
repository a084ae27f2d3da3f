//! Long-format figure data and minimal SVG line charts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PowerReport;
use crate::error::{EbrError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureCase {
    Ar1,
    LinearCsd,
    Nonmono,
}

impl FigureCase {
    pub fn kind(&self) -> &'static str {
        match self {
            FigureCase::Ar1 => "ar1",
            FigureCase::LinearCsd => "linear_csd",
            FigureCase::Nonmono => "nonmono",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            FigureCase::Ar1 => "EBR power under autocorrelation",
            FigureCase::LinearCsd => "EBR power under linear cross-sectional dependence",
            FigureCase::Nonmono => "EBR power under non-monotonic cross-sectional dependence",
        }
    }

    fn parameter_name(&self) -> &'static str {
        match self {
            FigureCase::Ar1 => "phi",
            FigureCase::LinearCsd => "rho",
            FigureCase::Nonmono => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub parameter: Option<f64>,
    pub n: usize,
    pub m: usize,
    pub power: f64,
    pub stderr: f64,
}

/// Rows of `report` belonging to `case`, copied without recomputation.
pub fn emit_figure_data(report: &PowerReport, case: FigureCase) -> Result<Vec<FigureRow>> {
    let rows: Vec<FigureRow> = report
        .rows
        .iter()
        .filter(|r| r.kind == case.kind())
        .map(|r| FigureRow { parameter: r.parameter, n: r.n, m: r.m, power: r.power, stderr: r.mc_stderr })
        .collect();
    if rows.is_empty() {
        let mut available: Vec<&str> = report.rows.iter().map(|r| r.kind.as_str()).collect();
        available.dedup();
        return Err(EbrError::Config(format!(
            "report has no '{}' cells; available: {}",
            case.kind(),
            if available.is_empty() { "none".to_string() } else { available.join(", ") }
        )));
    }
    Ok(rows)
}

pub fn write_figure_csv(path: &Path, report: &PowerReport, case: FigureCase) -> Result<()> {
    let rows = emit_figure_data(report, case)?;
    let mut out = report.metadata.csv_comment();
    let _ = write!(out, "\n{},n,m,power,stderr\n", case.parameter_name());
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.parameter.map(|p| p.to_string()).unwrap_or_default(),
            r.n,
            r.m,
            r.power,
            r.stderr
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// One line per (n, m) series; x axis is the parameter (or m when the case
/// has none), y axis is power on [0, 1].
pub fn render_svg(rows: &[FigureRow], case: FigureCase) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 9] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"];

    let x_of = |r: &FigureRow| r.parameter.unwrap_or(r.m as f64);
    let (mut x_min, mut x_max) = rows.iter().map(x_of).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !(x_max > x_min) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    let sx = |x: f64| PAD + (x - x_min) / (x_max - x_min) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - y * (H - 2.0 * PAD);

    let mut series: Vec<((usize, usize), Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        let key = if case == FigureCase::Nonmono { (r.n, 0) } else { (r.n, r.m) };
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((x_of(r), r.power)),
            None => series.push((key, vec![(x_of(r), r.power)])),
        }
    }

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, case.title());
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD},{} L{PAD},{} L{},{}" fill="none" stroke="black"/>"#,
        PAD,
        H - PAD,
        W - PAD,
        H - PAD
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end" font-size="10">{tick}</text>"#, PAD - 5.0, sy(tick) + 3.0);
    }
    let x_label = if case == FigureCase::Nonmono { "m" } else { case.parameter_name() };
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{x_label}</text>"#, W / 2.0, H - 12.0);
    for (idx, ((n, m), pts)) in series.iter_mut().enumerate() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = COLORS[idx % COLORS.len()];
        let d: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, d.join(" "));
        let label = if case == FigureCase::Nonmono { format!("n={n}") } else { format!("n={n}, m={m}") };
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="10" fill="{color}">{label}</text>"#,
            W - PAD + 2.0 - 90.0,
            PAD + 12.0 * idx as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}
