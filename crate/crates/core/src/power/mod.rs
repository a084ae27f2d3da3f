//! Monte Carlo size/power harness over a (DGP × n × m) grid.
//!
//! Replication `r` of a cell draws its data from
//! `stream(master_seed, "<cell>/data", r)` and its padding from the seed
//! `derive_seed(master_seed, "<cell>/padding", r)`, where `<cell>` is the
//! cell descriptor (e.g. `ar1(phi=0.8)/n=100/m=50`). Cells never share
//! streams, so adding cells leaves existing ones unchanged, and results do
//! not depend on worker count or scheduling.

mod correlation;
mod figure;

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use correlation::{correlation_summary, kendall_tau_b, pearson, spearman, CorrelationSummary};
pub use figure::{emit_figure_data, render_svg, write_figure_csv, FigureCase, FigureRow};

use crate::dgp::DgpSpec;
use crate::ebr::{ebr_test, EbrConfig};
use crate::error::{EbrError, Result};
use crate::rng;
use crate::twdist::TwTable;

pub const DEFAULT_N_VALUES: [usize; 3] = [30, 50, 100];
pub const DEFAULT_M_VALUES: [usize; 3] = [15, 20, 50];
pub const DEFAULT_REPLICATIONS: u64 = 1000;
/// φ grid for the autocorrelation experiment.
pub const DEFAULT_PHI_VALUES: [f64; 3] = [0.2, 0.5, 0.8];
/// ρ grid for the linear CSD experiment.
pub const DEFAULT_RHO_VALUES: [f64; 3] = [0.2, 0.5, 0.8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub dgp_specs: Vec<DgpSpec>,
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub replications: u64,
    pub alpha: f64,
    pub master_seed: u64,
    #[serde(default = "one")]
    pub padding_reps: usize,
}

fn one() -> usize {
    1
}

impl ExperimentGrid {
    /// Default n/m grid, 1000 replications, α = 0.05, one padding draw.
    pub fn new(dgp_specs: Vec<DgpSpec>, master_seed: u64) -> Self {
        Self {
            dgp_specs,
            n_values: DEFAULT_N_VALUES.to_vec(),
            m_values: DEFAULT_M_VALUES.to_vec(),
            replications: DEFAULT_REPLICATIONS,
            alpha: 0.05,
            master_seed,
            padding_reps: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(EbrError::Config("replications must be ≥ 1".into()));
        }
        if self.dgp_specs.is_empty() || self.n_values.is_empty() || self.m_values.is_empty() {
            return Err(EbrError::Config("grid has an empty axis".into()));
        }
        for spec in &self.dgp_specs {
            spec.validate()?;
        }
        if self.n_values.iter().chain(&self.m_values).any(|&d| d < 2) {
            return Err(EbrError::Config("n and m values must be ≥ 2".into()));
        }
        EbrConfig { alpha: self.alpha, padding_reps: self.padding_reps, seed: 0 }.validate()?;
        let cells = self.cells();
        let mut ids: Vec<String> = cells.iter().map(|c| c.id()).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != cells.len() {
            return Err(EbrError::Config("grid enumerates a cell more than once".into()));
        }
        Ok(())
    }

    /// Cells in spec-major, then n, then m order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for spec in &self.dgp_specs {
            for &n in &self.n_values {
                for &m in &self.m_values {
                    out.push(Cell { spec: *spec, n, m });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub spec: DgpSpec,
    pub n: usize,
    pub m: usize,
}

impl Cell {
    pub fn id(&self) -> String {
        format!("{}/n={}/m={}", self.spec, self.n, self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub dgp: String,
    pub kind: String,
    pub parameter: Option<f64>,
    pub n: usize,
    pub m: usize,
    pub rejections: u64,
    pub replications: u64,
    pub power: f64,
    pub mc_stderr: f64,
}

impl PowerRow {
    fn new(cell: &Cell, rejections: u64, replications: u64) -> Self {
        let p = rejections as f64 / replications as f64;
        Self {
            dgp: cell.spec.to_string(),
            kind: cell.spec.kind().to_string(),
            parameter: cell.spec.parameter(),
            n: cell.n,
            m: cell.m,
            rejections,
            replications,
            power: p,
            mc_stderr: (p * (1.0 - p) / replications as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub version: String,
    pub master_seed: u64,
    pub alpha: f64,
    pub replications: u64,
    pub padding_reps: usize,
    pub design_fingerprint: String,
    pub design_decisions: Vec<String>,
}

impl ReportMetadata {
    pub fn for_grid(grid: &ExperimentGrid) -> Self {
        Self {
            version: crate::VERSION.to_string(),
            master_seed: grid.master_seed,
            alpha: grid.alpha,
            replications: grid.replications,
            padding_reps: grid.padding_reps,
            design_fingerprint: crate::design_fingerprint(),
            design_decisions: crate::DESIGN_DECISIONS.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// `# key=value` comment line for CSV outputs.
    pub fn csv_comment(&self) -> String {
        format!(
            "# ebr version={} seed={} alpha={} replications={} padding_reps={} fingerprint={}",
            self.version, self.master_seed, self.alpha, self.replications, self.padding_reps, self.design_fingerprint
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<PowerRow>,
}

impl PowerReport {
    pub fn row(&self, spec: &DgpSpec, n: usize, m: usize) -> Option<&PowerRow> {
        let dgp = spec.to_string();
        self.rows.iter().find(|r| r.dgp == dgp && r.n == n && r.m == m)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.metadata.csv_comment();
        out.push('\n');
        out.push_str("dgp,kind,parameter,n,m,rejections,replications,power,mc_stderr\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.dgp,
                r.kind,
                r.parameter.map(|p| p.to_string()).unwrap_or_default(),
                r.n,
                r.m,
                r.rejections,
                r.replications,
                r.power,
                r.mc_stderr
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }

    /// Plain-text summary table.
    pub fn summary(&self) -> String {
        let mut out = format!("{:<24} {:>5} {:>5} {:>8} {:>8}\n", "dgp", "n", "m", "power", "stderr");
        for r in &self.rows {
            out.push_str(&format!("{:<24} {:>5} {:>5} {:>8.3} {:>8.4}\n", r.dgp, r.n, r.m, r.power, r.mc_stderr));
        }
        out
    }
}

/// Whether replication `r` of `cell` rejects H₀.
pub fn run_replication(cell: &Cell, grid: &ExperimentGrid, r: u64, table: &TwTable) -> Result<bool> {
    let id = cell.id();
    let mut data_rng = rng::stream(grid.master_seed, &format!("{id}/data"), r);
    let e = cell.spec.generate(cell.n, cell.m, &mut data_rng)?;
    let cfg = EbrConfig {
        alpha: grid.alpha,
        padding_reps: grid.padding_reps,
        seed: rng::derive_seed(grid.master_seed, &format!("{id}/padding"), r),
    };
    Ok(ebr_test(&e, &cfg, table)?.reject)
}

/// Runs every cell on the current rayon pool.
pub fn run_grid(grid: &ExperimentGrid, table: &TwTable) -> Result<PowerReport> {
    grid.validate()?;
    let mut rows = Vec::new();
    for cell in grid.cells() {
        let outcomes: Vec<Result<bool>> =
            (0..grid.replications).into_par_iter().map(|r| run_replication(&cell, grid, r, table)).collect();
        let mut rejections = 0u64;
        for (r, outcome) in outcomes.into_iter().enumerate() {
            let reject = outcome.map_err(|e| EbrError::Replication {
                cell: cell.id(),
                replication: r as u64,
                source: Box::new(e),
            })?;
            rejections += u64::from(reject);
        }
        rows.push(PowerRow::new(&cell, rejections, grid.replications));
    }
    Ok(PowerReport { metadata: ReportMetadata::for_grid(grid), rows })
}

/// [`run_grid`] on a dedicated pool with `workers` threads.
pub fn run_grid_with_workers(grid: &ExperimentGrid, table: &TwTable, workers: usize) -> Result<PowerReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| EbrError::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_grid(grid, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twdist::standard_table;

    fn small_grid() -> ExperimentGrid {
        ExperimentGrid {
            dgp_specs: vec![DgpSpec::Iid, DgpSpec::Ar1 { phi: 0.8 }],
            n_values: vec![12, 20],
            m_values: vec![8],
            replications: 40,
            alpha: 0.05,
            master_seed: 17,
            padding_reps: 1,
        }
    }

    #[test]
    fn enumerates_each_cell_once() {
        let grid = ExperimentGrid::new(vec![DgpSpec::Ar1 { phi: 0.2 }, DgpSpec::Ar1 { phi: 0.5 }, DgpSpec::Ar1 { phi: 0.8 }], 1);
        assert_eq!(grid.cells().len(), 27);
        grid.validate().unwrap();
        let dup = ExperimentGrid { n_values: vec![30, 30], ..grid };
        assert!(dup.validate().is_err());
    }

    #[test]
    fn rows_are_consistent() {
        let report = run_grid(&small_grid(), standard_table()).unwrap();
        assert_eq!(report.rows.len(), 4);
        for r in &report.rows {
            assert!(r.rejections <= r.replications);
            assert!((0.0..=1.0).contains(&r.power));
            let p = r.rejections as f64 / r.replications as f64;
            assert_eq!(r.power, p);
            assert_eq!(r.mc_stderr, (p * (1.0 - p) / r.replications as f64).sqrt());
        }
    }

    #[test]
    fn reproducible_and_worker_independent() {
        let grid = small_grid();
        let a = run_grid_with_workers(&grid, standard_table(), 1).unwrap();
        let b = run_grid_with_workers(&grid, standard_table(), 4).unwrap();
        let c = run_grid(&grid, standard_table()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn adding_cells_does_not_perturb_existing_ones() {
        let grid = small_grid();
        let base = run_grid(&grid, standard_table()).unwrap();
        let mut wider = grid.clone();
        wider.dgp_specs.insert(0, DgpSpec::Nonmono);
        wider.n_values.push(9);
        let extended = run_grid(&wider, standard_table()).unwrap();
        for row in &base.rows {
            let other = extended.rows.iter().find(|r| r.dgp == row.dgp && r.n == row.n && r.m == row.m).unwrap();
            assert_eq!(row, other);
        }
    }

    #[test]
    fn invalid_grids() {
        let t = standard_table();
        assert!(run_grid(&ExperimentGrid { replications: 0, ..small_grid() }, t).is_err());
        assert!(run_grid(&ExperimentGrid { alpha: 1.5, ..small_grid() }, t).is_err());
        assert!(run_grid(&ExperimentGrid { dgp_specs: vec![DgpSpec::Ar1 { phi: 1.0 }], ..small_grid() }, t).is_err());
        assert!(run_grid(&ExperimentGrid { m_values: vec![], ..small_grid() }, t).is_err());
    }

    #[test]
    fn csv_and_json_carry_metadata() {
        let report = run_grid(&small_grid(), standard_table()).unwrap();
        let csv = report.to_csv();
        assert!(csv.starts_with("# ebr version="));
        assert!(csv.contains("seed=17") && csv.contains("alpha=0.05") && csv.contains(&crate::design_fingerprint()));
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["metadata"]["master_seed"], 17);
        let back: PowerReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }
}
