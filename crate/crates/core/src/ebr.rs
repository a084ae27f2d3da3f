//! The EBR test: standardize → pad to square → symmetrize → λ₁ → TW₁ scale → p-value.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{EbrError, Result};
use crate::rng;
use crate::spectral::{largest_eigenvalue, SymmetricMatrix};
use crate::twdist::TwTable;

/// Dyson index of the reference ensemble (GOE).
pub const BETA: u32 = 1;

/// Residual panel in canonical orientation: rows are cross-sectional units,
/// columns are time periods.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualMatrix {
    values: DMatrix<f64>,
    label: Option<String>,
}

impl ResidualMatrix {
    /// Validates finiteness, shape (at least 2×2) and non-constancy.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let (n, m) = values.shape();
        if n < 2 || m < 2 {
            return Err(EbrError::InvalidMatrix(format!("need at least 2 units and 2 periods, got {n}×{m}")));
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(EbrError::InvalidMatrix(format!(
                "non-finite residual at unit {}, period {}",
                idx % n,
                idx / n
            )));
        }
        let first = values[(0, 0)];
        if values.iter().all(|&v| v == first) {
            return Err(EbrError::Degenerate("all residuals are identical".into()));
        }
        Ok(Self { values, label: None })
    }

    /// Builds from row slices (one row per unit).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(EbrError::InvalidMatrix("rows have different lengths".into()));
        }
        Self::new(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn n_units(&self) -> usize {
        self.values.nrows()
    }

    pub fn m_periods(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Swaps the roles of units and periods.
    pub fn transposed(&self) -> Self {
        Self { values: self.values.transpose(), label: self.label.clone() }
    }

    /// Applies `f` elementwise, re-validating the result.
    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Result<Self> {
        Ok(Self { label: self.label.clone(), ..Self::new(self.values.map(f))? })
    }
}

/// `(E − μ)/σ` with μ the grand mean and σ the population standard deviation
/// over all n·m elements.
pub fn standardize(e: &ResidualMatrix) -> Result<ResidualMatrix> {
    let count = e.values.len() as f64;
    let mean = e.values.iter().sum::<f64>() / count;
    let var = e.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
    let sd = var.sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(EbrError::Degenerate(format!("residual standard deviation is {sd}")));
    }
    let values = e.values.map(|v| (v - mean) / sd);
    Ok(ResidualMatrix { values, label: e.label.clone() })
}

/// Embeds `e_star` into a k×k matrix, k = max(n, m).
///
/// Tall input (n > m) gets k − m standard-normal columns on the right; wide
/// input (n < m) gets k − n rows at the bottom. Padding cells are drawn in
/// row-major order. Square input is returned as is and `rng` is not touched.
pub fn pad_to_square<R: Rng + ?Sized>(e_star: &ResidualMatrix, rng: &mut R) -> DMatrix<f64> {
    let (n, m) = e_star.values.shape();
    let k = n.max(m);
    if n == m {
        return e_star.values.clone();
    }
    let mut z = DMatrix::zeros(k, k);
    z.view_mut((0, 0), (n, m)).copy_from(&e_star.values);
    if n > m {
        for i in 0..k {
            for j in m..k {
                z[(i, j)] = rng.sample(StandardNormal);
            }
        }
    } else {
        for i in n..k {
            for j in 0..k {
                z[(i, j)] = rng.sample(StandardNormal);
            }
        }
    }
    z
}

/// `½(Z + Zᵀ)`.
pub fn symmetrize(z: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    SymmetricMatrix::symmetrize(z)
}

/// Maps λ₁ of S = ½(Z + Zᵀ) onto the TW₁ scale: `k^(1/6)·(√2·λ₁ − 2√k)`.
///
/// With iid N(0,1) entries in Z, S has off-diagonal variance ½ and diagonal
/// variance 1, so √2·S is the GOE normalized to off-diagonal variance 1 and
/// diagonal variance 2. Its largest eigenvalue λ satisfies
/// `k^(1/6)(λ − 2√k) → TW₁`. No finite-k correction is applied.
pub fn tw_scale(lambda1: f64, k: usize) -> f64 {
    let kf = k as f64;
    kf.powf(1.0 / 6.0) * (std::f64::consts::SQRT_2 * lambda1 - 2.0 * kf.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EbrConfig {
    pub alpha: f64,
    /// Number of independent padding draws; odd so the median p-value is a sample value.
    pub padding_reps: usize,
    pub seed: u64,
}

impl EbrConfig {
    pub fn new(seed: u64) -> Self {
        Self { alpha: 0.05, padding_reps: 1, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(EbrError::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.padding_reps == 0 || self.padding_reps % 2 == 0 {
            return Err(EbrError::Config(format!("padding_reps must be a positive odd integer, got {}", self.padding_reps)));
        }
        Ok(())
    }
}

/// Outcome of one padding draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaddingOutcome {
    pub lambda1: f64,
    pub s_stat: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbrResult {
    /// λ₁ of the padding draw whose p-value is the median.
    pub lambda1: f64,
    pub s_stat: f64,
    pub p_value: f64,
    pub reject: bool,
    pub k: usize,
    pub alpha: f64,
    pub seed: u64,
    pub padding_reps: usize,
    pub n_units: usize,
    pub m_periods: usize,
    pub per_padding: Vec<PaddingOutcome>,
}

/// Stream used for padding draw `index` under `seed`.
pub fn padding_stream(seed: u64, index: usize) -> rng::StreamRng {
    rng::stream(seed, "padding", index as u64)
}

/// Runs the one-sided (upper-tail) EBR test.
///
/// Deterministic in `(e, cfg)`: padding draw r uses [`padding_stream`]`(cfg.seed, r)`.
pub fn ebr_test(e: &ResidualMatrix, cfg: &EbrConfig, table: &TwTable) -> Result<EbrResult> {
    cfg.validate()?;
    if table.len() < 2 {
        return Err(EbrError::Config("Tracy-Widom table is empty".into()));
    }
    let e_star = standardize(e)?;
    let (n, m) = (e.n_units(), e.m_periods());
    let k = n.max(m);

    let one = |index: usize| -> Result<PaddingOutcome> {
        let mut stream = padding_stream(cfg.seed, index);
        let z = pad_to_square(&e_star, &mut stream);
        let s = symmetrize(&z)?;
        let lambda1 = largest_eigenvalue(&s)?;
        let s_stat = tw_scale(lambda1, k);
        Ok(PaddingOutcome { lambda1, s_stat, p_value: table.sf(s_stat) })
    };

    let per_padding = if n == m {
        // No randomness enters: every draw is identical.
        vec![one(0)?; cfg.padding_reps]
    } else {
        (0..cfg.padding_reps).map(one).collect::<Result<Vec<_>>>()?
    };

    let mut order: Vec<usize> = (0..per_padding.len()).collect();
    order.sort_by(|&a, &b| per_padding[a].p_value.total_cmp(&per_padding[b].p_value).then(a.cmp(&b)));
    let median = per_padding[order[order.len() / 2]];

    Ok(EbrResult {
        lambda1: median.lambda1,
        s_stat: median.s_stat,
        p_value: median.p_value,
        reject: median.p_value < cfg.alpha,
        k,
        alpha: cfg.alpha,
        seed: cfg.seed,
        padding_reps: cfg.padding_reps,
        n_units: n,
        m_periods: m,
        per_padding,
    })
}
