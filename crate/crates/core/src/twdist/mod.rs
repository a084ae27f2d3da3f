//! Tracy-Widom distribution of order β = 1.
//!
//! The table is built from the Hastings–McLeod solution `q` of Painlevé II:
//!
//! ```text
//! F₂(s) = exp(−∫ₛ^∞ (x − s) q(x)² dx)
//! E(s)  = exp(−½ ∫ₛ^∞ q(x) dx)
//! F₁(s) = E(s)·√F₂(s) = exp(−½ (v(s) + w(s)))
//! f₁(s) = ½ F₁(s)·(u(s) + q(s))
//! ```
//!
//! with `u, v, w` the quadratures carried by the integrator. The density is
//! the exact derivative of the accumulated form, and the survival function is
//! stored separately as `−expm1(−½(v + w))` so right-tail p-values keep their
//! relative precision.

mod airy;
mod ode;
mod painleve;

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::OnceLock;

pub use airy::airy_ai;
pub use painleve::{hastings_mcleod, PainleveSolution};

use crate::error::{EbrError, Result};

pub const DEFAULT_S_MIN: f64 = -10.0;
/// Airy boundary; Ai(8) ≈ 4.7e-8.
pub const DEFAULT_S_MAX: f64 = 8.0;
pub const DEFAULT_STEP: f64 = 0.005;

/// Above this CDF level interpolation switches to log-survival.
const TAIL_SWITCH: f64 = 0.99;
const CACHE_VERSION: u32 = 1;

/// Dense samples of `(s, F₁(s), f₁(s), 1 − F₁(s))` backing CDF, survival
/// and quantile evaluation. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TwTable {
    s_grid: Vec<f64>,
    cdf_values: Vec<f64>,
    pdf_values: Vec<f64>,
    sf_values: Vec<f64>,
    tail_start: usize,
}

/// Builds the TW₁ table on `[s_min, s_max]` with uniform spacing `step`.
///
/// The Painlevé II equation is integrated backward from the Airy boundary at
/// `s_max`.
pub fn build_tw1_table(s_min: f64, s_max: f64, step: f64) -> Result<TwTable> {
    if !(s_min < -8.0 && s_max > 6.0 && step > 0.0 && step <= 0.01) {
        return Err(EbrError::Domain(format!(
            "TW₁ table needs s_min < −8, s_max > 6, 0 < step ≤ 0.01 (got {s_min}, {s_max}, {step})"
        )));
    }
    let states = painleve::integrate(s_min, s_max, step)?;
    let len = states.len();
    let (mut s_grid, mut cdf, mut pdf, mut sf) =
        (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
    for p in states.iter().rev() {
        let half_log = -0.5 * (p.v + p.w);
        let f1 = half_log.exp();
        s_grid.push(p.s);
        cdf.push(f1);
        pdf.push((0.5 * f1 * (p.u + p.q)).max(0.0));
        sf.push(-half_log.exp_m1());
    }
    TwTable::from_columns(s_grid, cdf, pdf, sf)
}

/// Process-wide table on the default grid, built on first use.
pub fn standard_table() -> &'static TwTable {
    static TABLE: OnceLock<TwTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        build_tw1_table(DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_STEP).expect("default TW₁ grid integrates")
    })
}

impl TwTable {
    /// Assembles a table from its columns, checking every table invariant.
    pub fn from_columns(s_grid: Vec<f64>, cdf_values: Vec<f64>, pdf_values: Vec<f64>, sf_values: Vec<f64>) -> Result<Self> {
        let n = s_grid.len();
        let bad = |msg: String| Err(EbrError::Domain(format!("invalid TW table: {msg}")));
        if n < 2 || cdf_values.len() != n || pdf_values.len() != n || sf_values.len() != n {
            return bad(format!("column lengths {n}/{}/{}/{}", cdf_values.len(), pdf_values.len(), sf_values.len()));
        }
        if s_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("abscissae not strictly increasing".into());
        }
        if cdf_values.windows(2).any(|w| !(w[0] <= w[1])) {
            return bad("CDF not non-decreasing".into());
        }
        if !(cdf_values[0] < 1e-8 && cdf_values[n - 1] > 1.0 - 1e-8) {
            return bad(format!("CDF tails {} / {} do not reach 0 / 1", cdf_values[0], cdf_values[n - 1]));
        }
        if pdf_values.iter().any(|&f| !(f >= 0.0)) || sf_values.iter().any(|&q| !(0.0..=1.0).contains(&q)) {
            return bad("negative density or survival outside [0, 1]".into());
        }
        let mass = trapezoid(&s_grid, &pdf_values);
        if !(0.999..=1.001).contains(&mass) {
            return bad(format!("density integrates to {mass}"));
        }
        let tail_start = cdf_values.iter().position(|&c| c > TAIL_SWITCH).unwrap_or(n - 1);
        Ok(Self { s_grid, cdf_values, pdf_values, sf_values, tail_start })
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf_values
    }

    pub fn pdf_values(&self) -> &[f64] {
        &self.pdf_values
    }

    pub fn sf_values(&self) -> &[f64] {
        &self.sf_values
    }

    pub fn s_min(&self) -> f64 {
        self.s_grid[0]
    }

    pub fn s_max(&self) -> f64 {
        self.s_grid[self.s_grid.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.s_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_grid.is_empty()
    }

    /// Interval index `i` with `s_grid[i] ≤ s ≤ s_grid[i + 1]`; `s` must be inside the support.
    fn interval(&self, s: f64) -> usize {
        let i = self.s_grid.partition_point(|&x| x <= s);
        i.saturating_sub(1).min(self.s_grid.len() - 2)
    }

    /// F₁(s), clamped to 0 below and 1 above the table support.
    pub fn cdf(&self, s: f64) -> f64 {
        if s.is_nan() {
            return f64::NAN;
        }
        if s < self.s_min() {
            return 0.0;
        }
        if s > self.s_max() {
            return 1.0;
        }
        let i = self.interval(s);
        if i >= self.tail_start {
            return 1.0 - self.tail_sf(i, s);
        }
        let (x0, x1) = (self.s_grid[i], self.s_grid[i + 1]);
        monotone_hermite(x0, x1, self.cdf_values[i], self.cdf_values[i + 1], self.pdf_values[i], self.pdf_values[i + 1], s)
            .clamp(0.0, 1.0)
    }

    /// 1 − F₁(s), interpolated in log space where F₁ > 0.99.
    pub fn sf(&self, s: f64) -> f64 {
        if s.is_nan() {
            return f64::NAN;
        }
        if s < self.s_min() {
            return 1.0;
        }
        if s > self.s_max() {
            return 0.0;
        }
        let i = self.interval(s);
        if i >= self.tail_start {
            self.tail_sf(i, s)
        } else {
            1.0 - self.cdf(s)
        }
    }

    fn tail_sf(&self, i: usize, s: f64) -> f64 {
        let (x0, x1) = (self.s_grid[i], self.s_grid[i + 1]);
        let (q0, q1) = (self.sf_values[i], self.sf_values[i + 1]);
        if q0 <= 0.0 || q1 <= 0.0 {
            let t = (s - x0) / (x1 - x0);
            return (q0 + t * (q1 - q0)).max(0.0);
        }
        // d/ds log(1 − F) = −f / (1 − F)
        let (d0, d1) = (-self.pdf_values[i] / q0, -self.pdf_values[i + 1] / q1);
        monotone_hermite(x0, x1, q0.ln(), q1.ln(), d0, d1, s).exp().min(1.0)
    }

    /// Density by differentiating the CDF interpolant's data: Hermite
    /// interpolation of the stored density values.
    pub fn pdf(&self, s: f64) -> f64 {
        if !(s >= self.s_min() && s <= self.s_max()) {
            return 0.0;
        }
        let i = self.interval(s);
        let t = (s - self.s_grid[i]) / (self.s_grid[i + 1] - self.s_grid[i]);
        (self.pdf_values[i] + t * (self.pdf_values[i + 1] - self.pdf_values[i])).max(0.0)
    }

    /// s with F₁(s) = p, by bisection on the interpolant.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(EbrError::Domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        let (mut lo, mut hi) = (self.s_min(), self.s_max());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            // Compare in survival space on the right to keep precision for p → 1.
            let below = if p > TAIL_SWITCH { self.sf(mid) > 1.0 - p } else { self.cdf(mid) < p };
            if below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// ∫ s f₁(s) ds over the table (trapezoidal rule).
    pub fn mean(&self) -> f64 {
        let integrand: Vec<f64> = self.s_grid.iter().zip(&self.pdf_values).map(|(s, f)| s * f).collect();
        trapezoid(&self.s_grid, &integrand)
    }

    /// ∫ (s − mean)² f₁(s) ds over the table (trapezoidal rule).
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let integrand: Vec<f64> =
            self.s_grid.iter().zip(&self.pdf_values).map(|(s, f)| (s - mu) * (s - mu) * f).collect();
        trapezoid(&self.s_grid, &integrand)
    }

    /// Writes the table as a versioned text file: a header line naming the
    /// grid parameters, a column line, then `s,cdf,pdf,sf` rows in
    /// shortest round-trip decimal form.
    pub fn write_cache(&self, path: &Path, s_min: f64, s_max: f64, step: f64) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let mut out = BufWriter::new(fs::File::create(path)?);
        writeln!(out, "{}", cache_header(s_min, s_max, step))?;
        writeln!(out, "s,cdf,pdf,sf")?;
        for i in 0..self.len() {
            writeln!(out, "{:e},{:e},{:e},{:e}", self.s_grid[i], self.cdf_values[i], self.pdf_values[i], self.sf_values[i])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a cache file. Returns `Ok(None)` when the header does not match
    /// the requested version and grid parameters.
    pub fn read_cache(path: &Path, s_min: f64, s_max: f64, step: f64) -> Result<Option<Self>> {
        let reader = BufReader::new(fs::File::open(path)?);
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header != cache_header(s_min, s_max, step) {
            return Ok(None);
        }
        let columns = lines.next().transpose()?.unwrap_or_default();
        if columns != "s,cdf,pdf,sf" {
            return Err(EbrError::Cache(format!("{}: unexpected column line {columns:?}", path.display())));
        }
        let (mut s, mut c, mut f, mut q) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (idx, line) in lines.enumerate() {
            let line = line?;
            let fields: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| EbrError::Cache(format!("{}: line {}: {e}", path.display(), idx + 3)))?;
            if fields.len() != 4 {
                return Err(EbrError::Cache(format!("{}: line {} has {} fields", path.display(), idx + 3, fields.len())));
            }
            s.push(fields[0]);
            c.push(fields[1]);
            f.push(fields[2]);
            q.push(fields[3]);
        }
        Self::from_columns(s, c, f, q).map(Some)
    }

    /// Loads the table from `path` if it holds a matching grid, otherwise
    /// builds it and (re)writes the file.
    pub fn load_or_build(path: &Path, s_min: f64, s_max: f64, step: f64) -> Result<Self> {
        if path.exists() {
            if let Ok(Some(table)) = Self::read_cache(path, s_min, s_max, step) {
                return Ok(table);
            }
        }
        let table = build_tw1_table(s_min, s_max, step)?;
        table.write_cache(path, s_min, s_max, step)?;
        Ok(table)
    }
}

fn cache_header(s_min: f64, s_max: f64, step: f64) -> String {
    format!("# ebr-tw1-table version={CACHE_VERSION} s_min={s_min:e} s_max={s_max:e} step={step:e}")
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

/// Cubic Hermite interpolation with Fritsch–Carlson slope limiting, so the
/// interpolant is monotone whenever the end values are.
fn monotone_hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let delta = (y1 - y0) / h;
    let (mut d0, mut d1) = (d0, d1);
    if delta == 0.0 {
        d0 = 0.0;
        d1 = 0.0;
    } else {
        let (mut a, mut b) = ((d0 / delta).max(0.0), (d1 / delta).max(0.0));
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            a *= tau;
            b *= tau;
        }
        d0 = a * delta;
        d1 = b * delta;
    }
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}
