//! Eigenvalues of dense real symmetric matrices.
//!
//! Householder reduction to tridiagonal form, then either Sturm-sequence
//! bisection (largest eigenvalue only) or implicit QL with Wilkinson shifts
//! (full spectrum). Both paths are deterministic.

use nalgebra::DMatrix;

use crate::error::{EbrError, Result};

/// Real symmetric matrix with exact symmetry guaranteed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    inner: DMatrix<f64>,
}

impl SymmetricMatrix {
    /// Wraps `m` after checking it is square and exactly symmetric.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(EbrError::InvalidMatrix(format!("expected a non-empty square matrix, got {}×{}", m.nrows(), m.ncols())));
        }
        let k = m.nrows();
        for j in 0..k {
            for i in (j + 1)..k {
                if m[(i, j)].to_bits() != m[(j, i)].to_bits() {
                    return Err(EbrError::InvalidMatrix(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(Self { inner: m })
    }

    /// `½(Z + Zᵀ)`. The diagonal is copied from `z` unchanged.
    pub fn symmetrize(z: &DMatrix<f64>) -> Result<Self> {
        if !z.is_square() || z.nrows() == 0 {
            return Err(EbrError::InvalidMatrix(format!("symmetrize needs a square matrix, got {}×{}", z.nrows(), z.ncols())));
        }
        let k = z.nrows();
        let mut s = DMatrix::zeros(k, k);
        for j in 0..k {
            s[(j, j)] = z[(j, j)];
            for i in (j + 1)..k {
                let v = 0.5 * (z[(i, j)] + z[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        Ok(Self { inner: s })
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    pub fn order(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn check_finite(&self) -> Result<()> {
        if let Some((idx, v)) = self.inner.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let k = self.order();
            return Err(EbrError::Domain(format!("non-finite entry {v} at ({}, {})", idx % k, idx / k)));
        }
        Ok(())
    }
}

/// Symmetric tridiagonal matrix: `diag` has length k, `offdiag` length k − 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

/// Householder reduction `QᵀSQ = T`.
pub fn tridiagonalize(s: &SymmetricMatrix) -> Tridiagonal {
    let k = s.order();
    // Row-major working copy; only the trailing block is touched at each step.
    let mut a: Vec<f64> = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            a.push(s.inner[(i, j)]);
        }
    }
    let mut diag = vec![0.0; k];
    let mut offdiag = vec![0.0; k.saturating_sub(1)];
    let mut v = vec![0.0; k];
    let mut p = vec![0.0; k];
    for c in 0..k.saturating_sub(1) {
        diag[c] = a[c * k + c];
        let m = k - c - 1;
        let base = c + 1;
        let mut norm_sq = 0.0;
        for i in base..k {
            norm_sq += a[i * k + c] * a[i * k + c];
        }
        let norm = norm_sq.sqrt();
        if m == 1 || norm == 0.0 {
            offdiag[c] = a[base * k + c];
            continue;
        }
        let x0 = a[base * k + c];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        offdiag[c] = alpha;
        // v = (x − αe₁)/‖x − αe₁‖, H = I − 2vvᵀ
        for i in base..k {
            v[i] = a[i * k + c];
        }
        v[base] -= alpha;
        let vnorm = (norm_sq - x0 * x0 + v[base] * v[base]).sqrt();
        for vi in v[base..k].iter_mut() {
            *vi /= vnorm;
        }
        // p = B v, K = vᵀp, w = p − K v, B ← B − 2(v wᵀ + w vᵀ)
        let mut kv = 0.0;
        for i in base..k {
            let row = &a[i * k + base..i * k + k];
            let pi: f64 = row.iter().zip(&v[base..k]).map(|(x, y)| x * y).sum();
            p[i] = pi;
            kv += v[i] * pi;
        }
        for i in base..k {
            p[i] -= kv * v[i];
        }
        for i in base..k {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[i * k + base..i * k + k];
            for (j, x) in row.iter_mut().enumerate() {
                let j = j + base;
                *x -= 2.0 * (vi * p[j] + wi * v[j]);
            }
        }
    }
    if k > 0 {
        diag[k - 1] = a[(k - 1) * k + (k - 1)];
    }
    Tridiagonal { diag, offdiag }
}

impl Tridiagonal {
    /// Number of eigenvalues strictly less than `x` (Sturm count).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        let tiny = f64::MIN_POSITIVE.sqrt();
        for i in 0..self.diag.len() {
            let e2 = if i == 0 { 0.0 } else { self.offdiag[i - 1] * self.offdiag[i - 1] };
            d = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / d };
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let k = self.diag.len();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..k {
            let r = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 } + if i + 1 < k { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Largest eigenvalue by bisection on the Sturm count.
    pub fn largest_eigenvalue(&self) -> f64 {
        let k = self.diag.len();
        let (lo0, hi0) = self.gershgorin();
        let scale = lo0.abs().max(hi0.abs()).max(f64::MIN_POSITIVE);
        let (mut lo, mut hi) = (lo0 - f64::EPSILON * scale, hi0 + f64::EPSILON * scale);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * scale {
                break;
            }
            if self.count_below(mid) < k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues, descending, by implicit QL with Wilkinson shifts.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.diag.len();
        let mut d = self.diag.clone();
        let mut e = self.offdiag.clone();
        e.push(0.0);
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    // Deflation stalls only on pathological input; accept the current estimate.
                    break;
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut i = m;
                let mut underflow = false;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if underflow {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(|a, b| b.total_cmp(a));
        d
    }
}

/// λ₁, the largest eigenvalue of `s`.
pub fn largest_eigenvalue(s: &SymmetricMatrix) -> Result<f64> {
    s.check_finite()?;
    if s.order() == 1 {
        return Ok(s.inner[(0, 0)]);
    }
    Ok(tridiagonalize(s).largest_eigenvalue())
}

/// Full spectrum in descending order.
pub fn all_eigenvalues(s: &SymmetricMatrix) -> Result<Vec<f64>> {
    s.check_finite()?;
    Ok(tridiagonalize(s).eigenvalues())
}
