//! Lower-triangle summaries of unit-by-unit Pearson, Kendall τ_b and
//! Spearman correlation matrices.

use serde::{Deserialize, Serialize};

use crate::dgp::DgpSpec;
use crate::ebr::ResidualMatrix;
use crate::error::{EbrError, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub pearson_mean: f64,
    pub pearson_sd: f64,
    pub kendall_mean: f64,
    pub kendall_sd: f64,
    pub spearman_mean: f64,
    pub spearman_sd: f64,
    /// Unit pairs that entered the pooled statistics.
    pub pairs_used: u64,
    /// Unit pairs skipped because a series was constant.
    pub pairs_excluded: u64,
}

/// Pearson correlation; `None` if either series has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Kendall's τ_b with tie correction; `None` if either series is constant.
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    let (mut concordant, mut discordant, mut ties_a, mut ties_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let da = a[i].partial_cmp(&a[j])? as i64;
            let db = b[i].partial_cmp(&b[j])? as i64;
            if da == 0 {
                ties_a += 1;
            }
            if db == 0 {
                ties_b += 1;
            }
            match da * db {
                1 => concordant += 1,
                -1 => discordant += 1,
                _ => {}
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = (((n0 - ties_a) * (n0 - ties_b)) as f64).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some((concordant - discordant) as f64 / denom)
}

/// Ranks 1..n with ties sharing their average rank.
pub(crate) fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(&average_ranks(a), &average_ranks(b))
}

#[derive(Default)]
struct Pool {
    values: Vec<f64>,
}

impl Pool {
    fn mean_sd(&self) -> (f64, f64) {
        let n = self.values.len();
        if n == 0 {
            return (f64::NAN, f64::NAN);
        }
        let mean = self.values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return (mean, 0.0);
        }
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, var.sqrt())
    }
}

/// Pools the lower triangles of the three correlation matrices over `panels`.
pub fn summarize_panels(panels: &[ResidualMatrix]) -> Result<CorrelationSummary> {
    let (mut p, mut k, mut s) = (Pool::default(), Pool::default(), Pool::default());
    let (mut used, mut excluded) = (0u64, 0u64);
    for panel in panels {
        let n = panel.n_units();
        if n < 3 {
            return Err(EbrError::Config(format!("correlation summary needs n ≥ 3 units, got {n}")));
        }
        let rows: Vec<Vec<f64>> = (0..n).map(|i| panel.values().row(i).iter().copied().collect()).collect();
        let ranks: Vec<Vec<f64>> = rows.iter().map(|r| average_ranks(r)).collect();
        for i in 1..n {
            for j in 0..i {
                match (pearson(&rows[i], &rows[j]), kendall_tau_b(&rows[i], &rows[j]), pearson(&ranks[i], &ranks[j])) {
                    (Some(a), Some(b), Some(c)) => {
                        p.values.push(a);
                        k.values.push(b);
                        s.values.push(c);
                        used += 1;
                    }
                    _ => excluded += 1,
                }
            }
        }
    }
    let ((pm, psd), (km, ksd), (sm, ssd)) = (p.mean_sd(), k.mean_sd(), s.mean_sd());
    Ok(CorrelationSummary {
        pearson_mean: pm,
        pearson_sd: psd,
        kendall_mean: km,
        kendall_sd: ksd,
        spearman_mean: sm,
        spearman_sd: ssd,
        pairs_used: used,
        pairs_excluded: excluded,
    })
}

/// Correlation diagnostics for `reps` panels drawn from `spec`; panel r uses
/// `stream(master_seed, "<spec>/n=<n>/m=<m>/correlation", r)`.
pub fn correlation_summary(spec: &DgpSpec, n: usize, m: usize, reps: u64, master_seed: u64) -> Result<CorrelationSummary> {
    if n < 3 {
        return Err(EbrError::Config(format!("correlation summary needs n ≥ 3 units, got {n}")));
    }
    let domain = format!("{spec}/n={n}/m={m}/correlation");
    let panels = (0..reps)
        .map(|r| spec.generate(n, m, &mut rng::stream(master_seed, &domain, r)))
        .collect::<Result<Vec<_>>>()?;
    summarize_panels(&panels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn textbook_values() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 1.0, 4.0, 3.0, 5.0];
        // 8 concordant, 2 discordant of 10 pairs.
        assert!((kendall_tau_b(&a, &b).unwrap() - 0.6).abs() < 1e-15);
        // Σd² = 4 → 1 − 6·4/(5·24) = 0.8
        assert!((spearman(&a, &b).unwrap() - 0.8).abs() < 1e-12);
        assert!((pearson(&a, &b).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn kendall_with_ties() {
        let a = [1.0, 1.0, 2.0, 3.0];
        let b = [1.0, 2.0, 2.0, 3.0];
        // C = 4, D = 0, ties_a = 1, ties_b = 1, n0 = 6 → 4/5
        assert!((kendall_tau_b(&a, &b).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn constant_series_is_undefined() {
        let c = [2.0; 4];
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!(pearson(&c, &x).is_none());
        assert!(kendall_tau_b(&c, &x).is_none());
        assert!(spearman(&c, &x).is_none());
    }

    #[test]
    fn duplicated_units() {
        let row = [0.3, -1.2, 2.2, 0.1, 0.9];
        let panel = ResidualMatrix::new(DMatrix::from_fn(4, 5, |_, t| row[t])).unwrap();
        let s = summarize_panels(&[panel]).unwrap();
        assert_eq!(s.pairs_used, 6);
        assert!((s.pearson_mean - 1.0).abs() < 1e-12 && s.pearson_sd < 1e-12);
        assert_eq!((s.kendall_mean, s.kendall_sd), (1.0, 0.0));
    }

    #[test]
    fn constant_unit_excluded_and_counted() {
        let panel = ResidualMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![5.0, 5.0, 5.0],
            vec![3.0, 1.0, 2.0],
        ])
        .unwrap();
        let s = summarize_panels(&[panel]).unwrap();
        assert_eq!((s.pairs_used, s.pairs_excluded), (1, 2));
    }

    #[test]
    fn needs_three_units() {
        assert!(correlation_summary(&DgpSpec::Iid, 2, 10, 1, 0).is_err());
    }

    #[test]
    fn iid_null_concentration() {
        let s = correlation_summary(&DgpSpec::Iid, 50, 50, 100, 3).unwrap();
        assert!(s.pearson_mean.abs() <= 0.02, "{s:?}");
        for v in [s.pearson_mean, s.kendall_mean, s.spearman_mean] {
            assert!((-1.0..=1.0).contains(&v));
        }
        assert!(s.pearson_sd >= 0.0 && s.kendall_sd >= 0.0 && s.spearman_sd >= 0.0);
    }
}
