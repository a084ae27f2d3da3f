//! Hastings–McLeod solution of Painlevé II, q'' = s·q + 2q³, q ~ Ai(s) as s → +∞.
//!
//! Integrated right to left from an Airy boundary condition. The quadratures
//! needed by the Tracy-Widom distribution functions ride along as extra state
//! components:
//!
//! - `u(s) = ∫ₛ^∞ q(x)² dx`
//! - `v(s) = ∫ₛ^∞ (x − s)·q(x)² dx`  (so `F₂ = exp(−v)`)
//! - `w(s) = ∫ₛ^∞ q(x) dx`           (so `E = exp(−w/2)`)

use super::airy::{airy_ai, airy_sq_tail_integral, airy_tail_integral, airy_weighted_sq_tail_integral};
use super::ode::{DormandPrince, OdeFailure};
use crate::error::{EbrError, Result};

/// Local error tolerance of the integrator. Stricter than strictly needed so
/// that the backward-unstable direction still carries ~1e-7 accuracy at s = −10.
pub(crate) const ODE_TOLERANCE: f64 = 1e-13;

const Q: usize = 0;
const QP: usize = 1;
const U: usize = 2;
const V: usize = 3;
const W: usize = 4;

/// Full integration state at one abscissa.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PainleveState {
    pub s: f64,
    pub q: f64,
    pub q_prime: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

/// Hastings–McLeod solution sampled on a descending grid.
#[derive(Debug, Clone)]
pub struct PainleveSolution {
    pub s_grid: Vec<f64>,
    pub q_values: Vec<f64>,
    pub q_prime_values: Vec<f64>,
}

/// Coefficients `c_k` of q(s) ≈ √(−s/2)·(1 + Σ c_k s^(−3k)) as s → −∞.
const LEFT_ASYMPTOTIC: [f64; 9] = [
    1.0 / 8.0,
    -73.0 / 128.0,
    10657.0 / 1024.0,
    -13912277.0 / 32768.0,
    8045883943.0 / 262144.0,
    -14518451390349.0 / 4194304.0,
    18847128706420641.0 / 33554432.0,
    -266287398541797779277.0 / 2147483648.0,
    614077537500104697967243.0 / 17179869184.0,
];

/// Left-tail asymptotic expansion of the Hastings–McLeod solution. Returns `(q, q')`.
///
/// A fixed number of terms keeps the expansion smooth in s; eight terms is the
/// optimal truncation at the splice point and only improves further left.
pub(crate) fn left_asymptotic(s: f64) -> (f64, f64) {
    debug_assert!(s < 0.0);
    let x3 = s * s * s;
    // y = 1 + Σ c_k s^(−3k);  y' = Σ −3k c_k s^(−3k−1)
    let (mut y, mut dy) = (1.0, 0.0);
    let mut pow = 1.0;
    for (k, c) in LEFT_ASYMPTOTIC.iter().take(8).enumerate() {
        pow /= x3;
        let term = c * pow;
        y += term;
        dy += -3.0 * (k as f64 + 1.0) * term / s;
    }
    let root = (-s / 2.0).sqrt();
    // d/ds √(−s/2) = √(−s/2) / (2s)
    (root * y, root * (y / (2.0 * s) + dy))
}

fn rhs(s: f64, y: &[f64; 5]) -> [f64; 5] {
    let q = y[Q];
    [y[QP], s * q + 2.0 * q * q * q, -q * q, -y[U], -q]
}

/// Descending grid `s_max, s_max − step, …` ending exactly at `s_min`.
pub(crate) fn descending_grid(s_min: f64, s_max: f64, step: f64) -> Vec<f64> {
    let intervals = ((s_max - s_min) / step).round() as usize;
    (0..=intervals)
        .map(|i| if i == intervals { s_min } else { s_max - i as f64 * step })
        .collect()
}

/// Below this abscissa q is taken from [`left_asymptotic`] instead of the ODE.
///
/// Backward integration from the Airy boundary is unstable on the
/// √(−s/2) branch: perturbations grow like exp(⅔√2·|s|^{3/2}). At s = −6
/// the integrated solution and the optimally truncated expansion agree to
/// ~1e-7; a few units further left the integrated solution leaves the branch.
pub(crate) const SPLICE_AT: f64 = -6.0;

/// Integrates from `s_max` down to `s_min`, recording the state at every grid point.
pub(crate) fn integrate(s_min: f64, s_max: f64, step: f64) -> Result<Vec<PainleveState>> {
    integrate_with_splice(s_min, s_max, step, Some(SPLICE_AT))
}

pub(crate) fn integrate_with_splice(
    s_min: f64,
    s_max: f64,
    step: f64,
    splice_at: Option<f64>,
) -> Result<Vec<PainleveState>> {
    if !(s_min < s_max) || !(step > 0.0) || !s_min.is_finite() || !s_max.is_finite() {
        return Err(EbrError::Domain(format!(
            "Painlevé grid needs s_min < s_max and step > 0 (got {s_min}, {s_max}, {step})"
        )));
    }
    if s_max < 7.0 {
        return Err(EbrError::Domain(format!(
            "Airy boundary at s = {s_max} is outside the asymptotic regime (need s_max ≥ 7)"
        )));
    }
    let (ai, aip) = airy_ai(s_max);
    let mut y = [
        ai,
        aip,
        airy_sq_tail_integral(s_max),
        airy_weighted_sq_tail_integral(s_max),
        airy_tail_integral(s_max),
    ];
    let grid = descending_grid(s_min, s_max, step);
    let mut out = Vec::with_capacity(grid.len());
    let record = |s: f64, y: &[f64; 5]| PainleveState { s, q: y[Q], q_prime: y[QP], u: y[U], v: y[V], w: y[W] };
    out.push(record(grid[0], &y));
    let splice = splice_at.unwrap_or(f64::NEG_INFINITY);

    let mut solver = DormandPrince::new(rhs, ODE_TOLERANCE, step);
    let mut idx = 1;
    while idx < grid.len() && grid[idx - 1] > splice {
        let (from, to) = (grid[idx - 1], grid[idx]);
        solver.advance(from, to, &mut y).map_err(|f| match f {
            OdeFailure::StepUnderflow { t } => EbrError::Integration { abscissa: t, reason: "step size underflow".into() },
            OdeFailure::NonFinite { t } => EbrError::Integration { abscissa: t, reason: "non-finite state".into() },
        })?;
        // q stays positive and near √(−s/2) on the Hastings–McLeod branch;
        // leaving that corridor means the unstable direction took over.
        let envelope = 2.0 * (-to / 2.0).max(0.0).sqrt() + 1.0;
        if !(y[Q] > 0.0) || y[Q] > envelope {
            return Err(EbrError::Integration {
                abscissa: to,
                reason: format!("solution left the Hastings–McLeod branch (q = {})", y[Q]),
            });
        }
        out.push(record(to, &y));
        idx += 1;
    }

    // Left segment: only the quadratures are integrated, q comes from the expansion.
    let quad_rhs = |s: f64, z: &[f64; 3]| {
        let q = left_asymptotic(s).0;
        [-q * q, -z[0], -q]
    };
    let mut quad = DormandPrince::new(quad_rhs, ODE_TOLERANCE, step);
    let mut z = [y[U], y[V], y[W]];
    while idx < grid.len() {
        let (from, to) = (grid[idx - 1], grid[idx]);
        quad.advance(from, to, &mut z).map_err(|_| EbrError::Integration {
            abscissa: from,
            reason: "quadrature failed on the asymptotic segment".into(),
        })?;
        let (q, dq) = left_asymptotic(to);
        out.push(PainleveState { s: to, q, q_prime: dq, u: z[0], v: z[1], w: z[2] });
        idx += 1;
    }
    Ok(out)
}

/// Samples the Hastings–McLeod solution on `s_max, s_max − step, …, s_min`.
pub fn hastings_mcleod(s_min: f64, s_max: f64, step: f64) -> Result<PainleveSolution> {
    let states = integrate(s_min, s_max, step)?;
    Ok(PainleveSolution {
        s_grid: states.iter().map(|p| p.s).collect(),
        q_values: states.iter().map(|p| p.q).collect(),
        q_prime_values: states.iter().map(|p| p.q_prime).collect(),
    })
}
