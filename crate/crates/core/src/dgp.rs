//! Data-generating processes for the Monte Carlo study.
//!
//! All generators fill matrices unit by unit (row-major) from the supplied
//! stream, so a matrix is a pure function of `(spec, n, m, stream)`.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ebr::ResidualMatrix;
use crate::error::{EbrError, Result};

/// Share of units transformed by the non-monotonic process.
pub const NONMONO_AFFECTED_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DgpSpec {
    /// Independent standard-normal residuals.
    Iid,
    /// `x_t = φ·x_{t−1} + (1 − φ)·ε_t` per unit, `x_1 = ε_1`.
    Ar1 { phi: f64 },
    /// Equicorrelated units: unit variance, correlation ρ between any two units.
    LinearCsd { rho: f64 },
    /// `x_t = sin(x_{t−1}) + cos(x_{t−1}²) + 0.5·ε_i` on the first ⌈n/2⌉ units.
    Nonmono,
}

impl DgpSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DgpSpec::Ar1 { phi } if !(0.0..1.0).contains(&phi) => {
                Err(EbrError::Config(format!("phi must lie in [0, 1), got {phi}")))
            }
            DgpSpec::LinearCsd { rho } if !(0.0..1.0).contains(&rho) => {
                Err(EbrError::Config(format!("rho must lie in [0, 1), got {rho}")))
            }
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DgpSpec::Iid => "iid",
            DgpSpec::Ar1 { .. } => "ar1",
            DgpSpec::LinearCsd { .. } => "linear_csd",
            DgpSpec::Nonmono => "nonmono",
        }
    }

    /// The process parameter (φ or ρ), if the kind has one.
    pub fn parameter(&self) -> Option<f64> {
        match *self {
            DgpSpec::Ar1 { phi } => Some(phi),
            DgpSpec::LinearCsd { rho } => Some(rho),
            _ => None,
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, n: usize, m: usize, rng: &mut R) -> Result<ResidualMatrix> {
        self.validate()?;
        match *self {
            DgpSpec::Iid => gen_iid(n, m, rng),
            DgpSpec::Ar1 { phi } => gen_ar1(n, m, phi, rng),
            DgpSpec::LinearCsd { rho } => gen_linear_csd(n, m, rho, rng),
            DgpSpec::Nonmono => gen_nonmono(n, m, rng),
        }
    }
}

impl fmt::Display for DgpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DgpSpec::Iid => write!(f, "iid"),
            DgpSpec::Ar1 { phi } => write!(f, "ar1(phi={phi})"),
            DgpSpec::LinearCsd { rho } => write!(f, "linear_csd(rho={rho})"),
            DgpSpec::Nonmono => write!(f, "nonmono"),
        }
    }
}

fn check_shape(n: usize, m: usize) -> Result<()> {
    if n < 2 || m < 2 {
        return Err(EbrError::Config(format!("panel needs n, m ≥ 2, got {n}×{m}")));
    }
    Ok(())
}

fn normal_matrix<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, m);
    for i in 0..n {
        for t in 0..m {
            x[(i, t)] = rng.sample(StandardNormal);
        }
    }
    x
}

pub fn gen_iid<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<ResidualMatrix> {
    check_shape(n, m)?;
    ResidualMatrix::new(normal_matrix(n, m, rng))
}

/// AR(1) with the `(1 − φ)` innovation weight and `x_1 = ε_1`; no
/// stationary-variance rescaling.
pub fn gen_ar1<R: Rng + ?Sized>(n: usize, m: usize, phi: f64, rng: &mut R) -> Result<ResidualMatrix> {
    check_shape(n, m)?;
    DgpSpec::Ar1 { phi }.validate()?;
    let eps = normal_matrix(n, m, rng);
    ResidualMatrix::new(ar1_filter(&eps, phi))
}

pub(crate) fn ar1_filter(eps: &DMatrix<f64>, phi: f64) -> DMatrix<f64> {
    let mut x = eps.clone();
    for i in 0..x.nrows() {
        for t in 1..x.ncols() {
            x[(i, t)] = phi * x[(i, t - 1)] + (1.0 - phi) * eps[(i, t)];
        }
    }
    x
}

/// Per period: `√ρ·g_t·𝟙 + √(1 − ρ)·e_t`, drawing `g_t` then the n unit shocks.
/// The population covariance is exactly unit diagonal, ρ off-diagonal.
pub fn gen_linear_csd<R: Rng + ?Sized>(n: usize, m: usize, rho: f64, rng: &mut R) -> Result<ResidualMatrix> {
    check_shape(n, m)?;
    DgpSpec::LinearCsd { rho }.validate()?;
    let (load, idio) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut x = DMatrix::zeros(n, m);
    for t in 0..m {
        let g: f64 = rng.sample(StandardNormal);
        for i in 0..n {
            let e: f64 = rng.sample(StandardNormal);
            x[(i, t)] = load * g + idio * e;
        }
    }
    ResidualMatrix::new(x)
}

/// Number of units rewritten by [`gen_nonmono`].
pub fn nonmono_affected_units(n: usize) -> usize {
    (n as f64 * NONMONO_AFFECTED_FRACTION).ceil() as usize
}

/// Starts from [`gen_iid`]; then for each of the first ⌈n/2⌉ units draws one
/// ε_i and overwrites periods 2..m with
/// `x_t = sin(x_{t−1}) + cos(x_{t−1}²) + 0.5·ε_i`, iterating on updated values.
pub fn gen_nonmono<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<ResidualMatrix> {
    check_shape(n, m)?;
    let mut x = normal_matrix(n, m, rng);
    for i in 0..nonmono_affected_units(n) {
        let eps: f64 = rng.sample(StandardNormal);
        for t in 1..m {
            x[(i, t)] = nonmono_step(x[(i, t - 1)], eps);
        }
    }
    ResidualMatrix::new(x)
}

fn nonmono_step(prev: f64, eps: f64) -> f64 {
    prev.sin() + (prev * prev).cos() + 0.5 * eps
}
