//! The coloring engine: the capped-step partial coloring walk, the rounds
//! driver that turns partial colorings into a full one, and the reduction for
//! matrices with fewer rows than columns.

mod driver;
mod walk;
mod wide;

pub use driver::{hereditary_minimize, ReductionRecord, RoundRecord, RunReport, RETRY_LIMIT};
pub use walk::{
    partial_coloring, partial_coloring_observed, partial_coloring_with, FailureKind, PartialOutcome,
    PartialRun, PartialSuccess, WalkView, FREEZE_TOLERANCE,
};
pub use wide::{reduce_wide, WideReduction};

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::DenseMatrix;

/// Coordinate magnitudes at or below this count as zero when capping steps.
pub const STEP_EPSILON: f64 = 1e-12;

/// A vector in `{-1, +1}ⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Coloring(Vec<i8>);

impl Coloring {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::ContractViolation("empty coloring".into()));
        }
        if let Some(pos) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::ContractViolation(format!(
                "coloring entry {pos} is {}, expected -1 or 1",
                signs[pos]
            )));
        }
        Ok(Coloring(signs))
    }

    /// Every entry of `x` must be exactly `-1.0` or `1.0`.
    pub fn from_f64(x: &[f64]) -> Result<Self> {
        let signs = x
            .iter()
            .enumerate()
            .map(|(i, &v)| match v {
                1.0 => Ok(1),
                -1.0 => Ok(-1),
                v => Err(Error::ContractViolation(format!("entry {i} is {v}, not a sign"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(signs)
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| f64::from(s)).collect()
    }

    pub fn disc(&self, a: &DenseMatrix) -> Result<f64> {
        disc_inf(a, &self.to_f64())
    }
}

/// `‖Ax‖∞`.
pub fn disc_inf(a: &DenseMatrix, x: &[f64]) -> Result<f64> {
    check_dim(a.cols(), x.len())?;
    Ok(a.mul_vec(x)?.iter().fold(0.0, |acc, v| acc.max(v.abs())))
}

/// Step scale `ε`, iteration budget `Q` and row threshold `τ` of the walk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PartialParams {
    pub eps: f64,
    pub steps: usize,
    pub tau: f64,
    pub eta: f64,
}

impl PartialParams {
    pub fn new(m: usize, n: usize, eta: f64) -> Self {
        let (mf, nf) = (m as f64, n as f64);
        let inv_eps_sq = (4.0 * (mf * nf).ln() + 20.0).max(256.0 * nf);
        let eps = inv_eps_sq.sqrt().recip();
        let steps = (16.0 * inv_eps_sq + 256.0 * nf).ceil() as usize;
        let tau = 22.0 * eps * eta * (steps as f64 * (256.0 * mf / nf).log2()).sqrt();
        PartialParams { eps, steps, tau, eta }
    }

    /// Per-round additive guarantee on every row, `τ + η`.
    pub fn row_bound(&self) -> f64 {
        self.tau + self.eta
    }
}

pub fn partial_coloring_params(a: &DenseMatrix, eta: f64) -> PartialParams {
    PartialParams::new(a.rows(), a.cols(), eta)
}

/// The largest admissible multiple in [`step_cap`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepCap {
    Bounded(f64),
    Unbounded,
}

impl StepCap {
    pub fn min_with(self, eps: f64) -> f64 {
        match self {
            StepCap::Bounded(mu) => mu.min(eps),
            StepCap::Unbounded => eps,
        }
    }
}

/// Largest `μ` with `max(‖c + μg‖∞, ‖c - μg‖∞) = 1`, ignoring frozen
/// coordinates. Since `max(|c_i + a|, |c_i - a|) = |c_i| + |a|`, this is
/// `min_i (1 - |c_i|) / |g_i|`.
pub fn step_cap(c: &[f64], g: &[f64], frozen: &[bool]) -> Result<StepCap> {
    check_dim(c.len(), g.len())?;
    check_dim(c.len(), frozen.len())?;
    if let Some(i) = c.iter().position(|v| v.abs() > 1.0 + 1e-9) {
        return Err(Error::ContractViolation(format!("coordinate {i} = {} lies outside [-1, 1]", c[i])));
    }
    Ok(cap_unchecked(c, g, frozen))
}

#[inline]
pub(crate) fn cap_unchecked(c: &[f64], g: &[f64], frozen: &[bool]) -> StepCap {
    let mut mu = f64::INFINITY;
    for ((&ci, &gi), &fi) in c.iter().zip(g).zip(frozen) {
        if !fi && gi.abs() > STEP_EPSILON {
            mu = mu.min((1.0 - ci.abs()).max(0.0) / gi.abs());
        }
    }
    if mu.is_finite() {
        StepCap::Bounded(mu)
    } else {
        StepCap::Unbounded
    }
}
