//! Structural decomposition of matrices with low hereditary discrepancy.
//!
//! [`project_to_small_rows`] grows an orthonormal basis `V` of at most `n/4`
//! rows such that every row of `A(I - VᵀV)` is short: the residual row norms
//! are bounded by `48e·lg(8m/n)·herdisc(A)`. [`herdisc_lower_bound`] is the
//! matching spectral lower bound on `herdisc(A)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{gram, project_rows_complement, row_norms, sym_eig_desc, DenseMatrix, OrthonormalBasis};

/// Eigenvectors with eigenvalue below this fraction of the top one add no
/// shrinking and are skipped.
const EIGEN_FLOOR: f64 = 1e-12;

/// The basis `V` together with the residual row norms `‖a_i(I - VᵀV)‖`.
#[derive(Clone, Debug)]
pub struct SpectralCertificate {
    pub basis: OrthonormalBasis,
    /// Largest residual row norm.
    pub eta: f64,
    pub residual_row_norms: Vec<f64>,
}

/// Number of halving iterations, eigenvectors per iteration and the two
/// insertion caps used by [`project_to_small_rows`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProjectionSchedule {
    pub iterations: usize,
    pub eigen_per_iteration: usize,
    pub eigen_cap: usize,
    pub large_rows: usize,
    pub basis_cap: usize,
}

impl ProjectionSchedule {
    pub fn new(m: usize, n: usize) -> Self {
        let lg = (8.0 * m as f64 / n as f64).log2();
        let basis_cap = n / 4;
        ProjectionSchedule {
            iterations: lg.ceil() as usize,
            eigen_per_iteration: ((n as f64 / (8.0 * lg)).floor() as usize).max(1),
            eigen_cap: (n / 8).max(1).min(basis_cap),
            large_rows: n / 8,
            basis_cap,
        }
    }

    /// Rows kept in the `i`-th iteration (1-based): the `m / 2^(i-1)` longest.
    pub fn rows_kept(m: usize, i: usize) -> usize {
        let shift = (i - 1).min(usize::BITS as usize - 1);
        (m >> shift).max(1)
    }
}

/// Computes the spectral certificate of `a`, which must have `m >= n`.
pub fn project_to_small_rows(a: &DenseMatrix) -> Result<SpectralCertificate> {
    project_to_small_rows_traced(a, |_| {})
}

/// Same as [`project_to_small_rows`], calling `on_insert` after every row
/// added to the basis.
pub fn project_to_small_rows_traced(
    a: &DenseMatrix,
    mut on_insert: impl FnMut(&OrthonormalBasis),
) -> Result<SpectralCertificate> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::ContractViolation(format!(
            "projection needs m >= n, got {m}x{n}; reduce the matrix first"
        )));
    }
    let plan = ProjectionSchedule::new(m, n);
    let mut basis = OrthonormalBasis::new(n);
    let mut eigen_inserted = 0;

    for i in 1..=plan.iterations {
        if eigen_inserted >= plan.eigen_cap {
            break;
        }
        let b = project_rows_complement(a, &basis)?;
        let keep = longest_rows(&row_norms(&b), ProjectionSchedule::rows_kept(m, i));
        let eig = sym_eig_desc(&gram(&b.select_rows(&keep)?))?;
        let top = eig.values[0];
        if top <= 0.0 {
            break;
        }
        for k in 0..plan.eigen_per_iteration.min(n) {
            if eigen_inserted >= plan.eigen_cap || eig.values[k] < EIGEN_FLOOR * top {
                break;
            }
            if basis.orthogonalize(eig.vector(k))? {
                eigen_inserted += 1;
                on_insert(&basis);
            }
        }
    }

    let b = project_rows_complement(a, &basis)?;
    let norms = row_norms(&b);
    for j in longest_rows(&norms, plan.large_rows) {
        if basis.len() >= plan.basis_cap {
            break;
        }
        if basis.orthogonalize(b.row(j))? {
            on_insert(&basis);
        }
    }

    let residual_row_norms = row_norms(&project_rows_complement(a, &basis)?);
    let eta = residual_row_norms.iter().copied().fold(0.0, f64::max);
    Ok(SpectralCertificate { basis, eta, residual_row_norms })
}

/// Indices of the `count` longest rows, ties broken by ascending index.
fn longest_rows(norms: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..norms.len()).collect();
    idx.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    idx.truncate(count.min(norms.len()));
    idx
}

/// Spectral lower bound on hereditary discrepancy.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub value: f64,
    /// 1-based `k` attaining the maximum.
    pub argmax_k: usize,
    /// Eigenvalues of `AᵀA`, non-increasing and clamped at zero.
    pub eigenvalues: Vec<f64>,
}

/// `max over k <= min(m, n)` of `k/(2e) · sqrt(λ_k / (mn))`, with `λ_k` the
/// eigenvalues of `AᵀA`.
pub fn herdisc_lower_bound(a: &DenseMatrix) -> Result<LowerBoundReport> {
    let (m, n) = (a.rows(), a.cols());
    let eig = sym_eig_desc(&gram(a))?;
    let mn = (m * n) as f64;
    let mut value = 0.0;
    let mut argmax_k = 1;
    for (k0, &lambda) in eig.values.iter().take(m.min(n)).enumerate() {
        let k = k0 + 1;
        let bound = k as f64 / (2.0 * std::f64::consts::E) * (lambda.max(0.0) / mn).sqrt();
        if bound > value {
            value = bound;
            argmax_k = k;
        }
    }
    Ok(LowerBoundReport { value, argmax_k, eigenvalues: eig.values })
}
