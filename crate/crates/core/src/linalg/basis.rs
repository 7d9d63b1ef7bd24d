use super::kernels::{axpy, dot, norm};
use super::DenseMatrix;
use crate::error::{check_dim, Result};

/// Residuals with `‖s'‖ <= RANK_TOLERANCE * max(1, ‖s‖)` count as zero.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// A growing list of pairwise orthogonal unit rows in `ℝⁿ` (the matrix `V`).
///
/// The complement projector `I - VᵀV` is never materialized; projections
/// apply the rows one coefficient at a time, `O(ℓn)` per vector.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    dim: usize,
    data: Vec<f64>,
}

impl OrthonormalBasis {
    pub fn new(dim: usize) -> Self {
        OrthonormalBasis { dim, data: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.len() >= self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// Row-major `ℓ × n` storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_matrix(&self) -> Option<DenseMatrix> {
        (!self.is_empty()).then(|| DenseMatrix::from_raw(self.len(), self.dim, self.data.clone()))
    }

    /// `y <- y (I - VᵀV)`.
    pub fn project_in_place(&self, y: &mut [f64]) {
        debug_assert_eq!(y.len(), self.dim);
        let coefs: Vec<f64> = self.row_iter().map(|v| dot(v, y)).collect();
        for (v, c) in self.row_iter().zip(coefs) {
            axpy(-c, v, y);
        }
    }

    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, y.len())?;
        let mut out = y.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    /// Gram–Schmidt insertion of `s`. Returns whether a row was appended.
    ///
    /// The normalized residual is projected a second time before it is
    /// stored; a single classical pass drifts after hundreds of insertions.
    pub fn orthogonalize(&mut self, s: &[f64]) -> Result<bool> {
        check_dim(self.dim, s.len())?;
        if self.is_full() {
            return Ok(false);
        }
        let mut r = s.to_vec();
        self.project_in_place(&mut r);
        let rn = norm(&r);
        if rn <= RANK_TOLERANCE * norm(s).max(1.0) {
            return Ok(false);
        }
        r.iter_mut().for_each(|v| *v /= rn);
        self.project_in_place(&mut r);
        let rn = norm(&r);
        r.iter_mut().for_each(|v| *v /= rn);
        self.data.extend_from_slice(&r);
        Ok(true)
    }

    /// Largest of `|‖v_i‖ - 1|` and `|⟨v_i, v_j⟩|` over the rows.
    pub fn orthonormality_error(&self) -> f64 {
        let rows: Vec<&[f64]> = self.row_iter().collect();
        let mut worst = 0.0f64;
        for (i, a) in rows.iter().enumerate() {
            worst = worst.max((norm(a) - 1.0).abs());
            for b in &rows[i + 1..] {
                worst = worst.max(dot(a, b).abs());
            }
        }
        worst
    }
}

/// Functional form of [`OrthonormalBasis::orthogonalize`].
pub fn orthogonalize(s: &[f64], basis: &OrthonormalBasis) -> Result<OrthonormalBasis> {
    let mut out = basis.clone();
    out.orthogonalize(s)?;
    Ok(out)
}

/// `y - Σ ⟨y, v_i⟩ v_i`.
pub fn project_complement(basis: &OrthonormalBasis, y: &[f64]) -> Result<Vec<f64>> {
    basis.project(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sample_gaussian, RandomSource};
    use proptest::prelude::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn orthogonalize_examples() {
        let v = orthogonalize(&e(3, 0), &OrthonormalBasis::new(3)).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.row(0), e(3, 0).as_slice());

        let v2 = orthogonalize(&[1.0, 1.0, 0.0], &v).unwrap();
        assert_eq!(v2.len(), 2);
        assert_eq!(v2.row(1), e(3, 1).as_slice());

        let v3 = orthogonalize(&e(3, 0), &v).unwrap();
        assert_eq!(v3, v);
    }

    #[test]
    fn orthogonalize_rejects_wrong_dimension() {
        let mut v = OrthonormalBasis::new(3);
        assert!(v.orthogonalize(&[1.0, 2.0]).is_err());
        assert!(v.project(&[1.0]).is_err());
    }

    #[test]
    fn basis_never_exceeds_dimension() {
        let mut rng = RandomSource::new(3);
        let mut v = OrthonormalBasis::new(4);
        for _ in 0..10 {
            v.orthogonalize(&sample_gaussian(4, &mut rng)).unwrap();
        }
        assert_eq!(v.len(), 4);
        assert!(v.orthonormality_error() < 1e-12);
    }

    #[test]
    fn project_complement_examples() {
        let empty = OrthonormalBasis::new(2);
        assert_eq!(project_complement(&empty, &[3.0, -1.5]).unwrap(), vec![3.0, -1.5]);

        let mut v = OrthonormalBasis::new(2);
        v.orthogonalize(&[1.0, 0.0]).unwrap();
        assert_eq!(project_complement(&v, &[3.0, 4.0]).unwrap(), vec![0.0, 4.0]);

        let mut v = OrthonormalBasis::new(2);
        v.orthogonalize(&[1.0, 1.0]).unwrap();
        let p = project_complement(&v, &[1.0, 0.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn tiny_residual_is_treated_as_zero() {
        let mut v = OrthonormalBasis::new(2);
        v.orthogonalize(&[1.0, 0.0]).unwrap();
        assert!(!v.orthogonalize(&[1.0, 1e-12]).unwrap());
        assert!(v.orthogonalize(&[1.0, 1e-6]).unwrap());
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_and_orthogonal(seed in any::<u64>(), n in 2usize..24, l in 0usize..24) {
            let mut rng = RandomSource::new(seed);
            let mut v = OrthonormalBasis::new(n);
            for _ in 0..l.min(n) {
                v.orthogonalize(&sample_gaussian(n, &mut rng)).unwrap();
            }
            let y = sample_gaussian(n, &mut rng);
            let yn = norm(&y);
            let once = v.project(&y).unwrap();
            let twice = v.project(&once).unwrap();
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() <= 1e-10 * yn);
            }
            for row in v.row_iter() {
                prop_assert!(dot(row, &once).abs() <= 1e-8 * yn);
            }
        }
    }
}
