//! Symmetric eigendecomposition: Householder reduction to tridiagonal form
//! followed by the implicit QL iteration (the EISPACK tred2/tql2 pair).
//!
//! The working array holds the transpose of the accumulated transform so
//! that every inner loop walks contiguous memory.

use super::DenseMatrix;
use crate::error::{Error, Result};

const SYMMETRY_TOLERANCE: f64 = 1e-10;
const NEGATIVE_TOLERANCE: f64 = 1e-9;

/// Eigenpairs sorted by non-increasing eigenvalue. Row `k` of `vectors` is
/// the unit eigenvector for `values[k]`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        self.vectors.row(k)
    }
}

/// Eigendecomposition of a symmetric positive semidefinite matrix.
///
/// Eigenvalues that come out slightly negative from rounding are clamped to
/// zero; clearly negative ones are reported as a contract violation.
pub fn sym_eig_desc(m: &DenseMatrix) -> Result<SymEigen> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::ContractViolation(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            n,
            m.cols()
        )));
    }
    let scale = m.max_abs().max(1.0);
    let a = m.as_slice();
    let mut u = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (a[i * n + j], a[j * n + i]);
            if (x - y).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::ContractViolation(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
            u[i * n + j] = 0.5 * (x + y);
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut u, &mut d, &mut e);
    ql_implicit(n, &mut u, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]).then(i.cmp(&j)));
    let top = order.first().map_or(0.0, |&k| d[k].abs());
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &order {
        let mut lambda = d[k];
        if lambda < 0.0 {
            if lambda < -NEGATIVE_TOLERANCE * (1.0 + top) {
                return Err(Error::ContractViolation(format!(
                    "matrix is not positive semidefinite (eigenvalue {lambda})"
                )));
            }
            lambda = 0.0;
        }
        values.push(lambda);
        vectors.extend_from_slice(&u[k * n..(k + 1) * n]);
    }
    Ok(SymEigen { values, vectors: DenseMatrix::from_raw(n, n, vectors) })
}

/// `v(r, c)` of the textbook formulation lives at `u[c * n + r]`.
fn tridiagonalize(n: usize, u: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |r: usize, c: usize| c * n + r;
    for j in 0..n {
        d[j] = u[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = u[at(i - 1, j)];
                u[at(i, j)] = 0.0;
                u[at(j, i)] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);

            for j in 0..i {
                f = d[j];
                u[at(j, i)] = f;
                g = e[j] + u[at(j, j)] * f;
                let col = &u[j * n..j * n + i];
                for k in (j + 1)..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let (f, g) = (d[j], e[j]);
                let col = &mut u[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = u[at(i - 1, j)];
                u[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate the transformations.
    for i in 0..n.saturating_sub(1) {
        u[at(n - 1, i)] = u[at(i, i)];
        u[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = u[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let (next, col) = split_two(u, n, i + 1, j);
                let g: f64 = next[..=i].iter().zip(&col[..=i]).map(|(a, b)| a * b).sum();
                for k in 0..=i {
                    col[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            u[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = u[at(n - 1, j)];
        u[at(n - 1, j)] = 0.0;
    }
    if n > 0 {
        u[at(n - 1, n - 1)] = 1.0;
        e[0] = 0.0;
    }
}

/// Immutable stored-row `a` and mutable stored-row `b` of the `n × n` buffer.
fn split_two(u: &mut [f64], n: usize, a: usize, b: usize) -> (&[f64], &mut [f64]) {
    debug_assert_ne!(a, b);
    if a < b {
        let (lo, hi) = u.split_at_mut(b * n);
        (&lo[a * n..(a + 1) * n], &mut hi[..n])
    } else {
        let (lo, hi) = u.split_at_mut(a * n);
        (&hi[..n], &mut lo[b * n..(b + 1) * n])
    }
}

fn ql_implicit(n: usize, u: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > 100 {
                    return Err(Error::Stall("QL iteration did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = u.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, gram, sample_gaussian, RandomSource};

    fn residual_ok(m: &DenseMatrix, eig: &SymEigen) -> bool {
        let n = m.rows();
        let top = eig.values[0];
        for k in 0..n {
            let v = eig.vector(k);
            let mv = m.mul_vec(v).unwrap();
            let err = mv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - eig.values[k] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if err > 1e-6 * (1.0 + top) {
                return false;
            }
        }
        true
    }

    #[test]
    fn identity_and_diagonal() {
        let eig = sym_eig_desc(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0, 1.0]);

        let m = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 4.0]]).unwrap();
        let eig = sym_eig_desc(&m).unwrap();
        assert_eq!(eig.values, vec![4.0, 1.0]);
        assert!((eig.vector(0)[1].abs() - 1.0).abs() < 1e-15);
        assert!((eig.vector(1)[0].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_hand_computed() {
        // characteristic polynomial (2-λ)² - 1 = 0 → λ ∈ {3, 1}
        let m = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let eig = sym_eig_desc(&m).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((dot(eig.vector(0), &[h, h]).abs() - 1.0).abs() < 1e-14);
        assert!((dot(eig.vector(1), &[h, -h]).abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn one_by_one() {
        let eig = sym_eig_desc(&DenseMatrix::from_rows(&[[5.0]]).unwrap()).unwrap();
        assert_eq!(eig.values, vec![5.0]);
        assert_eq!(eig.vector(0), &[1.0]);
    }

    #[test]
    fn rejects_nonsymmetric_and_indefinite() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig_desc(&m), Err(Error::ContractViolation(_))));
        let m = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(sym_eig_desc(&m), Err(Error::ContractViolation(_))));
        let m = DenseMatrix::zeros(2, 3);
        assert!(sym_eig_desc(&m).is_err());
    }

    #[test]
    fn random_psd_residuals_and_orthonormality() {
        let mut rng = RandomSource::new(99);
        for &n in &[2usize, 5, 17, 40] {
            let b = DenseMatrix::new(n + 3, n, sample_gaussian((n + 3) * n, &mut rng)).unwrap();
            let g = gram(&b);
            let eig = sym_eig_desc(&g).unwrap();
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
            assert!(residual_ok(&g, &eig));
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(eig.vector(i), eig.vector(j)) - want).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn rank_deficient_spectrum_is_clamped() {
        let ones = DenseMatrix::filled(4, 4, 1.0);
        let eig = sym_eig_desc(&gram(&ones)).unwrap();
        assert!((eig.values[0] - 16.0).abs() < 1e-12);
        assert!(eig.values[1..].iter().all(|&v| (0.0..1e-12).contains(&v)));
    }
}
