use crate::error::{Error, Result};
use crate::linalg::{sample_gaussian, DenseMatrix, OrthonormalBasis, RandomSource};

use super::{FREEZE_TOLERANCE, STEP_EPSILON};

/// Result of [`reduce_wide`]: a fractional coloring with `Ax = 0` and at
/// most `m` coordinates strictly inside `(-1, 1)`.
#[derive(Clone, Debug)]
pub struct WideReduction {
    pub x: Vec<f64>,
    /// Indices not yet at `±1`, ascending.
    pub free: Vec<usize>,
}

/// Reduces an `m × n` matrix with `m < n` to at most `m` free coordinates.
///
/// All rows of `A` go into `V`; the walk then moves along random directions in
/// the complement of `V` until some coordinate hits `±1`, which is frozen by
/// inserting `e_i`. Every step is orthogonal to the rows of `A`, so `Ax`
/// stays zero.
pub fn reduce_wide(a: &DenseMatrix, rng: &mut RandomSource) -> Result<WideReduction> {
    let (m, n) = (a.rows(), a.cols());
    if m >= n {
        return Err(Error::ContractViolation(format!("reduction needs m < n, got {m}x{n}")));
    }
    let mut basis = OrthonormalBasis::new(n);
    for row in a.row_iter() {
        basis.orthogonalize(row)?;
    }
    let mut x = vec![0.0; n];
    let mut frozen = vec![false; n];
    let mut frozen_count = 0;
    let mut unit = vec![0.0; n];
    let mut stalls = 0;

    while !basis.is_full() && frozen_count < n {
        let mut g = sample_gaussian(n, rng);
        basis.project_in_place(&mut g);
        // largest step keeping x + εg inside the cube, one-sided
        let mut step = f64::INFINITY;
        let mut hit = None;
        for i in 0..n {
            if !frozen[i] && g[i].abs() > STEP_EPSILON {
                let room = (1.0 - x[i] * g[i].signum()).max(0.0) / g[i].abs();
                if room < step {
                    step = room;
                    hit = Some(i);
                }
            }
        }
        let Some(hit) = hit else {
            stalls += 1;
            if stalls > 32 {
                return Err(Error::Stall(format!(
                    "projected direction vanished with {} of {n} basis rows",
                    basis.len()
                )));
            }
            continue;
        };
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += step * gi;
        }
        for i in 0..n {
            if frozen[i] || i == hit || x[i].abs() >= 1.0 - FREEZE_TOLERANCE {
                let signum = if i == hit { g[i].signum() } else { x[i].signum() };
                x[i] = signum;
                if !frozen[i] {
                    frozen[i] = true;
                    frozen_count += 1;
                    unit[i] = 1.0;
                    basis.orthogonalize(&unit)?;
                    unit[i] = 0.0;
                }
            }
        }
    }
    let free = (0..n).filter(|&i| !frozen[i]).collect();
    Ok(WideReduction { x, free })
}
