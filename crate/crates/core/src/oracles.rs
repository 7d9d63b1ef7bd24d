//! Exhaustive reference values for small instances.
//!
//! Both oracles walk the `2^(n-1)` colorings with the last coordinate fixed to
//! `+1` (negating a coloring leaves `‖Ax‖∞` unchanged) in Gray-code order, so
//! each step updates `Ax` with one column.

use crate::coloring::{disc_inf, Coloring};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Largest column count an oracle will enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_n: usize,
}

impl OracleBudget {
    pub const DISC: OracleBudget = OracleBudget { max_n: 20 };
    pub const HERDISC: OracleBudget = OracleBudget { max_n: 10 };

    fn check(&self, n: usize) -> Result<()> {
        if n > self.max_n {
            return Err(Error::BudgetExceeded { n, max_n: self.max_n });
        }
        Ok(())
    }
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget::DISC
    }
}

/// `min_x ‖Ax‖∞` over `x ∈ {±1}ⁿ` and one minimizer.
pub fn brute_force_disc(a: &DenseMatrix, budget: &OracleBudget) -> Result<(f64, Coloring)> {
    let n = a.cols();
    budget.check(n)?;
    let cols: Vec<Vec<f64>> = (0..n).map(|j| (0..a.rows()).map(|i| a.get(i, j)).collect()).collect();
    let best = gray_minimum(&cols);
    let signs: Vec<i8> = (0..n).map(|j| if best >> j & 1 == 1 { -1 } else { 1 }).collect();
    let witness = Coloring::new(signs)?;
    // the running sums drift by rounding; report the exact value of the witness
    let value = disc_inf(a, &witness.to_f64())?;
    Ok((value, witness))
}

/// `max` over nonempty column subsets `S` of `disc(A_S)`, smallest subsets
/// first.
pub fn brute_force_herdisc(a: &DenseMatrix, budget: &OracleBudget) -> Result<f64> {
    let n = a.cols();
    budget.check(n)?;
    let mut masks: Vec<u64> = (1u64..(1u64 << n)).collect();
    masks.sort_by_key(|m| m.count_ones());
    let mut best = 0.0f64;
    for mask in masks {
        let subset: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
        let sub = a.select_columns(&subset)?;
        best = best.max(brute_force_disc(&sub, budget)?.0);
    }
    Ok(best)
}

/// Bitmask of negated columns for the best coloring; bit `n-1` is always clear.
fn gray_minimum(cols: &[Vec<f64>]) -> u64 {
    let n = cols.len();
    let m = cols.first().map_or(0, Vec::len);
    let mut sums = vec![0.0; m];
    for c in cols {
        for (s, v) in sums.iter_mut().zip(c) {
            *s += v;
        }
    }
    let inf = |s: &[f64]| s.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut best_mask = 0u64;
    let mut best = inf(&sums);
    let mut mask = 0u64;
    for step in 1u64..(1u64 << (n - 1)) {
        let j = step.trailing_zeros() as usize;
        mask ^= 1 << j;
        let sign = if mask >> j & 1 == 1 { -2.0 } else { 2.0 };
        for (s, v) in sums.iter_mut().zip(&cols[j]) {
            *s += sign * v;
        }
        let d = inf(&sums);
        if d < best {
            best = d;
            best_mask = mask;
        }
    }
    best_mask
}
