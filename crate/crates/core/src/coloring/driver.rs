use std::time::Instant;

use serde::Serialize;

use super::walk::{partial_coloring_with, PartialOutcome};
use super::{disc_inf, reduce_wide, Coloring};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, RandomSource};
use crate::structure::project_to_small_rows;

/// Partial coloring failures tolerated per round before giving up.
pub const RETRY_LIMIT: usize = 300;

#[derive(Clone, Debug, Serialize)]
pub struct RoundRecord {
    /// Number of free columns `|S|` entering the round.
    pub free_count: usize,
    pub tau: f64,
    pub eta: f64,
    pub retries: usize,
    pub iterations: usize,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionRecord {
    pub frozen: usize,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub reduction: Option<ReductionRecord>,
    pub rounds: Vec<RoundRecord>,
    /// `Σ (τ_r + η_r)` over the rounds.
    pub total_bound: f64,
    pub final_disc: f64,
    pub total_elapsed_s: f64,
}

impl RunReport {
    pub fn total_retries(&self) -> usize {
        self.rounds.iter().map(|r| r.retries).sum()
    }
}

/// Computes a full coloring of `a`.
///
/// Each round restricts `A` to the columns still strictly inside `(-1, 1)`,
/// runs the partial coloring walk on that submatrix (retrying on failure) and
/// splices the result back. Wide inputs are first reduced so that at most `m`
/// columns remain free.
pub fn hereditary_minimize(a: &DenseMatrix, rng: &mut RandomSource) -> Result<(Coloring, RunReport)> {
    let start = Instant::now();
    let (m, n) = (a.rows(), a.cols());
    let mut x = vec![0.0; n];
    let mut fixed = vec![false; n];
    let mut reduction = None;

    if m < n {
        let t = Instant::now();
        let wide = reduce_wide(a, rng)?;
        x = wide.x;
        fixed.fill(true);
        for &i in &wide.free {
            fixed[i] = false;
        }
        reduction = Some(ReductionRecord { frozen: n - wide.free.len(), elapsed_s: t.elapsed().as_secs_f64() });
    }

    let mut rounds = Vec::new();
    loop {
        let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
        if free.is_empty() {
            break;
        }
        let round = rounds.len() + 1;
        let t = Instant::now();
        let sub = a.select_columns(&free)?;
        let start_point: Vec<f64> = free.iter().map(|&i| x[i]).collect();
        let cert = project_to_small_rows(&sub)?;

        let mut retries = 0;
        let (success, params) = loop {
            let run = partial_coloring_with(&sub, &start_point, &cert, rng)?;
            match run.outcome {
                PartialOutcome::Success(s) => break (s, run.params),
                PartialOutcome::Failure(_) => {
                    retries += 1;
                    if retries > RETRY_LIMIT {
                        return Err(Error::RetryLimit { round, retries });
                    }
                }
            }
        };
        for (k, &i) in free.iter().enumerate() {
            x[i] = success.x[k];
            fixed[i] = success.frozen[k];
        }
        rounds.push(RoundRecord {
            free_count: free.len(),
            tau: params.tau,
            eta: params.eta,
            retries,
            iterations: success.iterations,
            elapsed_s: t.elapsed().as_secs_f64(),
        });
    }

    let coloring = Coloring::from_f64(&x)?;
    let final_disc = disc_inf(a, &x)?;
    let total_bound = rounds.iter().map(|r| r.tau + r.eta).sum();
    let report = RunReport {
        seed: rng.seed(),
        m,
        n,
        reduction,
        rounds,
        total_bound,
        final_disc,
        total_elapsed_s: start.elapsed().as_secs_f64(),
    };
    Ok((coloring, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_has_zero_disc() {
        for &(m, n) in &[(3usize, 3usize), (5, 2), (2, 6)] {
            let (c, report) = hereditary_minimize(&DenseMatrix::zeros(m, n), &mut RandomSource::new(1)).unwrap();
            assert_eq!(c.len(), n);
            assert_eq!(report.final_disc, 0.0);
        }
    }

    #[test]
    fn one_by_one() {
        let a = DenseMatrix::from_rows(&[[-2.5]]).unwrap();
        let (c, report) = hereditary_minimize(&a, &mut RandomSource::new(9)).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(report.final_disc, 2.5);
        assert_eq!(report.rounds.len(), 1);
    }

    #[test]
    fn accounting_and_halving_on_sign_matrices() {
        for seed in 0..5 {
            let mut gen = RandomSource::new(1000 + seed);
            let a = DenseMatrix::from_fn(16, 16, |_, _| f64::from(gen.sign())).unwrap();
            let (c, report) = hereditary_minimize(&a, &mut RandomSource::new(seed)).unwrap();
            assert_eq!(c.disc(&a).unwrap(), report.final_disc);
            assert!(report.final_disc <= report.total_bound * (1.0 + 1e-6) + 1e-6);
            assert!(report.rounds.len() <= 4 + 1);
            for w in report.rounds.windows(2) {
                assert!(w[1].free_count * 2 <= w[0].free_count);
            }
        }
    }

    #[test]
    fn wide_input_goes_through_reduction() {
        let mut gen = RandomSource::new(4);
        let a = DenseMatrix::from_fn(3, 9, |_, _| gen.gaussian()).unwrap();
        let (c, report) = hereditary_minimize(&a, &mut RandomSource::new(2)).unwrap();
        assert_eq!(c.len(), 9);
        let red = report.reduction.expect("reduction ran");
        assert!(red.frozen >= 6);
        assert!(report.rounds.first().is_none_or(|r| r.free_count <= 3));
    }
}
