//! The capped-step partial coloring walk.
//!
//! Starting from `x ∈ (-1, 1)ⁿ`, the walk repeatedly adds a Gaussian step
//! projected onto the complement of `V`, scaled by `min(ε, μ)` where `μ` is
//! the largest multiple keeping both `y ± μg` inside the cube. Coordinates
//! that reach `±1` are frozen by inserting `e_i` into `V`; rows whose drift
//! `⟨a_i, v⟩` crosses `τ` are inserted into `V` as well, or abort the walk if
//! they overshoot `τ + η`.
//!
//! Gaussian draws are projected a block at a time with two matrix products.
//! Inserting a new unit row `u` into `V` mid-block is applied to the remaining
//! draws as the rank-one correction `g <- g - <g, u>u`, which is exactly the
//! projection onto the shrunken complement because `u ⊥ V`.
//!
//! Row drifts `<a_i, v>` are not recomputed every step. Since every step lies
//! in the complement of `V`, `|<a_i, g>| <= ‖a_i(I - VᵀV)‖·‖g‖`, and the
//! certificate's residual norms bound that projection for the whole walk.
//! A row whose drift plus this bound on the accumulated step length stays
//! below `τ` cannot trigger the saturation test, so only rows close to `τ` are
//! tracked exactly; the rest are refreshed with one product `A v` whenever
//! their combined headroom is used up. The decisions taken are the same as
//! with `p += A g` every step.

use super::{cap_unchecked, PartialParams};
use crate::error::{check_dim, Error, Result};
use crate::linalg::kernels::{axpy, dot, gemm, norm, View};
use crate::linalg::{project_rows_complement, row_norms, DenseMatrix, OrthonormalBasis, RandomSource};
use crate::structure::{project_to_small_rows, SpectralCertificate};

/// `|y_i| >= 1 - FREEZE_TOLERANCE` freezes coordinate `i` and snaps it to `±1`.
pub const FREEZE_TOLERANCE: f64 = 1e-9;

const BLOCK: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureKind {
    /// A row's drift overshot `τ + η` in a single step.
    RowOverflow { row: usize, iteration: usize },
    /// All `Q` iterations ran without freezing half the coordinates.
    Exhausted,
    /// `V` spans the whole space, so no further step can move.
    Degenerate { iteration: usize },
}

#[derive(Clone, Debug)]
pub struct PartialSuccess {
    /// `x + v`, frozen coordinates exactly `±1`.
    pub x: Vec<f64>,
    pub frozen: Vec<bool>,
    pub iterations: usize,
    pub saturated_rows: usize,
    pub basis_rows: usize,
}

impl PartialSuccess {
    pub fn frozen_count(&self) -> usize {
        self.frozen.iter().filter(|&&f| f).count()
    }
}

#[derive(Clone, Debug)]
pub enum PartialOutcome {
    Success(PartialSuccess),
    Failure(FailureKind),
}

impl PartialOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, PartialOutcome::Success(_))
    }
}

#[derive(Clone, Debug)]
pub struct PartialRun {
    pub outcome: PartialOutcome,
    pub params: PartialParams,
}

/// State exposed to an observer after every iteration.
pub struct WalkView<'a> {
    pub iteration: usize,
    /// The starting point `x`.
    pub start: &'a [f64],
    /// Current `x + v`.
    pub point: &'a [f64],
    pub frozen: &'a [bool],
    pub saturated: &'a [bool],
    pub basis: &'a OrthonormalBasis,
}

/// Runs the walk from scratch, computing the spectral certificate of `a`.
pub fn partial_coloring(a: &DenseMatrix, x: &[f64], rng: &mut RandomSource) -> Result<PartialRun> {
    let cert = project_to_small_rows(a)?;
    partial_coloring_with(a, x, &cert, rng)
}

/// Runs the walk with a precomputed certificate for `a`. The certificate is a
/// deterministic function of `a`, so retries may share it.
pub fn partial_coloring_with(
    a: &DenseMatrix,
    x: &[f64],
    cert: &SpectralCertificate,
    rng: &mut RandomSource,
) -> Result<PartialRun> {
    partial_coloring_observed(a, x, cert, rng, |_| {})
}

pub fn partial_coloring_observed(
    a: &DenseMatrix,
    x: &[f64],
    cert: &SpectralCertificate,
    rng: &mut RandomSource,
    mut observe: impl FnMut(&WalkView<'_>),
) -> Result<PartialRun> {
    let (m, n) = (a.rows(), a.cols());
    check_dim(n, x.len())?;
    check_dim(n, cert.basis.dim())?;
    if m < n {
        return Err(Error::ContractViolation(format!("partial coloring needs m >= n, got {m}x{n}")));
    }
    if let Some(i) = x.iter().position(|v| v.is_nan() || v.abs() >= 1.0) {
        return Err(Error::ContractViolation(format!(
            "starting point must lie in (-1, 1)^n, coordinate {i} = {}",
            x[i]
        )));
    }
    let params = PartialParams::new(m, n, cert.eta);
    let outcome = Walk::new(a, x, &cert.basis, params)?.run(rng, &mut observe);
    Ok(PartialRun { outcome, params })
}

struct Walk<'a> {
    a: &'a DenseMatrix,
    params: PartialParams,
    basis: OrthonormalBasis,
    start: Vec<f64>,
    point: Vec<f64>,
    frozen: Vec<bool>,
    frozen_count: usize,
    saturated: Vec<bool>,
    saturated_count: usize,
    rows: RowTracker,
    block: Block,
}

/// Projected Gaussian draws, `k × n`.
struct Block {
    projected: Vec<f64>,
    raw: Vec<f64>,
    coef: Vec<f64>,
    next: usize,
    filled: usize,
}

/// Drifts `A v`, exact for the rows in `hot` and as of the last refresh for
/// the others.
struct RowTracker {
    drift: Vec<f64>,
    /// Upper bound on `‖a_i (I - VᵀV)‖` for every `V` the walk can reach.
    bound: Vec<f64>,
    hot: Vec<usize>,
    /// Step length accumulated since the last refresh.
    travelled: f64,
    /// Step length the cold rows can absorb without reaching `τ`.
    allowance: f64,
    headroom: Vec<f64>,
}

impl<'a> Walk<'a> {
    fn new(a: &'a DenseMatrix, x: &[f64], basis: &OrthonormalBasis, params: PartialParams) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        // the residual norms only shrink as `V` grows; the slack covers the
        // rounding error of the projections
        let residual = row_norms(&project_rows_complement(a, basis)?);
        let bound = residual.iter().zip(row_norms(a)).map(|(r, full)| r + 1e-8 * full).collect();
        Ok(Walk {
            a,
            params,
            basis: basis.clone(),
            start: x.to_vec(),
            point: x.to_vec(),
            frozen: vec![false; n],
            frozen_count: 0,
            saturated: vec![false; m],
            saturated_count: 0,
            rows: RowTracker {
                drift: vec![0.0; m],
                bound,
                hot: Vec::new(),
                travelled: 0.0,
                allowance: 0.0,
                headroom: Vec::new(),
            },
            block: Block { projected: vec![0.0; BLOCK * n], raw: vec![0.0; BLOCK * n], coef: Vec::new(), next: 0, filled: 0 },
        })
    }

    fn run(mut self, rng: &mut RandomSource, observe: &mut impl FnMut(&WalkView<'_>)) -> PartialOutcome {
        let a = self.a;
        let n = a.cols();
        let need = n.div_ceil(2);
        let (eps, tau) = (self.params.eps, self.params.tau);
        let ceiling = self.params.row_bound();
        // with τ = 0 the test `|p| < τ` never holds, so no row can saturate
        let track_rows = tau > 0.0;
        let mut new_frozen = Vec::new();
        let mut new_saturated = Vec::new();
        let mut hot_step = Vec::new();

        for iteration in 1..=self.params.steps {
            if self.basis.is_full() {
                return PartialOutcome::Failure(FailureKind::Degenerate { iteration });
            }
            if self.block.next == self.block.filled {
                self.refill(rng, BLOCK.min(self.params.steps - iteration + 1));
            }
            let j = self.block.next;
            self.block.next += 1;
            let g = &mut self.block.projected[j * n..(j + 1) * n];

            let scale = cap_unchecked(&self.point, g, &self.frozen).min_with(eps);
            g.iter_mut().for_each(|v| *v *= scale);
            let g = &self.block.projected[j * n..(j + 1) * n];

            new_frozen.clear();
            for (i, ((&y, &step), &f)) in self.point.iter().zip(g).zip(&self.frozen).enumerate() {
                if !f && (y + step).abs() >= 1.0 - FREEZE_TOLERANCE {
                    new_frozen.push(i);
                }
            }
            new_saturated.clear();
            if track_rows {
                let step = norm(g);
                if self.rows.travelled + step >= self.rows.allowance {
                    self.rows.refresh(a, &self.start, &self.point, &self.saturated, tau, step);
                }
                self.rows.travelled += step;
                hot_step.clear();
                for &r in &self.rows.hot {
                    let p = self.rows.drift[r];
                    let next = p + dot(a.row(r), g);
                    hot_step.push(next);
                    if next.abs() >= tau && p.abs() < tau {
                        if next.abs() > ceiling {
                            return PartialOutcome::Failure(FailureKind::RowOverflow { row: r, iteration });
                        }
                        new_saturated.push(r);
                    }
                }
                for (&r, &p) in self.rows.hot.iter().zip(&hot_step) {
                    self.rows.drift[r] = p;
                }
            }

            axpy(1.0, g, &mut self.point);
            for &i in &new_frozen {
                self.frozen[i] = true;
            }
            self.frozen_count += new_frozen.len();
            for (y, &f) in self.point.iter_mut().zip(&self.frozen) {
                if f {
                    *y = y.signum();
                }
            }

            let mut unit = vec![0.0; n];
            for &i in &new_frozen {
                unit[i] = 1.0;
                self.insert(&unit);
                unit[i] = 0.0;
            }
            for &r in &new_saturated {
                self.saturated[r] = true;
                self.insert(a.row(r));
            }
            if !new_saturated.is_empty() {
                let saturated = &self.saturated;
                self.rows.hot.retain(|&r| !saturated[r]);
            }
            self.saturated_count += new_saturated.len();

            observe(&WalkView {
                iteration,
                start: &self.start,
                point: &self.point,
                frozen: &self.frozen,
                saturated: &self.saturated,
                basis: &self.basis,
            });

            if self.frozen_count >= need {
                return PartialOutcome::Success(PartialSuccess {
                    x: self.point,
                    frozen: self.frozen,
                    iterations: iteration,
                    saturated_rows: self.saturated_count,
                    basis_rows: self.basis.len(),
                });
            }
        }
        PartialOutcome::Failure(FailureKind::Exhausted)
    }

    /// Samples `k` Gaussian vectors and projects them onto the complement of `V`.
    fn refill(&mut self, rng: &mut RandomSource, k: usize) {
        let n = self.a.cols();
        let b = &mut self.block;
        rng.fill_gaussian(&mut b.raw[..k * n]);
        b.projected[..k * n].copy_from_slice(&b.raw[..k * n]);
        let l = self.basis.len();
        if l > 0 {
            let v = View::row_major(self.basis.as_slice(), l, n);
            b.coef.resize(k * l, 0.0);
            gemm(1.0, View::row_major(&b.raw[..k * n], k, n), v.t(), 0.0, &mut b.coef);
            gemm(-1.0, View::row_major(&b.coef, k, l), v, 1.0, &mut b.projected[..k * n]);
        }
        b.next = 0;
        b.filled = k;
    }

    /// Gram–Schmidt insertion of `s`, re-projecting the unused draws.
    fn insert(&mut self, s: &[f64]) {
        // `s` has the right dimension by construction
        let added = self.basis.orthogonalize(s).unwrap_or(false);
        let b = &mut self.block;
        if !added || b.next == b.filled {
            return;
        }
        let n = self.a.cols();
        let u = self.basis.row(self.basis.len() - 1);
        for j in b.next..b.filled {
            let g = &mut b.projected[j * n..(j + 1) * n];
            let c = dot(g, u);
            axpy(-c, u, g);
        }
    }
}

impl RowTracker {
    /// Recomputes every drift and splits the unsaturated rows into the few
    /// closest to `τ`, tracked exactly, and the rest.
    fn refresh(&mut self, a: &DenseMatrix, start: &[f64], point: &[f64], saturated: &[bool], tau: f64, step: f64) {
        let v: Vec<f64> = point.iter().zip(start).map(|(y, x)| y - x).collect();
        for (p, row) in self.drift.iter_mut().zip(a.row_iter()) {
            *p = dot(row, &v);
        }
        self.headroom.clear();
        self.headroom.extend(self.drift.iter().zip(&self.bound).zip(saturated).map(|((p, &b), &s)| {
            if s || b == 0.0 {
                f64::INFINITY
            } else {
                ((tau - p.abs()) / b).max(0.0)
            }
        }));
        let mut sorted: Vec<f64> = self.headroom.iter().copied().filter(|h| h.is_finite()).collect();
        let k = (a.rows() / 64).max(1).min(sorted.len());
        let mut cut = 64.0 * step;
        if k > 0 {
            let (_, kth, _) = sorted.select_nth_unstable_by(k - 1, f64::total_cmp);
            cut = cut.max(*kth);
        }
        self.hot.clear();
        self.allowance = f64::INFINITY;
        for (r, &h) in self.headroom.iter().enumerate() {
            if h <= cut {
                self.hot.push(r);
            } else {
                self.allowance = self.allowance.min(h);
            }
        }
        self.travelled = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm, project_rows_complement, row_norms};

    fn sign_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = RandomSource::new(seed);
        DenseMatrix::from_fn(m, n, |_, _| f64::from(rng.sign())).unwrap()
    }

    fn max_row_change(a: &DenseMatrix, x0: &[f64], x1: &[f64]) -> f64 {
        let d: Vec<f64> = x1.iter().zip(x0).map(|(a, b)| a - b).collect();
        a.mul_vec(&d).unwrap().iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = DenseMatrix::identity(3);
        let mut rng = RandomSource::new(0);
        assert!(partial_coloring(&a, &[0.0, 1.0, 0.0], &mut rng).is_err());
        assert!(partial_coloring(&a, &[0.0, 0.0], &mut rng).is_err());
        assert!(partial_coloring(&DenseMatrix::zeros(2, 3), &[0.0; 3], &mut rng).is_err());
    }

    #[test]
    fn zero_matrix() {
        let a = DenseMatrix::zeros(4, 4);
        let run = partial_coloring(&a, &[0.0; 4], &mut RandomSource::new(1)).unwrap();
        assert_eq!(run.params.row_bound(), 0.0);
        let PartialOutcome::Success(s) = run.outcome else { panic!("zero matrix walk failed") };
        assert!(s.frozen_count() >= 2);
        assert_eq!(max_row_change(&a, &[0.0; 4], &s.x), 0.0);
    }

    #[test]
    fn identity_drift_is_bounded() {
        let a = DenseMatrix::identity(4);
        for seed in 0..20 {
            let run = partial_coloring(&a, &[0.0; 4], &mut RandomSource::new(seed)).unwrap();
            assert!(run.params.eta <= 1.0 + 1e-12);
            if let PartialOutcome::Success(s) = run.outcome {
                for &xi in &s.x {
                    assert!(xi.abs() <= run.params.row_bound() + 1e-6);
                }
            }
        }
    }

    #[test]
    fn success_postconditions_on_sign_matrices() {
        let a = sign_matrix(12, 10, 3);
        let cert = project_to_small_rows(&a).unwrap();
        let x0: Vec<f64> = (0..10).map(|i| 0.1 * (i as f64 - 5.0) / 5.0).collect();
        let mut successes = 0;
        for seed in 0..20 {
            let run = partial_coloring_with(&a, &x0, &cert, &mut RandomSource::new(seed)).unwrap();
            if let PartialOutcome::Success(s) = run.outcome {
                successes += 1;
                assert!(s.frozen_count() >= 5);
                for (xi, &f) in s.x.iter().zip(&s.frozen) {
                    if f {
                        assert_eq!(xi.abs(), 1.0);
                    } else {
                        assert!(xi.abs() < 1.0);
                    }
                }
                let bound = run.params.row_bound();
                assert!(max_row_change(&a, &x0, &s.x) <= bound + 1e-6 * (1.0 + bound));
            }
        }
        assert!(successes > 0);
    }

    #[test]
    fn walk_invariants_hold_every_iteration() {
        let a = sign_matrix(16, 16, 8);
        let cert = project_to_small_rows(&a).unwrap();
        let x0 = vec![0.0; 16];
        let mut pinned: Vec<Option<f64>> = vec![None; 16];
        let mut saturated_at: Vec<Option<f64>> = vec![None; 16];
        let norms = row_norms(&a);
        let mut steps = 0;
        partial_coloring_observed(&a, &x0, &cert, &mut RandomSource::new(4), |view| {
            steps += 1;
            for (i, &y) in view.point.iter().enumerate() {
                assert!(y.abs() <= 1.0 + 1e-9);
                if view.frozen[i] {
                    assert_eq!(y.abs(), 1.0);
                    match pinned[i] {
                        Some(p) => assert_eq!(p, y),
                        None => pinned[i] = Some(y),
                    }
                } else {
                    assert!(y.abs() < 1.0);
                }
            }
            let v: Vec<f64> = view.point.iter().zip(view.start).map(|(y, x)| y - x).collect();
            let drift = a.mul_vec(&v).unwrap();
            for r in 0..16 {
                if view.saturated[r] {
                    match saturated_at[r] {
                        Some(p) => assert!((drift[r] - p).abs() <= 1e-6 * norms[r]),
                        None => saturated_at[r] = Some(drift[r]),
                    }
                }
            }
            assert!(view.basis.orthonormality_error() < 1e-8);
        })
        .unwrap();
        assert!(steps > 0);
    }

    /// Step-by-step walk with a fresh projection and a full `A g` product on
    /// every iteration. Draws come from the stream in the same order.
    fn reference_walk(a: &DenseMatrix, x: &[f64], cert: &SpectralCertificate, seed: u64) -> PartialOutcome {
        let (m, n) = (a.rows(), a.cols());
        let params = PartialParams::new(m, n, cert.eta);
        let mut rng = RandomSource::new(seed);
        let mut basis = cert.basis.clone();
        let mut y = x.to_vec();
        let mut p = vec![0.0; m];
        let mut frozen = vec![false; n];
        let mut saturated = vec![false; m];
        let mut raw = vec![0.0; BLOCK * n];
        let mut sat_count = 0;
        for t in 0..params.steps {
            if basis.is_full() {
                return PartialOutcome::Failure(FailureKind::Degenerate { iteration: t + 1 });
            }
            let j = t % BLOCK;
            if j == 0 {
                rng.fill_gaussian(&mut raw[..BLOCK.min(params.steps - t) * n]);
            }
            let mut g = basis.project(&raw[j * n..(j + 1) * n]).unwrap();
            let scale = cap_unchecked(&y, &g, &frozen).min_with(params.eps);
            g.iter_mut().for_each(|v| *v *= scale);
            let ag = a.mul_vec(&g).unwrap();
            let fresh: Vec<usize> =
                (0..n).filter(|&i| !frozen[i] && (y[i] + g[i]).abs() >= 1.0 - FREEZE_TOLERANCE).collect();
            let mut rows = Vec::new();
            for r in 0..m {
                let next = p[r] + ag[r];
                if !saturated[r] && next.abs() >= params.tau && p[r].abs() < params.tau {
                    if next.abs() > params.row_bound() {
                        return PartialOutcome::Failure(FailureKind::RowOverflow { row: r, iteration: t + 1 });
                    }
                    rows.push(r);
                }
            }
            for i in 0..n {
                y[i] += g[i];
            }
            for r in 0..m {
                p[r] += ag[r];
            }
            for &i in &fresh {
                frozen[i] = true;
                y[i] = y[i].signum();
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                basis.orthogonalize(&e).unwrap();
            }
            for &r in &rows {
                saturated[r] = true;
                basis.orthogonalize(a.row(r)).unwrap();
            }
            sat_count += rows.len();
            if frozen.iter().filter(|&&f| f).count() >= n.div_ceil(2) {
                let basis_rows = basis.len();
                return PartialOutcome::Success(PartialSuccess {
                    x: y,
                    frozen,
                    iterations: t + 1,
                    saturated_rows: sat_count,
                    basis_rows,
                });
            }
        }
        PartialOutcome::Failure(FailureKind::Exhausted)
    }

    #[test]
    fn lazy_row_tracking_matches_reference_walk() {
        let mut compared = 0;
        let mut saturations = 0;
        for (m, n, eta) in [(20, 12, None), (24, 8, Some(0.05)), (40, 10, Some(0.02)), (30, 30, Some(0.1))] {
            let a = sign_matrix(m, n, (m * n) as u64);
            let mut cert = project_to_small_rows(&a).unwrap();
            if let Some(e) = eta {
                cert.eta = e;
            }
            let x0: Vec<f64> = (0..n).map(|i| 0.3 * ((i % 5) as f64 - 2.0) / 2.0).collect();
            for seed in 0..8 {
                let fast = partial_coloring_with(&a, &x0, &cert, &mut RandomSource::new(seed)).unwrap().outcome;
                let slow = reference_walk(&a, &x0, &cert, seed);
                match (fast, slow) {
                    (PartialOutcome::Success(f), PartialOutcome::Success(s)) => {
                        assert_eq!(f.iterations, s.iterations);
                        assert_eq!(f.frozen, s.frozen);
                        assert_eq!(f.saturated_rows, s.saturated_rows);
                        saturations += f.saturated_rows;
                        for (u, v) in f.x.iter().zip(&s.x) {
                            assert!((u - v).abs() < 1e-6, "{m}x{n} seed {seed}: {u} vs {v}");
                        }
                    }
                    (PartialOutcome::Failure(f), PartialOutcome::Failure(s)) => assert_eq!(f, s),
                    (f, s) => panic!("outcomes differ for {m}x{n} seed {seed}: {f:?} vs {s:?}"),
                }
                compared += 1;
            }
        }
        assert_eq!(compared, 32);
        assert!(saturations > 0);
    }

    #[test]
    fn saturating_rows_enter_the_basis() {
        // A tall matrix whose projected rows are large relative to τ is rare
        // with the default constants, so check the bookkeeping directly with a
        // certificate whose eta understates the residual norms.
        let a = sign_matrix(24, 8, 5);
        let mut cert = project_to_small_rows(&a).unwrap();
        cert.eta = 1e-3;
        let mut seen = 0;
        for seed in 0..30 {
            let run = partial_coloring_with(&a, &[0.0; 8], &cert, &mut RandomSource::new(seed)).unwrap();
            match run.outcome {
                PartialOutcome::Success(s) => seen += s.saturated_rows,
                PartialOutcome::Failure(FailureKind::RowOverflow { .. }) => seen += 1,
                PartialOutcome::Failure(_) => {}
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn full_basis_is_degenerate() {
        let a = DenseMatrix::identity(2);
        let mut cert = project_to_small_rows(&a).unwrap();
        cert.basis.orthogonalize(&[1.0, 0.0]).unwrap();
        cert.basis.orthogonalize(&[0.0, 1.0]).unwrap();
        let res = project_rows_complement(&a, &cert.basis).unwrap();
        assert!(norm(res.as_slice()) < 1e-15);
        let run = partial_coloring_with(&a, &[0.0; 2], &cert, &mut RandomSource::new(0)).unwrap();
        assert!(matches!(run.outcome, PartialOutcome::Failure(FailureKind::Degenerate { iteration: 1 })));
    }
}
