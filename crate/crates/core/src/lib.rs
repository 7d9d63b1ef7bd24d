//! Discrepancy minimization with hereditary guarantees.
//!
//! Given a real `m × n` matrix `A`, [`hereditary_minimize`] computes a
//! coloring `x ∈ {-1, 1}^n` whose discrepancy `‖Ax‖∞` is bounded in terms of
//! the hereditary discrepancy of `A`. The pieces it is built from are exposed
//! as well:
//!
//! * [`linalg`]: dense matrices, incremental Gram–Schmidt bases, a symmetric
//!   eigensolver and seeded Gaussian sampling.
//! * [`structure`]: the projection that shrinks every row of `A` onto an
//!   orthogonal complement of at most `n/4` directions, and the spectral lower
//!   bound on hereditary discrepancy.
//! * [`coloring`]: the capped-step partial coloring walk, the rounds driver and
//!   the reduction for wide matrices.
//! * [`oracles`]: exhaustive discrepancy and hereditary discrepancy on small
//!   instances.
//! * [`instances`], [`bench`], [`cli`]: generators, file formats, baselines and
//!   the experiment harness.

pub mod bench;
pub mod cli;
pub mod coloring;
mod error;
pub mod instances;
pub mod linalg;
pub mod oracles;
pub mod structure;

pub use coloring::{disc_inf, hereditary_minimize, Coloring, RunReport};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, OrthonormalBasis, RandomSource};
