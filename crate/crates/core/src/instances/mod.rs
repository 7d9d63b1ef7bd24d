//! Benchmark matrix generators and the matrix and coloring file formats.
//!
//! Every generator is a pure function of its [`InstanceSpec`]. Geometric
//! instances draw the column points from one sub-stream of the seed and the
//! row objects from another, so growing `m` leaves the columns unchanged.

mod io;

pub use io::{
    parse_coloring, parse_matrix, read_coloring, read_matrix, render_coloring, render_matrix, write_coloring,
    write_matrix, MAX_PREALLOCATED_ENTRIES,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, RandomSource};

const UNIFORM_STREAM: u64 = 0;
const COLUMN_STREAM: u64 = 1;
const ROW_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Uniform,
    Corner2d,
    Halfspace2d,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 3] = [InstanceKind::Uniform, InstanceKind::Corner2d, InstanceKind::Halfspace2d];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Uniform => "uniform",
            InstanceKind::Corner2d => "corner2d",
            InstanceKind::Halfspace2d => "halfspace2d",
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InstanceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::ContractViolation(format!("unknown instance type `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::ContractViolation(format!("instance dimensions must be positive, got {m}x{n}")));
        }
        Ok(InstanceSpec { kind, m, n, seed })
    }

    pub fn generate(&self) -> Result<DenseMatrix> {
        match self.kind {
            InstanceKind::Uniform => gen_uniform(self),
            InstanceKind::Corner2d => gen_corner(self),
            InstanceKind::Halfspace2d => gen_halfspace(self),
        }
    }
}

fn expect_kind(spec: &InstanceSpec, kind: InstanceKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::ContractViolation(format!("expected a {kind} spec, got {}", spec.kind)));
    }
    InstanceSpec::new(spec.kind, spec.m, spec.n, spec.seed).map(|_| ())
}

/// Independent uniform `±1` entries.
pub fn gen_uniform(spec: &InstanceSpec) -> Result<DenseMatrix> {
    expect_kind(spec, InstanceKind::Uniform)?;
    let mut rng = RandomSource::with_stream(spec.seed, UNIFORM_STREAM);
    DenseMatrix::from_fn(spec.m, spec.n, |_, _| f64::from(rng.sign()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn sample(rng: &mut RandomSource) -> Self {
        let x = rng.uniform();
        Point { x, y: rng.uniform() }
    }
}

fn sample_points(k: usize, rng: &mut RandomSource) -> Vec<Point> {
    (0..k).map(|_| Point::sample(rng)).collect()
}

/// `q` strictly dominates `p` in both coordinates.
pub fn dominates(q: Point, p: Point) -> bool {
    q.x > p.x && q.y > p.y
}

/// Entry `(i, j)` is 1 when row point `i` dominates column point `j`.
pub fn gen_corner(spec: &InstanceSpec) -> Result<DenseMatrix> {
    expect_kind(spec, InstanceKind::Corner2d)?;
    let cols = sample_points(spec.n, &mut RandomSource::with_stream(spec.seed, COLUMN_STREAM));
    let rows = sample_points(spec.m, &mut RandomSource::with_stream(spec.seed, ROW_STREAM));
    corner_matrix(&rows, &cols)
}

pub fn corner_matrix(rows: &[Point], cols: &[Point]) -> Result<DenseMatrix> {
    DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| f64::from(u8::from(dominates(rows[i], cols[j]))))
}

/// The closed side of the line through `a` and `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Halfspace {
    pub a: Point,
    pub b: Point,
    pub above: bool,
}

impl Halfspace {
    /// Points on the line belong to both sides.
    pub fn contains(&self, p: Point) -> bool {
        let (mut dx, mut dy) = (self.b.x - self.a.x, self.b.y - self.a.y);
        // orient the line left to right (bottom to top when vertical) so that
        // "above" is its left-hand side
        if dx < 0.0 || (dx == 0.0 && dy < 0.0) {
            (dx, dy) = (-dx, -dy);
        }
        let cross = dx * (p.y - self.a.y) - dy * (p.x - self.a.x);
        if self.above {
            cross >= 0.0
        } else {
            cross <= 0.0
        }
    }

    fn sample(rng: &mut RandomSource) -> Self {
        loop {
            let u = rng.uniform();
            let a = if rng.coin() { Point::new(0.0, u) } else { Point::new(u, 1.0) };
            let u = rng.uniform();
            let b = if rng.coin() { Point::new(1.0, u) } else { Point::new(u, 0.0) };
            let above = rng.coin();
            if a != b {
                return Halfspace { a, b, above };
            }
        }
    }
}

/// Entry `(i, j)` is 1 when column point `j` lies in halfspace `i`. Each line
/// joins a point on the left or top edge of the unit square to a point on the
/// right or bottom edge.
pub fn gen_halfspace(spec: &InstanceSpec) -> Result<DenseMatrix> {
    expect_kind(spec, InstanceKind::Halfspace2d)?;
    let cols = sample_points(spec.n, &mut RandomSource::with_stream(spec.seed, COLUMN_STREAM));
    let mut rng = RandomSource::with_stream(spec.seed, ROW_STREAM);
    let rows: Vec<Halfspace> = (0..spec.m).map(|_| Halfspace::sample(&mut rng)).collect();
    halfspace_matrix(&rows, &cols)
}

pub fn halfspace_matrix(rows: &[Halfspace], cols: &[Point]) -> Result<DenseMatrix> {
    DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| f64::from(u8::from(rows[i].contains(cols[j]))))
}
