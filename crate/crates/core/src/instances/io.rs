//! Plain-text matrix and coloring files.
//!
//! A matrix file starts with a line `m n` followed by `m` lines of `n`
//! space-separated reals. A coloring file is one line of `±1` integers.
//! Line numbers in errors are 1-based.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::coloring::Coloring;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Headers can claim any size; storage grows past this only as entries are
/// actually read.
pub const MAX_PREALLOCATED_ENTRIES: usize = 1 << 22;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_dim(token: Option<&str>, what: &str) -> Result<usize> {
    let token = token.ok_or_else(|| parse_error(1, format!("header is missing {what}")))?;
    match token.parse::<usize>() {
        Ok(0) => Err(parse_error(1, format!("{what} must be positive"))),
        Ok(v) => Ok(v),
        Err(_) => Err(parse_error(1, format!("{what} `{token}` is not a positive integer"))),
    }
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_error(1, "empty matrix file"))?;
    let mut tokens = header.split_whitespace();
    let m = parse_dim(tokens.next(), "row count")?;
    let n = parse_dim(tokens.next(), "column count")?;
    if tokens.next().is_some() {
        return Err(parse_error(1, "header must be `m n`"));
    }
    let total = m.checked_mul(n).ok_or_else(|| parse_error(1, format!("{m}x{n} entries overflow")))?;
    let mut data = Vec::with_capacity(total.min(MAX_PREALLOCATED_ENTRIES));

    for row in 0..m {
        let line_no = row + 2;
        let (_, line) = lines.next().ok_or_else(|| parse_error(line_no, format!("expected {m} rows, found {row}")))?;
        let before = data.len();
        for token in line.split_whitespace() {
            if data.len() - before == n {
                return Err(parse_error(line_no, format!("more than {n} values")));
            }
            let value: f64 = token.parse().map_err(|_| parse_error(line_no, format!("`{token}` is not a number")))?;
            if !value.is_finite() {
                return Err(parse_error(line_no, format!("`{token}` is not finite")));
            }
            data.push(value);
        }
        let found = data.len() - before;
        if found != n {
            return Err(parse_error(line_no, format!("expected {n} values, found {found}")));
        }
    }
    if let Some((line_no, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_error(line_no, format!("unexpected content after {m} rows")));
    }
    DenseMatrix::new(m, n, data)
}

/// Entries use the shortest representation that reads back to the same
/// `f64`, so the round trip is exact.
pub fn render_matrix(a: &DenseMatrix) -> String {
    let mut out = String::with_capacity(a.rows() * a.cols() * 3 + 16);
    let _ = writeln!(out, "{} {}", a.rows(), a.cols());
    for row in a.row_iter() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn write_matrix(a: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_matrix(a))?;
    Ok(())
}

pub fn parse_coloring(text: &str) -> Result<Coloring> {
    let mut content = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (index, line) = content.next().ok_or_else(|| parse_error(1, "empty coloring file"))?;
    if let Some((extra, _)) = content.next() {
        return Err(parse_error(extra + 1, "a coloring is a single line"));
    }
    let line_no = index + 1;
    let signs = line
        .split_whitespace()
        .map(|t| match t {
            "1" => Ok(1),
            "-1" => Ok(-1),
            _ => Err(parse_error(line_no, format!("entry `{t}` is not -1 or 1"))),
        })
        .collect::<Result<Vec<i8>>>()?;
    Coloring::new(signs)
}

pub fn render_coloring(x: &Coloring) -> String {
    let mut out = x.signs().iter().map(i8::to_string).collect::<Vec<_>>().join(" ");
    out.push('\n');
    out
}

pub fn read_coloring(path: impl AsRef<Path>) -> Result<Coloring> {
    parse_coloring(&fs::read_to_string(path)?)
}

pub fn write_coloring(x: &Coloring, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_coloring(x))?;
    Ok(())
}
