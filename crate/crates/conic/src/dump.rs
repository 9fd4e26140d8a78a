//! Plain-text problem capture.
//!
//! ```text
//! conic-problem v1
//! vars <n>
//! eq <p>
//! cones <k>
//! <kind> <size>          (k lines; kind ∈ free | nonneg | soc | psd, psd size = side)
//! c
//! <n values>
//! A
//! <p lines of n values>
//! b
//! <p values>
//! G
//! <m lines of n values>
//! h
//! <m values>
//! ```
//!
//! Values are whitespace-separated decimals written with Rust's shortest
//! round-trip formatting, so `load_problem(dump_problem(p)) == p` exactly.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::problem::{Cone, ConicProblem, ProblemError};

const HEADER: &str = "conic-problem v1";

#[derive(Debug, Error, PartialEq)]
pub enum DumpError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Invalid(#[from] ProblemError),
}

pub fn dump_problem(p: &ConicProblem) -> String {
    let mut out = String::new();
    let n = p.n_vars();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "vars {n}").unwrap();
    writeln!(out, "eq {}", p.n_eq()).unwrap();
    writeln!(out, "cones {}", p.cones.len()).unwrap();
    for cone in &p.cones {
        let (kind, size) = match *cone {
            Cone::Free(d) => ("free", d),
            Cone::NonNeg(d) => ("nonneg", d),
            Cone::SecondOrder(d) => ("soc", d),
            Cone::Psd(s) => ("psd", s),
        };
        writeln!(out, "{kind} {size}").unwrap();
    }
    let row = |out: &mut String, vals: &mut dyn Iterator<Item = f64>| {
        let line: Vec<String> = vals.map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    };
    writeln!(out, "c").unwrap();
    row(&mut out, &mut p.c.iter().copied());
    writeln!(out, "A").unwrap();
    for r in 0..p.a.nrows() {
        row(&mut out, &mut p.a.row(r).iter().copied());
    }
    writeln!(out, "b").unwrap();
    row(&mut out, &mut p.b.iter().copied());
    writeln!(out, "G").unwrap();
    for r in 0..p.g.nrows() {
        row(&mut out, &mut p.g.row(r).iter().copied());
    }
    writeln!(out, "h").unwrap();
    row(&mut out, &mut p.h.iter().copied());
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> DumpError {
        DumpError::Parse { line: self.line, msg: msg.into() }
    }

    fn next(&mut self) -> Result<&'a str, DumpError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim())
            }
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn expect(&mut self, tag: &str) -> Result<(), DumpError> {
        let l = self.next()?;
        if l == tag {
            Ok(())
        } else {
            Err(self.err(format!("expected `{tag}`, found `{l}`")))
        }
    }

    fn keyed(&mut self, key: &str) -> Result<usize, DumpError> {
        let l = self.next()?;
        let mut parts = l.split_whitespace();
        match (parts.next(), parts.next().map(str::parse::<usize>), parts.next()) {
            (Some(k), Some(Ok(v)), None) if k == key => Ok(v),
            _ => Err(self.err(format!("expected `{key} <count>`, found `{l}`"))),
        }
    }

    fn values(&mut self, count: usize) -> Result<Vec<f64>, DumpError> {
        let l = self.next()?;
        let vals: Result<Vec<f64>, _> = l.split_whitespace().map(str::parse::<f64>).collect();
        let vals = vals.map_err(|e| self.err(format!("bad number: {e}")))?;
        if vals.len() != count {
            return Err(self.err(format!("expected {count} values, found {}", vals.len())));
        }
        Ok(vals)
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<DMatrix<f64>, DumpError> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.values(cols)?);
        }
        Ok(DMatrix::from_row_slice(rows, cols, &data))
    }
}

pub fn load_problem(text: &str) -> Result<ConicProblem, DumpError> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    lines.expect(HEADER)?;
    let n = lines.keyed("vars")?;
    let neq = lines.keyed("eq")?;
    let k = lines.keyed("cones")?;
    let mut cones = Vec::with_capacity(k);
    for _ in 0..k {
        let l = lines.next()?;
        let mut parts = l.split_whitespace();
        let kind = parts.next().unwrap_or("");
        let size = parts
            .next()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| lines.err(format!("bad cone line `{l}`")))?;
        cones.push(match kind {
            "free" => Cone::Free(size),
            "nonneg" => Cone::NonNeg(size),
            "soc" => Cone::SecondOrder(size),
            "psd" => Cone::Psd(size),
            other => return Err(lines.err(format!("unknown cone kind `{other}`"))),
        });
    }
    let m: usize = cones.iter().map(Cone::rows).sum();
    lines.expect("c")?;
    let c = DVector::from_vec(lines.values(n)?);
    lines.expect("A")?;
    let a = lines.matrix(neq, n)?;
    lines.expect("b")?;
    let b = DVector::from_vec(lines.values(neq)?);
    lines.expect("G")?;
    let g = lines.matrix(m, n)?;
    lines.expect("h")?;
    let h = DVector::from_vec(lines.values(m)?);
    let p = ConicProblem { c, a, b, g, h, cones };
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let p = ConicProblem {
            c: DVector::from_vec(vec![0.1, -1.0 / 3.0]),
            a: DMatrix::from_row_slice(1, 2, &[1.0, 1e-300]),
            b: DVector::from_vec(vec![2.5]),
            g: DMatrix::from_row_slice(4, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 2.0, std::f64::consts::PI, 0.0]),
            h: DVector::from_vec(vec![0.0, 0.0, 1.0, -7.0]),
            cones: vec![Cone::NonNeg(1), Cone::Free(1), Cone::SecondOrder(2)],
        };
        let text = dump_problem(&p);
        assert_eq!(load_problem(&text).unwrap(), p);
    }

    #[test]
    fn reports_line_of_error() {
        let text = "conic-problem v1\nvars 1\neq 0\ncones 1\ncube 2\n";
        match load_problem(text) {
            Err(DumpError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
