//! Symmetric-matrix vectorization.
//!
//! `svec` stacks the lower triangle column by column and scales off-diagonal
//! entries by √2, so that `svec(X)'svec(Y) = Tr(XY)`.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::SQRT_2;

/// Length of `svec` for an `n×n` matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Side length of the matrix whose `svec` has length `len`, if any.
pub fn side_from_len(len: usize) -> Option<usize> {
    let n = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (n..=n + 1).find(|&k| svec_len(k) == len)
}

/// Position of entry `(i, j)` with `i >= j` inside `svec`.
pub fn svec_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j && i < n);
    j * n - j * j.saturating_sub(1) / 2 + (i - j)
}

pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut out = DVector::zeros(svec_len(n));
    let mut k = 0;
    for j in 0..n {
        out[k] = m[(j, j)];
        k += 1;
        for i in j + 1..n {
            out[k] = SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]);
            k += 1;
        }
    }
    out
}

pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), svec_len(n));
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        m[(j, j)] = v[k];
        k += 1;
        for i in j + 1..n {
            let x = v[k] / SQRT_2;
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_product_matches_trace() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, -0.5, 1.0, 3.0, 0.25, -0.5, 0.25, 1.0]);
        let b = DMatrix::from_row_slice(3, 3, &[1.0, -2.0, 0.0, -2.0, 0.5, 4.0, 0.0, 4.0, -1.0]);
        let lhs = svec(&a).dot(&svec(&b));
        let rhs = (&a * &b).trace();
        assert!((lhs - rhs).abs() < 1e-12);
        assert_eq!(smat(svec(&a).as_slice(), 3), a);
    }

    #[test]
    fn index_layout() {
        let n = 4;
        let mut k = 0;
        for j in 0..n {
            for i in j..n {
                assert_eq!(svec_index(n, i, j), k);
                k += 1;
            }
        }
        assert_eq!(side_from_len(10), Some(4));
        assert_eq!(side_from_len(36), Some(8));
        assert_eq!(side_from_len(7), None);
    }
}
