use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LiftError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix of side {0} is not a real lift")]
    OddSide(usize),
}

/// Real symmetric embedding `[[Re M, -Im M], [Im M, Re M]]` of a Hermitian `M`.
///
/// Eigenvalues of the lift are those of `M`, each twice, so PSD-ness is
/// preserved and traces double.
pub fn hermitian_lift(m: &DMatrix<Complex64>) -> Result<DMatrix<f64>, LiftError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(LiftError::NotSquare { rows, cols });
    }
    let n = rows;
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let deviation = (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if deviation > 1e-10 * scale {
        return Err(LiftError::NotHermitian { deviation });
    }
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            // average with the adjoint so the lift is exactly symmetric
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = v.re;
            out[(n + i, n + j)] = v.re;
            out[(n + i, j)] = v.im;
            out[(i, n + j)] = -v.im;
        }
    }
    Ok(out)
}

/// Inverse of [`hermitian_lift`], tolerant of lifts that are only
/// approximately block-structured (blocks are averaged).
pub fn hermitian_unlift(l: &DMatrix<f64>) -> Result<DMatrix<Complex64>, LiftError> {
    let (rows, cols) = l.shape();
    if rows != cols {
        return Err(LiftError::NotSquare { rows, cols });
    }
    if rows % 2 != 0 {
        return Err(LiftError::OddSide(rows));
    }
    let n = rows / 2;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (l[(i, j)] + l[(n + i, n + j)]);
        let im = 0.5 * (l[(n + i, j)] - l[(i, n + j)]);
        Complex64::new(re, im)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_lifts_to_identity() {
        let m = DMatrix::<Complex64>::identity(2, 2);
        assert_eq!(hermitian_lift(&m).unwrap(), DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
        ]);
        assert!(matches!(hermitian_lift(&m), Err(LiftError::NotHermitian { .. })));
    }

    #[test]
    fn unlift_inverts_lift() {
        let m = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(2.0, 0.0),
            Complex64::new(0.5, -1.5),
            Complex64::new(0.5, 1.5),
            Complex64::new(-1.0, 0.0),
        ]);
        let back = hermitian_unlift(&hermitian_lift(&m).unwrap()).unwrap();
        assert!((back - m).norm() < 1e-15);
    }
}
