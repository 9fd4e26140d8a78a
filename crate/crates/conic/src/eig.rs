use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct EigPair {
    pub value: f64,
    /// Unit-norm eigenvector.
    pub vector: DVector<Complex64>,
}

/// Largest eigenvalue of the Hermitian part of `m` with a unit eigenvector.
///
/// Ties pick an arbitrary maximizing vector. The phase is normalized so the
/// largest-magnitude component is real and positive.
pub fn max_eigpair(m: &DMatrix<Complex64>) -> EigPair {
    assert!(m.is_square(), "max_eigpair needs a square matrix");
    let n = m.nrows();
    if n == 0 {
        return EigPair { value: f64::NEG_INFINITY, vector: DVector::zeros(0) };
    }
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let (idx, value) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let mut vector: DVector<Complex64> = eig.eigenvectors.column(idx).clone_owned();
    let norm = vector.norm();
    if norm > 0.0 {
        vector /= Complex64::new(norm, 0.0);
    }
    let pivot = vector
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        vector *= phase;
    }
    EigPair { value, vector }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(3.0), c(2.0)]));
        let p = max_eigpair(&m);
        assert!((p.value - 3.0).abs() < 1e-12);
        assert!((p.vector[1] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn rank_one() {
        let u = DVector::from_vec(vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, -2.0)]);
        let m = &u * u.adjoint();
        let p = max_eigpair(&m);
        assert!((p.value - u.norm_squared()).abs() < 1e-12);
        // aligned with u up to phase
        let overlap = (u.adjoint() * &p.vector)[0].norm();
        assert!((overlap - u.norm()).abs() < 1e-12);
    }
}
