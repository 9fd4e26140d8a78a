//! Hermitian matrix variables for the conic builder.

use fasopt_conic::{Affine, BuiltSolution, ProblemBuilder, Var};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// An `N × N` Hermitian PSD matrix variable, either free (with the PSD
/// constraint imposed through the real `2N` lift) or pinned to the ray
/// `c·uu^H`, `c ≥ 0`.
#[derive(Debug, Clone)]
pub(crate) enum MatrixVar {
    Full { side: usize, vars: Vec<Var> },
    Ray { direction: DVector<Complex64>, scale: Var },
}

impl MatrixVar {
    pub(crate) fn full(b: &mut ProblemBuilder, side: usize) -> Self {
        let vars = b.vars(side * side);
        let m = MatrixVar::Full { side, vars };
        b.psd(2 * side, |i, j| m.lifted_entry(i, j));
        m
    }

    pub(crate) fn ray(b: &mut ProblemBuilder, direction: DVector<Complex64>) -> Self {
        let scale = b.var();
        b.nonneg(scale);
        MatrixVar::Ray { direction, scale }
    }

    /// Variable holding `Re W[i][j]` and `Im W[i][j]` for `i > j`.
    fn off_diagonal(vars: &[Var], side: usize, i: usize, j: usize) -> (Var, Var) {
        let pair = i * (i - 1) / 2 + j;
        (vars[side + 2 * pair], vars[side + 2 * pair + 1])
    }

    fn re(&self, i: usize, j: usize) -> Affine {
        let MatrixVar::Full { side, vars } = self else { unreachable!() };
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => vars[i].into(),
            std::cmp::Ordering::Greater => Self::off_diagonal(vars, *side, i, j).0.into(),
            std::cmp::Ordering::Less => Self::off_diagonal(vars, *side, j, i).0.into(),
        }
    }

    fn im(&self, i: usize, j: usize) -> Affine {
        let MatrixVar::Full { side, vars } = self else { unreachable!() };
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => Affine::constant(0.0),
            std::cmp::Ordering::Greater => Self::off_diagonal(vars, *side, i, j).1.into(),
            std::cmp::Ordering::Less => -Affine::from(Self::off_diagonal(vars, *side, j, i).1),
        }
    }

    /// Lower-triangle entry of `[[Re W, -Im W], [Im W, Re W]]`.
    fn lifted_entry(&self, i: usize, j: usize) -> Affine {
        let MatrixVar::Full { side, .. } = self else { unreachable!() };
        let n = *side;
        match (i < n, j < n) {
            (true, true) => self.re(i, j),
            (false, true) => self.im(i - n, j),
            (false, false) => self.re(i - n, j - n),
            (true, false) => unreachable!("upper triangle requested"),
        }
    }

    /// `Re Tr(M W)` for Hermitian `M`.
    pub(crate) fn trace_with(&self, m: &DMatrix<Complex64>) -> Affine {
        match self {
            MatrixVar::Full { side, vars } => {
                let mut out = Affine::constant(0.0);
                for i in 0..*side {
                    out.add_term(vars[i], m[(i, i)].re);
                    for j in 0..i {
                        let (r, q) = Self::off_diagonal(vars, *side, i, j);
                        out.add_term(r, 2.0 * m[(i, j)].re);
                        out.add_term(q, 2.0 * m[(i, j)].im);
                    }
                }
                out
            }
            MatrixVar::Ray { direction, scale } => {
                Affine::term(*scale, (direction.adjoint() * m * direction)[0].re)
            }
        }
    }

    pub(crate) fn trace(&self) -> Affine {
        match self {
            MatrixVar::Full { side, vars } => {
                let mut out = Affine::constant(0.0);
                for v in &vars[..*side] {
                    out.add_term(*v, 1.0);
                }
                out
            }
            MatrixVar::Ray { direction, scale } => Affine::term(*scale, direction.norm_squared()),
        }
    }

    /// `u^H W u`.
    pub(crate) fn quadratic(&self, u: &DVector<Complex64>) -> Affine {
        self.trace_with(&(u * u.adjoint()))
    }

    pub(crate) fn value(&self, sol: &BuiltSolution) -> DMatrix<Complex64> {
        match self {
            MatrixVar::Full { side, vars } => {
                let n = *side;
                let mut w = DMatrix::zeros(n, n);
                for i in 0..n {
                    w[(i, i)] = Complex64::new(sol.value(vars[i]), 0.0);
                    for j in 0..i {
                        let (r, q) = Self::off_diagonal(vars, n, i, j);
                        let z = Complex64::new(sol.value(r), sol.value(q));
                        w[(i, j)] = z;
                        w[(j, i)] = z.conj();
                    }
                }
                w
            }
            MatrixVar::Ray { direction, scale } => direction * direction.adjoint() * Complex64::new(sol.value(*scale).max(0.0), 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fasopt_conic::hermitian_lift;

    fn sample(n: usize) -> DMatrix<Complex64> {
        let a = DMatrix::from_fn(n, n, |i, j| Complex64::new((i as f64 + 1.0) * 0.3 - j as f64 * 0.2, (i * j) as f64 * 0.1 - 0.15));
        &a * a.adjoint()
    }

    #[test]
    fn maximizing_trace_with_recovers_top_eigenvalue() {
        let m = sample(3);
        let mut b = ProblemBuilder::new();
        let w = MatrixVar::full(&mut b, 3);
        b.le(w.trace(), 1.0);
        b.maximize(w.trace_with(&m));
        let sol = b.solve().unwrap();
        let top = fasopt_conic::max_eigpair(&m).value;
        assert!((sol.objective - top).abs() < 1e-6 * top);
        let wv = w.value(&sol);
        let herm = (&wv - wv.adjoint()).norm();
        assert!(herm < 1e-12);
        // lifted value is PSD up to solver tolerance
        let lifted = hermitian_lift(&wv).unwrap();
        assert!(lifted.symmetric_eigen().eigenvalues.min() > -1e-7);
    }

    #[test]
    fn trace_with_matches_direct_product() {
        let m = sample(4);
        let target = sample(4) * Complex64::new(0.5, 0.0) + DMatrix::identity(4, 4);
        // pin every variable to the target through equality constraints
        let mut b = ProblemBuilder::new();
        let w = MatrixVar::full(&mut b, 4);
        for i in 0..4 {
            for j in 0..=i {
                b.eq(w.re(i, j) - target[(i, j)].re);
                if i != j {
                    b.eq(w.im(i, j) - target[(i, j)].im);
                }
            }
        }
        b.minimize(w.trace());
        let sol = b.solve().unwrap();
        let direct = (&m * &target).trace().re;
        assert!((sol.eval(&w.trace_with(&m)) - direct).abs() < 1e-6 * direct.abs());
        assert!((w.value(&sol) - &target).norm() < 1e-6);
    }
}
