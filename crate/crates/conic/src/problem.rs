use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::svec::svec_len;

/// One factor of the product cone `K`, sized in rows of `h - Gx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// Unconstrained rows; dropped before solving.
    Free(usize),
    NonNeg(usize),
    /// `{(t, u) : t >= ||u||}` of total dimension `d`.
    SecondOrder(usize),
    /// Symmetric PSD matrices of the given side, stored with [`crate::svec::svec`].
    Psd(usize),
}

impl Cone {
    pub fn rows(&self) -> usize {
        match *self {
            Cone::Free(d) | Cone::NonNeg(d) | Cone::SecondOrder(d) => d,
            Cone::Psd(n) => svec_len(n),
        }
    }

    /// Barrier degree (rank of the Jordan algebra).
    pub fn degree(&self) -> usize {
        match *self {
            Cone::Free(_) => 0,
            Cone::NonNeg(d) => d,
            Cone::SecondOrder(_) => 1,
            Cone::Psd(n) => n,
        }
    }
}

/// `minimize c'x  s.t.  Ax = b,  h - Gx ∈ K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub cones: Vec<Cone>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("problem has no cone constraints")]
    NoCones,
    #[error("cone {index} is empty")]
    EmptyCone { index: usize },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
}

impl ConicProblem {
    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    pub fn n_eq(&self) -> usize {
        self.b.len()
    }

    pub fn n_cone_rows(&self) -> usize {
        self.h.len()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let n = self.c.len();
        if self.cones.is_empty() {
            return Err(ProblemError::NoCones);
        }
        if self.a.nrows() != self.b.len() || (self.a.nrows() > 0 && self.a.ncols() != n) {
            return Err(ProblemError::Dimension(format!(
                "A is {}x{}, b has {} rows, {} variables",
                self.a.nrows(),
                self.a.ncols(),
                self.b.len(),
                n
            )));
        }
        let rows: usize = self.cones.iter().map(Cone::rows).sum();
        if self.g.nrows() != rows || self.h.len() != rows || self.g.ncols() != n {
            return Err(ProblemError::Dimension(format!(
                "G is {}x{}, h has {} rows, cones need {} rows, {} variables",
                self.g.nrows(),
                self.g.ncols(),
                self.h.len(),
                rows,
                n
            )));
        }
        for (index, cone) in self.cones.iter().enumerate() {
            if cone.rows() == 0 {
                return Err(ProblemError::EmptyCone { index });
            }
        }
        let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
        if !finite(self.c.as_slice()) {
            return Err(ProblemError::NonFinite("c"));
        }
        if !finite(self.a.as_slice()) || !finite(self.b.as_slice()) {
            return Err(ProblemError::NonFinite("A/b"));
        }
        if !finite(self.g.as_slice()) || !finite(self.h.as_slice()) {
            return Err(ProblemError::NonFinite("G/h"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Certificate `(y, z)` with `A'y + G'z = 0`, `b'y + h'z = -1`, `z ∈ K`.
    Infeasible,
    /// Certificate `x` with `c'x = -1`, `Ax = 0`, `-Gx ∈ K`.
    Unbounded,
    MaxIters,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
    pub s: DVector<f64>,
    /// Primal objective `c'x`.
    pub objective: f64,
    /// Dual objective `-b'y - h'z`.
    pub dual_objective: f64,
    /// `||(Ax - b, Gx + s - h)|| / max(1, ||(b, h)||)`.
    pub primal_residual: f64,
    /// `||A'y + G'z + c|| / max(1, ||c||)`.
    pub dual_residual: f64,
    /// Complementarity `s'z`.
    pub gap: f64,
    /// `s'z / max(1, min(|c'x|, |b'y + h'z|))`.
    pub relative_gap: f64,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub max_iters: usize,
    /// Relative primal/dual residual tolerance.
    pub feastol: f64,
    /// Relative duality-gap tolerance.
    pub gaptol: f64,
    /// Fraction of the distance to the boundary taken per step.
    pub step_fraction: f64,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iters: 200,
            feastol: 1e-7,
            gaptol: 1e-6,
            step_fraction: 0.99,
            verbose: false,
        }
    }
}
