//! Small modelling layer over [`ConicProblem`].

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::ipm::solve_with;
use crate::problem::{Cone, ConicProblem, ConicSolution, ProblemError, SolverSettings};
use crate::svec::svec_len;

/// Handle to one scalar decision variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// `constant + Σ coeff · var`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Affine {
    pub terms: Vec<(Var, f64)>,
    pub constant: f64,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn term(v: Var, coeff: f64) -> Self {
        Self { terms: vec![(v, coeff)], constant: 0.0 }
    }

    pub fn add_term(&mut self, v: Var, coeff: f64) {
        self.terms.push((v, coeff));
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.constant + self.terms.iter().map(|(v, c)| c * x[v.0]).sum::<f64>()
    }
}

impl From<Var> for Affine {
    fn from(v: Var) -> Self {
        Affine::term(v, 1.0)
    }
}

impl From<f64> for Affine {
    fn from(c: f64) -> Self {
        Affine::constant(c)
    }
}

impl<T: Into<Affine>> Add<T> for Affine {
    type Output = Affine;
    fn add(mut self, rhs: T) -> Affine {
        self += rhs;
        self
    }
}

impl<T: Into<Affine>> AddAssign<T> for Affine {
    fn add_assign(&mut self, rhs: T) {
        let rhs = rhs.into();
        self.terms.extend(rhs.terms);
        self.constant += rhs.constant;
    }
}

impl<T: Into<Affine>> Sub<T> for Affine {
    type Output = Affine;
    fn sub(self, rhs: T) -> Affine {
        self + (-rhs.into())
    }
}

impl Neg for Affine {
    type Output = Affine;
    fn neg(self) -> Affine {
        self * -1.0
    }
}

impl Mul<f64> for Affine {
    type Output = Affine;
    fn mul(mut self, k: f64) -> Affine {
        self.terms.iter_mut().for_each(|(_, c)| *c *= k);
        self.constant *= k;
        self
    }
}

impl Mul<f64> for Var {
    type Output = Affine;
    fn mul(self, k: f64) -> Affine {
        Affine::term(self, k)
    }
}

impl<T: Into<Affine>> Add<T> for Var {
    type Output = Affine;
    fn add(self, rhs: T) -> Affine {
        Affine::from(self) + rhs
    }
}

impl<T: Into<Affine>> Sub<T> for Var {
    type Output = Affine;
    fn sub(self, rhs: T) -> Affine {
        Affine::from(self) - rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sense {
    Minimize,
    Maximize,
}

/// Accumulates variables and constraints, then emits a [`ConicProblem`].
#[derive(Debug, Clone)]
pub struct ProblemBuilder {
    n_vars: usize,
    eqs: Vec<Affine>,
    cones: Vec<(Cone, Vec<Affine>)>,
    objective: Affine,
    sense: Sense,
}

impl Default for ProblemBuilder {
    fn default() -> Self {
        Self::new()
    }
}

/// Solution of a built problem, in the builder's objective sense.
#[derive(Debug, Clone)]
pub struct BuiltSolution {
    pub raw: ConicSolution,
    /// Objective value including its constant, in the requested sense.
    pub objective: f64,
}

impl BuiltSolution {
    pub fn value(&self, v: Var) -> f64 {
        self.raw.x[v.0]
    }

    pub fn eval(&self, a: &Affine) -> f64 {
        a.eval(&self.raw.x)
    }
}

impl ProblemBuilder {
    pub fn new() -> Self {
        Self {
            n_vars: 0,
            eqs: Vec::new(),
            cones: Vec::new(),
            objective: Affine::default(),
            sense: Sense::Minimize,
        }
    }

    pub fn var(&mut self) -> Var {
        self.n_vars += 1;
        Var(self.n_vars - 1)
    }

    pub fn vars(&mut self, count: usize) -> Vec<Var> {
        (0..count).map(|_| self.var()).collect()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// `expr = 0`.
    pub fn eq(&mut self, expr: impl Into<Affine>) {
        self.eqs.push(expr.into());
    }

    /// `expr >= 0`.
    pub fn nonneg(&mut self, expr: impl Into<Affine>) {
        self.cones.push((Cone::NonNeg(1), vec![expr.into()]));
    }

    /// `lhs <= rhs`.
    pub fn le(&mut self, lhs: impl Into<Affine>, rhs: impl Into<Affine>) {
        self.nonneg(rhs.into() - lhs.into());
    }

    /// `head >= ||tail||`.
    pub fn soc(&mut self, head: impl Into<Affine>, tail: Vec<Affine>) {
        let mut rows = Vec::with_capacity(tail.len() + 1);
        rows.push(head.into());
        rows.extend(tail);
        self.cones.push((Cone::SecondOrder(rows.len()), rows));
    }

    /// Symmetric matrix with entries `entry(i, j)` (read for `i >= j`) is PSD.
    pub fn psd(&mut self, side: usize, mut entry: impl FnMut(usize, usize) -> Affine) {
        let mut rows = Vec::with_capacity(svec_len(side));
        for j in 0..side {
            for i in j..side {
                let e = entry(i, j);
                rows.push(if i == j { e } else { e * std::f64::consts::SQRT_2 });
            }
        }
        self.cones.push((Cone::Psd(side), rows));
    }

    pub fn minimize(&mut self, obj: impl Into<Affine>) {
        self.objective = obj.into();
        self.sense = Sense::Minimize;
    }

    pub fn maximize(&mut self, obj: impl Into<Affine>) {
        self.objective = obj.into();
        self.sense = Sense::Maximize;
    }

    pub fn build(&self) -> ConicProblem {
        let n = self.n_vars;
        let sign = match self.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut c = DVector::zeros(n);
        for (v, k) in &self.objective.terms {
            c[v.0] += sign * k;
        }
        let mut a = DMatrix::zeros(self.eqs.len(), n);
        let mut b = DVector::zeros(self.eqs.len());
        for (r, e) in self.eqs.iter().enumerate() {
            for (v, k) in &e.terms {
                a[(r, v.0)] += k;
            }
            b[r] = -e.constant;
        }
        let m: usize = self.cones.iter().map(|(_, rows)| rows.len()).sum();
        let mut g = DMatrix::zeros(m, n);
        let mut h = DVector::zeros(m);
        let mut r = 0;
        for (_, rows) in &self.cones {
            for e in rows {
                for (v, k) in &e.terms {
                    g[(r, v.0)] -= k;
                }
                h[r] = e.constant;
                r += 1;
            }
        }
        // Merge consecutive scalar nonneg rows into one block.
        let mut cones: Vec<Cone> = Vec::new();
        for (cone, _) in &self.cones {
            match (cones.last_mut(), cone) {
                (Some(Cone::NonNeg(d)), Cone::NonNeg(e)) => *d += e,
                _ => cones.push(*cone),
            }
        }
        ConicProblem { c, a, b, g, h, cones }
    }

    pub fn solve(&self) -> Result<BuiltSolution, ProblemError> {
        self.solve_with(&SolverSettings::default())
    }

    pub fn solve_with(&self, settings: &SolverSettings) -> Result<BuiltSolution, ProblemError> {
        let raw = solve_with(&self.build(), settings)?;
        let objective = self.objective.eval(&raw.x);
        Ok(BuiltSolution { raw, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturated_trace() {
        // max Tr(W) s.t. Tr(W) <= 3, W ⪰ 0 (2x2)
        let mut pb = ProblemBuilder::new();
        let w = pb.vars(3); // w00, w10, w11
        let tr = Affine::from(w[0]) + w[2];
        pb.le(tr.clone(), 3.0);
        pb.psd(2, |i, j| Affine::from(w[i + j]));
        pb.maximize(tr);
        let sol = pb.solve().unwrap();
        assert!(sol.raw.is_optimal(), "{:?}", sol.raw.status);
        assert!((sol.objective - 3.0).abs() < 1e-6);
    }

    #[test]
    fn soc_distance() {
        // min t s.t. t >= ||(x - 3, y + 4)||, x <= 0
        let mut pb = ProblemBuilder::new();
        let (t, x, y) = (pb.var(), pb.var(), pb.var());
        pb.soc(t, vec![Affine::from(x) - 3.0, Affine::from(y) + 4.0]);
        pb.le(x, 0.0);
        pb.minimize(t);
        let sol = pb.solve().unwrap();
        assert!(sol.raw.is_optimal());
        assert!((sol.objective - 3.0).abs() < 1e-6);
        assert!(sol.value(x).abs() < 1e-5 && (sol.value(y) + 4.0).abs() < 1e-5);
    }
}
