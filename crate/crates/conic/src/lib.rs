//! Dense primal-dual interior-point solver for small cone programs.
//!
//! Problems are posed in the standard form
//!
//! ```text
//! minimize    c'x
//! subject to  A x = b
//!             h - G x ∈ K
//! ```
//!
//! where `K` is a product of free, nonnegative, second-order and positive
//! semidefinite cones. The solver runs a Mehrotra predictor-corrector method on
//! the homogeneous self-dual embedding with Nesterov-Todd scaling, so
//! infeasibility and unboundedness are reported from certificates rather than
//! residual heuristics.
//!
//! Complex Hermitian matrix blocks are handled through [`hermitian_lift`]; the
//! solver core is real.

mod builder;
pub mod certify;
mod cones;
mod dump;
mod eig;
mod ipm;
mod lift;
mod problem;
pub mod svec;

pub use builder::{Affine, BuiltSolution, ProblemBuilder, Var};
pub use dump::{dump_problem, load_problem, DumpError};
pub use eig::{max_eigpair, EigPair};
pub use ipm::{solve, solve_with};
pub use lift::{hermitian_lift, hermitian_unlift, LiftError};
pub use problem::{Cone, ConicProblem, ConicSolution, ProblemError, SolveStatus, SolverSettings};
