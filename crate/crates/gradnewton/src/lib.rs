//! Newton minimization with an energy-free line search.
//!
//! The solver never evaluates the objective function: the line search is
//! driven entirely by directional derivatives, and an instrumented oracle
//! wrapper proves it by counting evaluations. Alongside the solver:
//!
//! * [`problems`]: analytic fixtures (quadratics, log-sum-exp, the cubic
//!   whose full Newton step always overshoots from the left);
//! * [`conformal`]: a gradient/Hessian oracle for discretely conformal
//!   metrics with prescribed vertex angle sums on a fixed triangulation;
//! * [`diagnostics`]: empirical strong-convexity and Lipschitz bounds along
//!   a trajectory, the damped-phase decrease bound, the full-step threshold,
//!   and convergence-phase classification;
//! * [`trace`]: CSV round-tripping for iteration traces.
//!
//! Inner loops that are data-parallel (multi-start batches, per-face mesh
//! assembly, finite-difference columns) run on rayon under the `parallel`
//! feature (enabled by default) and fall back to sequential code without it;
//! both paths produce bit-identical numbers.

pub mod conformal;
pub mod diagnostics;
pub mod error;
pub mod fdcheck;
pub mod linalg;
pub mod mesh;
pub mod oracle;
mod par;
pub mod problems;
pub mod rng;
pub mod solver;
pub mod trace;

pub use error::{Error, Result};
pub use linalg::ConstraintSpec;
pub use oracle::{
    directional_gradient, gradient_norm, CountingOracle, EvalCounters, GradientVec, HessianMat,
    Objective, Point,
};
pub use solver::{
    line_search, newton_decrement_sq, solve, solve_armijo_baseline, solve_many, solve_many_seq,
    ExitCondition, IterationRecord, SolveResult, SolveStatus, SolverConfig,
};
