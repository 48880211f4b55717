//! Proximal-point methods for multiobjective optimization.
//!
//! The crate solves problems of the form "minimize F(x) = (F_1(x), ..., F_m(x))"
//! in the Pareto sense. Each outer iteration fixes a weight vector z on the unit
//! sphere of the nonnegative orthant, scalarizes F against z, adds a proximal
//! quadratic around the current iterate, and minimizes that model subject to the
//! requirement that no objective gets worse. Three variants are provided:
//!
//! - **SPP**: every subproblem is solved to exact grade.
//! - **ISPP**: subproblems may be solved inexactly, with per-iteration error
//!   delta_k controlled by a summable budget.
//! - **CISPP**: convex problems, a single fixed weight, unconstrained proximal
//!   steps with summable error; under a weak-sharpness assumption the iterates
//!   stabilize at a solution in finitely many steps.
//!
//! Supporting pieces: dominance tests, weight normalization, a minimum-norm
//! criticality certificate over the convex hull of the objective gradients,
//! grid-search oracles for validating runs, a small registry of built-in
//! problems, and deterministic text/JSON reporting used by the CLI.

pub mod criticality;
pub mod error;
pub mod inner;
pub mod model;
pub mod outer;
pub mod problems;
pub mod runner;
pub mod scalarization;

mod vecmath;

pub use error::{Error, Result};
pub use model::{dominance, AbsTerm, ConvexityClass, Dominance, ProblemBuilder, ProblemSpec};
pub use outer::{run, run_cispp, run_ispp, run_spp, RunReport, SolverConfig, Termination, Variant};
pub use scalarization::{normalize_weights, scalarize, WeightVector};
