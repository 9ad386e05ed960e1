//! Exact recovery of the rational solution of a polynomial linear system
//! `A(x) y(x) = b(x)` over a prime field from pointwise evaluations, a
//! bounded number of which are erroneous.
//!
//! The decoder sets up Welch-Berlekamp-style key equations
//! `phi_i(alpha_j) = y_{i,j} psi(alpha_j)` under degree truncations and reads
//! the solution off the kernel of a structured Vandermonde system. On top of
//! that sit the evaluation-count bounds (`L_KPSW` for worst-case errors,
//! `L_GLZ` for uniform random errors), four early-termination drivers that
//! adapt the number of evaluations to the actual solution degrees and error
//! counts, an error-injecting node simulator, and a Monte-Carlo harness for
//! the probabilistic guarantees.

pub mod algebra;
pub mod bounds;
pub mod earlyterm;
pub mod errors;
pub mod harness;
pub mod instance;
pub mod keyeq;

pub use algebra::{Degree, Fe, Field, PolyMatrix, PolyVector, Polynomial, ScalarMatrix};
pub use bounds::{DegreeContext, ErrorBudget, Rational};
pub use instance::{GroundTruth, InstanceFile, PLSInstance};
pub use keyeq::{EvaluationTable, KeyEqParams, RationalSolution, SolutionSpace};
