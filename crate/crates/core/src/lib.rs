//! Minimum-error state discrimination in finite-dimensional operational
//! probabilistic theories.
//!
//! The crate realizes the diagram calculus of processes as finite-dimensional
//! real-linear maps, ships three concrete theory models (classical, quantum,
//! and the square-state "gbit" polytope), solves the minimum-error
//! discrimination problem, and implements group symmetrization together with
//! the sequential / LOCC / separable / PT measurement hierarchy on bipartite
//! systems.

pub mod classes;
pub mod discrimination;
pub mod kernel;
pub mod linalg;
pub mod models;
pub mod parallel;
pub mod scenarios;
pub mod simplex;
pub mod symmetry;

pub use linalg::{HermitianMatrix, LinalgError, RealMatrix};
