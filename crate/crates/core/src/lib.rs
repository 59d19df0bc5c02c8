//! Strong-faithfulness tools for linear Gaussian DAG models.
//!
//! The crate computes exact partial covariance polynomials in the edge
//! weights, classifies conditional independence triples by d-separation,
//! estimates the relative volume of (restricted / adjacency) λ-strong-unfaithful
//! weight vectors by Monte Carlo, and evaluates closed-form lower bounds for
//! trees, cycles and `K_{2,p-2}`.
//!
//! Vertices are 0-based in the API and 1-based in every text format.

pub mod audit;
pub mod bounds;
pub mod error;
pub mod format;
pub mod graph;
pub mod linalg;
pub mod poly;
pub mod ponstein;
pub mod sem;
pub mod structure;
pub mod symbolic;
pub mod verify;
pub mod volume;
pub mod vset;

pub use error::{Error, Result};
pub use graph::{Dag, Triple, TripleMode};
pub use poly::SparsePoly;
pub use sem::{GaussianModel, Weights};
pub use vset::VertexSet;
