//! Maximal flows and minimal cutsets in first passage percolation on the
//! cubic lattice.
//!
//! Edges of `Z^d` carry i.i.d. nonnegative capacities. The crate computes
//! exact maximal flows through cylinders, the flow from a dilated convex
//! body to "infinity" (a certified truncation of it), Monte Carlo estimates
//! of the flow constant and of polytope surface energies, and statistics of
//! minimal cutsets.

pub mod config;
pub mod error;
pub mod estimators;
pub mod functionals;
pub mod geometry;
pub mod law;
pub mod lattice;
pub mod maxflow;
pub mod rng;
pub mod runner;

pub use error::Error;
pub use law::{CapacityLaw, ValidationReport};
pub use lattice::{CapacityField, Environment, LatticeEdge, LatticeRegion};
pub use maxflow::{Cutset, FlowProblem, MaxFlowResult};
