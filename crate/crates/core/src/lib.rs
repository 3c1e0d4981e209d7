//! Exact counting and capacity estimation for two-dimensional constrained codes.
//!
//! Binary codewords on an m x n grid subject to a local hard constraint
//! (no two 1s at certain relative offsets) are exactly the independent sets
//! of a lattice graph.  This crate provides:
//!
//! * exact codeword counting on finite regions (`exactcount`),
//! * self-avoiding-walk trees that preserve single-site marginals (`sawtree`),
//! * branching matrices over walk types whose Perron root bounds the growth
//!   of those trees (`branching`),
//! * spectral certificates of strong spatial mixing (`certify`),
//! * the boundary-to-root recursion for the non-attacking-kings constraint,
//!   whose fixed point is repelling (`nakdynamics`),
//! * conditional-marginal capacity estimation with a stopping rule
//!   (`capacity`).

/// Crate version, exposed so downstream artifacts can record it.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod branching;
pub mod capacity;
pub mod certify;
pub mod exactcount;
pub mod lattice;
pub mod nakdynamics;
pub mod sawtree;

pub use branching::{BranchingMatrix, SpectralResult};
pub use capacity::{CapacityEstimate, CavityInstance};
pub use certify::{Certificate, Threshold, Verdict};
pub use exactcount::{Configuration, CountResult};
pub use lattice::{Constraint, Dir, FiniteRegion, NeighborOrder, Point};
pub use nakdynamics::{FixedPointReport, NakRecursionState};
pub use sawtree::{Graph, SawTree};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("region too large: {0}")]
    RegionTooLarge(String),
    #[error("infeasible fixing: {0}")]
    InfeasibleFixing(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("partition is not lumpable: {0}")]
    NotLumpable(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
