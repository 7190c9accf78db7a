//! Algorithms for tiling 3-uniform hypergraphs with `D = K₄³ − 2e`, the
//! 3-graph formed by two triples on four points.
//!
//! The crate is organised around the route from a minimum-codegree
//! hypothesis to a perfect D-tiling:
//!
//! - [`hypergraph`]: the [`Hypergraph3`] type, D-copies and tiling validation;
//! - [`constructions`]: lower-bound instances, Steiner triple systems and
//!   random test beds;
//! - [`exact`]: exact cover, maximum D-free set and 4-partite matching
//!   solvers used as ground truth and as fallbacks;
//! - [`extremal`]: the staged construction for graphs with a near-extremal
//!   D-free set;
//! - [`absorption`] and [`almost_perfect`]: absorbing families and local
//!   search for the non-extremal case;
//! - [`driver`]: the composition that picks a branch and certifies the result.

pub mod absorption;
pub mod almost_perfect;
pub mod bitset;
pub mod constructions;
pub mod driver;
pub mod error;
pub mod exact;
pub mod extremal;
pub mod format;
pub mod hypergraph;
pub mod rng;

pub use bitset::VertexSet;
pub use constructions::{ConstructionKind, ConstructionSpec};
pub use driver::{solve_driver, DriverParams, Mode, RunReport, Status};
pub use error::{Error, Result};
pub use hypergraph::{validate_tiling, DCopy, Hypergraph3, Tiling, Verdict, Vertex};
