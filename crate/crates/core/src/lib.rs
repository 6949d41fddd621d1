//! Vietoris-Rips persistent homology under per-axis scaling.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] - point clouds, scaling transforms, distance matrices and generators.
//! * [`rips`] - clique expansion of the ε-graph into a sorted filtered complex.
//! * [`persistence`] - column reduction over Z/2 and a rank-based Betti oracle.
//! * [`metrics`] - exact bottleneck and p-Wasserstein distances, with brute-force oracles.
//! * [`bounds`] - closed-form scaling-stability bounds and the classical stability reference.
//! * [`harness`] - scenarios, Monte Carlo runs and inequality audits.
//! * [`report`] - JSON / CSV / markdown emission.
//!
//! ```
//! use phscale_core::geometry::{generate_hypercube, distance_matrix};
//! use phscale_core::rips::build_rips;
//! use phscale_core::persistence::compute_persistence;
//!
//! let square = generate_hypercube(2).unwrap();
//! let d = distance_matrix(&square);
//! let complex = build_rips(&d, 2, 2.0).unwrap();
//! let diagrams = compute_persistence(&complex);
//! assert_eq!(diagrams[1].pairs.len(), 1);
//! ```

pub mod assignment;
pub mod bounds;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod matching;
pub mod metrics;
pub mod persistence;
pub mod report;
pub mod rips;
pub mod rng;
pub mod serde_float;

pub use error::{Error, Result};
pub use geometry::{DistanceMatrix, PointCloud, ScalingTransform};
pub use persistence::{Death, PersistenceDiagram, PersistencePair};
pub use rips::{FilteredComplex, Simplex};

/// Slack used by every audit comparison and oracle check.
pub const AUDIT_TOLERANCE: f64 = 1e-9;
