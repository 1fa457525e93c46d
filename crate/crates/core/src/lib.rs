//! Geometry of achievable classifier performance for grouped binary
//! problems, fairness-penalty solvers over that geometry, and detection of
//! cherry-picking in the resulting optima.
//!
//! The core pipeline:
//!
//! 1. [`problem`] represents each sensitive group as a finite score
//!    distribution and evaluates probabilistic decisions on it.
//! 2. [`ips`] computes the achievable `(tnr, tpr)` region of a group as an
//!    exact convex polygon with explicit Pareto frontier.
//! 3. [`metrics`] provides evaluation metrics and group-fairness measures as
//!    closed-form functions of operating points.
//! 4. [`solver`] maximizes `metric - c * fairness` over the product of group
//!    regions on a grid, with frontier sweeps and a brute-force oracle as
//!    independent routes.
//! 5. [`cherrypick`] classifies optima by their distance to the group
//!    frontiers and runs the battery/search experiments built on top.
//! 6. [`generators`] builds synthetic instances, including nested-frontier
//!    adversarial pairs with exactly equal base rates.
//! 7. [`multilabel`] covers the n-label side: confusion-matrix pre-orders
//!    and weighted-argmax partitions of the probability simplex.
//!
//! All numeric code is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix the common double-precision instantiation.

pub mod cherrypick;
pub mod error;
pub mod generators;
pub mod ips;
pub mod json;
pub mod metrics;
pub mod multilabel;
pub mod problem;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases for the main domain types.
pub type ScoreDistribution64 = problem::ScoreDistribution<f64>;
pub type GroupedProblem64 = problem::GroupedProblem<f64>;
pub type AtomDecision64 = problem::AtomDecision<f64>;
pub type IpsGeometry64 = ips::IpsGeometry<f64>;
pub type Point64 = ips::Point<f64>;
pub type GroupStats64 = metrics::GroupStats<f64>;
pub type SolveResult64 = solver::SolveResult<f64>;
pub type ConfusionMatrix64 = multilabel::ConfusionMatrix<f64>;
