//! Solvers for single-SKU order-fulfillment networks.
//!
//! The crate models networks of demand nodes and fulfillment centers (FCs)
//! joined by a travel-time metric, and computes:
//!
//! - minimum-cost assignments of demand to FCs (exact integer transportation
//!   solver plus an exhaustive oracle for small instances),
//! - equilibrium backlogs and delays for greedy fulfillment, via shortest
//!   paths on the residual graph of a minimum-cost assignment,
//! - regionalized solutions: per-FC partitions, scale decompositions on line
//!   and Euclidean metrics with provable delay bounds, and exhaustive search
//!   over FC groupings,
//! - a discrete-time fluid simulation of the greedy dynamics, for comparing
//!   converged backlogs against the static equilibrium.
//!
//! All arithmetic on distances, backlogs, and delays is exact scaled-integer
//! arithmetic; see [`quantity`].

pub mod assignment;
pub mod dynamics;
pub mod equilibrium;
pub mod export;
pub mod generators;
pub mod instance;
pub mod quantity;
pub mod regionalize;

pub use instance::{load_instance, save_instance, Instance, Metric, TreeMetric};
pub use quantity::{Quantity, DEFAULT_SCALE};
