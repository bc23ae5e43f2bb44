//! Exact analysis of finite random walks on a state space split into three
//! pieces `A`, `B` and `C`.
//!
//! The walk is stopped on entering `C`. The crate computes truncated Green's
//! functions, hitting distributions, expected hitting times and the
//! A/B excursion probabilities exactly, evaluates the excursion bounds that
//! relate `G_{A∪B}` to `G_A`, `G_B` and `E(T_C)` to `E(T_{B∪C})`,
//! `E(T_{A∪C})`, and cross-checks everything against a seeded Monte Carlo
//! oracle.
//!
//! ```
//! use tripwalk::{generators, exact};
//!
//! let (chain, partition) = generators::triad();
//! let stats = exact::excursion_stats(&chain, &partition).unwrap();
//! assert!((stats.rho[&0] - 0.25).abs() < 1e-12);
//! ```

pub mod bounds;
pub mod chain;
pub mod document;
pub mod error;
pub mod exact;
pub mod generators;
pub mod monte_carlo;
pub mod solver;

pub use bounds::{BoundReport, BoundsContext, ClassPair, Quantity, SeparationReport};
pub use chain::{
    build_chain, build_partition, validate_absorption, Chain, Class, Partition, ReachabilityReport,
    StateSet, StoppingSpec,
};
pub use document::ChainDocument;
pub use error::{Error, Result};
pub use exact::{ExcursionStats, GreensMatrix, HitTimeVector, HittingDist};
pub use monte_carlo::{SimConfig, SimulationEstimate, Trajectory, Verdict};
pub use solver::DomainSolver;
