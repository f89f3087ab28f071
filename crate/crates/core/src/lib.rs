//! Approximate arithmetic operators built by selective LUT removal, their
//! characterization, and configuration supersampling across bit widths to
//! steer a multi-objective genetic search.
//!
//! The pipeline, module by module:
//!
//! 1. [`operator`]: accurate netlists and configurations that remove LUTs.
//! 2. [`characterize`]: behavioral error and proxy hardware cost per configuration.
//! 3. [`stats`]: scaling, distances, clustering and trend analysis.
//! 4. [`matching`]: nearest-neighbor pairing of low- and high-width designs.
//! 5. [`forest`]: random forests for supersampling and metric estimation.
//! 6. [`conss`]: configuration supersampling under scaled constraints.
//! 7. [`dse`]: Pareto fronts, hypervolume and the seeded genetic search.

pub mod characterize;
pub mod conss;
pub mod dse;
pub mod error;
pub mod forest;
pub mod matching;
pub mod operator;
pub mod rng;
pub mod stats;
pub(crate) mod table;

pub use error::{Error, Result};
pub use operator::{enumerate_configs, AxoConfig, Family, OperatorKind, OperatorNetlist, Simulator};
