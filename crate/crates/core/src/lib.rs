//! Single-server weakly-private information retrieval (WPIR).
//!
//! A user wants file `m` out of `M` files stored on one server without
//! revealing `m` completely. Every scheme here is a privacy mechanism
//! `P(Q|M)` over subset-queries: the server returns the files named by the
//! query, and the amount the query reveals about `m` is measured by mutual
//! information (MI) or maximal leakage (MaxL).
//!
//! The crate is `no_std` (it needs `alloc`). Probabilities are exact
//! rationals; logarithms are taken in `f64` only at the very end.
//!
//! Layout:
//! - [`mechanism`], [`query`], [`database`]: domain types and their invariants.
//! - [`metrics`]: leakage and download cost of a mechanism.
//! - [`schemes`]: weight-`w`, partition, time-sharing and target-leakage schemes.
//! - [`capacity`]: closed-form capacity curves and lower-bound functions.
//! - [`converse`]: rate-distortion bound, LP optimality certificate, grid oracle.
//! - [`sampling`]: exact inverse-CDF query sampler used by simulations.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod capacity;
pub mod converse;
pub mod database;
pub mod mechanism;
pub mod metrics;
pub mod prob;
pub mod query;
pub mod sampling;
pub mod schemes;

pub use capacity::{CurveKind, CurvePoint, CurveSpec, PiecewiseBound};
pub use database::{Database, DatabaseError};
pub use mechanism::{
    check_retrievability, validate_mechanism, Mechanism, Metric, Query, RetrievabilityError,
    Scheme, TradeoffPoint, Violation,
};
pub use metrics::LeakageReport;
pub use prob::Ratio;
pub use query::SubsetQuery;
pub use schemes::{MixSpec, SchemeError};

/// Largest number of files a mechanism may have: supports are `u64` bitmasks.
pub const MAX_FILES: usize = 63;
