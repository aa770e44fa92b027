//! SDP estimators for graph learning problems: community detection in the
//! stochastic block model, signed clustering, angular synchronization and
//! MAX-CUT from a masked graph.
//!
//! The crate covers the whole pipeline: seeded generators with exact
//! expectations and oracles ([`models`]), two SDP solvers ([`solvers`]),
//! rounding and extraction ([`rounding`]), spectral baselines for signed
//! graphs ([`signed`]), metrics, curvature checks and bound evaluators
//! ([`metrics`], [`fixed_point`]), and the experiment harness
//! ([`experiments`]).

pub mod error;
pub mod experiments;
pub mod fixed_point;
pub mod gset;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod rounding;
pub mod signed;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{HermitianMatrix, Scalar, SelfAdjoint, SymmetricMatrix};
