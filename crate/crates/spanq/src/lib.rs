//! Span programs and their conversion to space-efficient quantum algorithms.
//!
//! The crate covers witness computations for (approximate) span programs, an
//! exact simulator of the phase-estimation based decision procedure, the
//! translation from query algorithms and monotone phase-estimation
//! algorithms to span programs and back, and rank-based lower bounds on
//! monotone span program size.

pub mod bounds;
pub mod domain;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod monotone;
pub mod numerics;
pub mod qsim;
pub mod query_alg;
pub mod random;
pub mod span_core;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::TolerancePolicy;
