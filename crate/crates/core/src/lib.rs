//! Symbolic and numeric toolkit for Monge parameterizations of the
//! two-input control system
//!
//! ```text
//! z' = h(x, y, z, lam) + g(x, y, z, lam) x',   lam = y' - z x'
//! ```
//!
//! The crate computes the invariants S, T, J, classifies systems, generates
//! the PDE systems whose regular solutions produce parameterizations, checks
//! candidate solutions, builds and verifies parameterizations and flat
//! outputs, and cross-checks all of it with an ODE-integration oracle.

pub mod error;
pub mod forms;
pub mod jets;
pub mod numeric;
pub mod oracle;
pub mod param;
pub mod pde;
pub mod scalar;
pub mod symcore;
pub mod system;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use symcore::{ex, DomainBox, Expr, ZeroVerdict};

/// Default seed for every randomized check.
pub const DEFAULT_SEED: u64 = 42;

/// Double-precision scalar used by the numeric layers.
pub type Real = f64;
/// Exact scalar used by the symbolic layers.
pub type Exact = num_rational::BigRational;
