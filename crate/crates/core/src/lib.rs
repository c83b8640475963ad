//! Counterdiabatic driving of small closed quantum systems, with excess-work
//! energetics and quantum-speed-limit diagnostics.
//!
//! Units: `hbar = 1`; times are inverse energies. Protocols are parametrized
//! by normalized time `s = t / tau` in `[0, 1]`.

pub mod counterdiabatic;
pub mod energetics;
pub mod error;
pub mod harness;
pub mod model;
pub mod operator;
pub mod propagation;
pub mod qsl;

pub use error::{Error, Result};
