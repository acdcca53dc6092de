//! Secrecy-capacity bounds for indoor visible-light wiretap channels.
//!
//! The crate evaluates closed-form lower and upper bounds on the secrecy
//! capacity of a line-of-sight optical intensity channel with Gaussian
//! noise, under either a mean-intensity constraint alone or a mean plus
//! peak constraint. A quadrature-based mutual-information oracle checks
//! the bounds, and the region module maps where an eavesdropper on the
//! floor makes the secrecy capacity vanish.

pub mod avg_bounds;
pub mod commands;
pub mod config;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod peak_bounds;
pub mod quadrature;
pub mod region;
pub mod scenario;

pub use error::{Error, Result};
