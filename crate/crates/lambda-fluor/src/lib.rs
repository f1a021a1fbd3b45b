//! Resonance fluorescence of a laser-driven three-level Λ atom whose two
//! decay channels interfere through the shared vacuum.
//!
//! The library builds the 8-dimensional linear generator of the optical
//! Bloch equations, solves for steady states (with a time-domain
//! integrator as an independent oracle and fallback at dark-state
//! singularities), computes coherent and incoherent fluorescence spectra
//! through the quantum regression theorem, and extracts the
//! interference-enabled narrow central feature together with its
//! closed-form predictions.
//!
//! The `lambda-fluor` binary exposes the same machinery as a
//! configuration-driven command line tool.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod spectrum;
pub mod validate;

pub use error::{Error, Result};
pub use model::{build_liouvillian, Liouvillian, SystemParams};
