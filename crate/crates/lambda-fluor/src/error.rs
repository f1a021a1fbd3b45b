//! Error type shared across the crate.

use thiserror::Error;

/// All failure modes of the library, split into configuration-level
/// problems (rejected inputs) and numerical problems (the computation
/// itself broke down).
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter violates its invariants.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// A configuration file or command-line option could not be used.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Requested integrator step exceeds the stability bound.
    #[error("time step {dt} exceeds stability bound {max_dt}")]
    StepSize { dt: f64, max_dt: f64 },

    /// A closed-form expression was evaluated outside the symmetric
    /// regime (equal decay rates and equal Rabi frequencies) it holds in.
    #[error("symmetric-regime formula used with asymmetric parameters: {0}")]
    AsymmetricRegime(String),

    /// The optimal-detuning radicand is negative (drive too weak).
    #[error("no real optimal detuning: radicand {radicand} is negative")]
    NoRealOptimum { radicand: f64 },

    /// Upper-level population too small to normalize a spectrum.
    #[error("no fluorescence: steady-state upper population {rho_aa:e} is below {threshold:e}")]
    NoFluorescence { rho_aa: f64, threshold: f64 },

    /// A frequency grid does not cover or resolve the spectrum.
    #[error("grid coverage: {0}")]
    GridCoverage(String),

    /// Peak measurement could not isolate a narrow central feature.
    #[error("no isolated narrow peak: {0}")]
    NoIsolatedNarrowPeak(String),

    /// A solve or integration failed; carries diagnostics.
    #[error("numerical failure in {context}: {details}")]
    NumericalFailure { context: String, details: String },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code the command-line front end maps this error to:
    /// 2 for configuration errors, 3 for numerical errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::InvalidConfig(_)
            | Error::StepSize { .. }
            | Error::AsymmetricRegime(_)
            | Error::GridCoverage(_)
            | Error::Io(_) => 2,
            Error::NoRealOptimum { .. }
            | Error::NoFluorescence { .. }
            | Error::NoIsolatedNarrowPeak(_)
            | Error::NumericalFailure { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
