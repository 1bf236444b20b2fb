use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates a precondition; the message names it.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// The band vacuum needs unoccupied negative-energy modes below the band.
    #[error(
        "band vacuum has no headroom: m + delta_Ew = {band_floor} must be below the cutoff \
         energy E_max = {e_max}; raise N or L/N so that E_max > {band_floor}"
    )]
    Headroom { band_floor: f64, e_max: f64 },

    #[error("mode count {0} outside the Fock oracle range 1..=14")]
    ModeCount(usize),

    #[error("wave packet reaches the momentum cutoff: {0}")]
    PacketSupport(String),

    #[error("trajectory has {0} samples; at least 3 uniformly spaced samples are needed")]
    TooFewSamples(usize),

    #[error("gauge kick requires a potential-free reference trajectory")]
    NotPotentialFree,

    /// A numerical invariant that should hold by construction did not.
    #[error("numerical invariant violated: {0}")]
    Invariant(String),
}
