use thiserror::Error;

use crate::states::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice needs at least 2 sites, got {0}")]
    TooFewSites(usize),

    #[error("{what}: expected {expected} entries, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("site {site} out of range for {num_sites} sites")]
    SiteOutOfRange { site: usize, num_sites: usize },

    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("time must be finite and non-negative, got {0}")]
    InvalidTime(f64),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error(
        "unphysical coherence parameters: eta = {eta} must lie in [{lower}, 1] for alpha = {alpha}"
    )]
    Unphysical { alpha: f64, eta: f64, lower: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(ValidationReport),

    #[error(
        "walk reaches the ring boundary: tau = {tau} needs at least {required} sites, lattice has {num_sites}; enlarge the lattice"
    )]
    WrapAround {
        tau: f64,
        num_sites: usize,
        required: usize,
    },

    #[error("operation needs a uniform periodic ring: {0}")]
    NotUniformRing(&'static str),

    #[error("entanglement cut {cut} must satisfy 0 < cut < {num_sites}")]
    InvalidCut { cut: usize, num_sites: usize },

    #[error("density file: {0}")]
    DensityFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
