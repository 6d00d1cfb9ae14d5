//! Separation of variables for the cyclic lattice sine-Gordon model.
//!
//! Every quantity is realized on the dense p^N-dimensional state space so
//! that each closed formula can be compared against a brute-force oracle.
//! The numeric core is generic over [`Real`]; the `*64` aliases at the crate
//! root fix it to double precision, which is what all verification runs use.

pub mod config;
pub mod form_factors;
pub mod laurent;
pub mod linalg;
pub mod local_ops;
pub mod model_core;
pub mod oracle;
pub mod scalar;
pub mod separate_states;
pub mod sov_basis;
pub mod spectrum;

pub use scalar::{Cx, Mat, Real, Vect};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SgError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("operation requires an even chain")]
    OddChain,
    #[error("operation is stated for odd chains only")]
    EvenChain,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("average product is not central (deviation {0:.3e})")]
    NotCentral(f64),
    #[error("B-zeros collide (separation {0:.3e}); perturb xi")]
    SimplicityViolation(f64),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("gauge calibration inconsistent: {0}")]
    GaugeInconsistency(String),
    #[error("singular matrix: {0}")]
    SingularMatrix(String),
    #[error("kappa^4 = 1 makes the v reconstruction degenerate at site {0}")]
    DegenerateKappa(usize),
    #[error("no polynomial Baxter solution at tolerance (smallest ratio {0:.3e})")]
    EmptyNullspace(f64),
    #[error("spectrum incomplete: {found} of {expected} states")]
    IncompleteSpectrum { found: usize, expected: usize },
    #[error("shift operator unavailable: {0}")]
    ShiftUnavailable(String),
    #[error("reference wavefunction component vanishes")]
    ZeroReference,
    #[error("config error: {0}")]
    Config(String),
}

impl SgError {
    /// Process exit code: 2 for bad input, 3 for numerical degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            SgError::InvalidParams(_)
            | SgError::IndexOutOfRange(_)
            | SgError::OddChain
            | SgError::EvenChain
            | SgError::DimensionMismatch(_)
            | SgError::ShiftUnavailable(_)
            | SgError::Config(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, SgError>;

pub type C64 = Cx<f64>;
pub type CMat64 = Mat<f64>;
pub type CVec64 = Vect<f64>;
pub type Model64 = model_core::ModelParams<f64>;
pub type Monodromy64 = model_core::Monodromy<f64>;
pub type SovBasis64 = sov_basis::SovBasis<f64>;
pub type Eigenstate64 = spectrum::TransferEigenstate<f64>;
pub type SeparateState64 = separate_states::SeparateState<f64>;
