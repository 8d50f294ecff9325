//! Invariant spin^r structures and twisted spinors on the homogeneous
//! projective spaces CP^n, HP^n and OP^2.
//!
//! The crate is layered bottom-up:
//!
//! * [`numlin`]: sparse complex vectors and operators, quaternionic matrices,
//!   `B0`, and joint kernels with explicit tolerances.
//! * [`clifford`]: the exterior-forms model of the spin representation,
//!   spin lifts of `so(n)` elements and twisted modules `Σ_n ⊗ Σ_r^{⊗m}`.
//! * [`spaces`]: the four reductive models and their isotropy and auxiliary
//!   actions.
//! * [`connections`]: Nomizu maps, auxiliary curvature and Ricci tensors.
//! * [`spinorcalc`]: invariant spinor spaces, purity, parallelism and
//!   generalised Killing equations.
//! * [`weights`]: root data for `so(9,C)` and `sl(2,C)`, weight spaces,
//!   highest weight censuses and the explicit HP^n and OP^2 spinors.

pub mod clifford;
pub mod connections;
pub mod numlin;
pub mod spaces;
pub mod spinorcalc;
pub mod weights;

pub use num_complex::Complex64 as C64;

/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
