//! Matrix-valued spherical analysis on the Euclidean motion groups
//! M_n = SO(n) ⋉ R^n for n = 3, 4.
//!
//! The crate builds the irreducible K-types τ of SO(3) and SO(4) as explicit
//! complex matrices, the branch data of the distinguished invariant operator
//! (eigenvalues λ_{s,τ}, spectral projections, orthogonal polynomials on the
//! branch nodes), matrix spherical functions Φ^τ_{ρ,s} by sphere quadrature,
//! the τ-spherical transform on the embedded two-variable spectrum, and the
//! constructive Schwartz-extension machinery (Vandermonde jet systems with
//! node shifts, cutoff/bump/finite-Borel extension builders).
//!
//! Everything algebraic is double-checked by an exact rational oracle
//! ([`oracle`]), and [`verify`] bundles the full acceptance suite.

pub mod cmatrix;
pub mod numerics;
pub mod reps;
pub mod branch;
pub mod oracle;
pub mod spherical;
pub mod transform;
pub mod extension;
pub mod verify;

use std::sync::OnceLock;

pub use num::complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid K-type: {0}")]
    InvalidTau(String),
    #[error("unsupported quadrature degree: {0}")]
    UnsupportedDegree(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical check failed: {0}")]
    Numerical(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("inconsistent jet: {0}")]
    InconsistentJet(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Initialize the global thread pool, honoring `MOTION_SPHERICAL_THREADS`.
///
/// Safe to call more than once; only the first call configures the pool.
pub fn init_threads() {
    static INIT: OnceLock<()> = OnceLock::new();
    INIT.get_or_init(|| {
        if let Ok(v) = std::env::var("MOTION_SPHERICAL_THREADS") {
            if let Ok(k) = v.trim().parse::<usize>() {
                if k >= 1 {
                    // Ignore failure: a pool may already exist in test harnesses.
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
                }
            }
        }
    });
}
