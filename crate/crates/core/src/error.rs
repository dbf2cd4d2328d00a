//! Error types shared across the library.

use thiserror::Error;

/// Errors surfaced by the numeric kernel and the physics layers.
///
/// Degenerate or defective inputs are reported, never silently patched:
/// the biorthogonal framework presumes a complete eigenbasis, and the
/// normalization diverges at exceptional points.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two eigenvalues sit within the resolution tolerance of each other,
    /// or the eigenvector set failed its biorthogonality/completeness check.
    #[error("near-defective matrix: eigenvalue gap {gap:e} within tolerance")]
    NearDefective { gap: f64 },

    /// The left/right pair has (near-)vanishing overlap, so the
    /// 1/sqrt(<l|r>) normalization is undefined.
    #[error("self-orthogonal left/right pair: |<l|r>| = {overlap:e}")]
    SelfOrthogonal { overlap: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Band energy magnitude |d| vanishes; eigenvectors coalesce.
    #[error("exceptional point: |d| = {magnitude:e}")]
    ExceptionalPoint { magnitude: f64 },

    /// The closed-form eigenvector normalization divides by a vanishing
    /// 1 + dz/d component; the alternate gauge must be used.
    #[error("gauge-singular eigenvector component: |1 + dz/d| = {magnitude:e}")]
    GaugeSingular { magnitude: f64 },

    /// The Loschmidt echo vanishes at a sample; phases are undefined there.
    #[error("Loschmidt echo vanishes at t = {t}")]
    EchoZero { t: f64 },

    /// A momentum grid point sits on a zero of the mode partition function.
    #[error("log singularity: partition function vanishes at k = {k}")]
    LogSingular { k: f64 },

    /// kappa = -1 makes the Fisher-zero branch formula degenerate.
    #[error("degenerate overlap ratio (kappa = -1) at k = {k}")]
    DegenerateRatio { k: f64 },

    /// The mode does not satisfy the unit-modulus criticality condition.
    #[error("mode is not critical: modulus condition violated by {deviation:e}")]
    NotCritical { deviation: f64 },

    /// Phase unwrapping could not resolve an adjacent-sample jump even
    /// after local grid refinement.
    #[error("phase unwrapping failed near k = {k}: residual jump {jump:e}")]
    Unwrappable { k: f64, jump: f64 },

    #[error("non-finite value in input")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, Error>;
