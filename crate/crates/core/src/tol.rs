//! Centralized numerical tolerances (double-precision values).
//!
//! Generic code converts these with [`Real::tol`](crate::Real::tol), which
//! floors them relative to the scalar's machine epsilon.

/// Structural checks: unitarity, orthonormality, block recovery.
pub const STRUCTURAL: f64 = 1e-10;

/// Algebraic reconstructions such as `S*S = H` or compositions of operators.
pub const RECONSTRUCTION: f64 = 1e-9;

/// Physics assertions where cancellation is exact in real arithmetic.
pub const EXACT_CANCELLATION: f64 = 1e-12;

/// Accepted unitarity residual for matrices supplied as "unitary" inputs.
pub const UNITARY_INPUT: f64 = 1e-8;

/// Accepted normality residual `||N N^† - N^† N||` (relative to `||N||^2`).
pub const NORMALITY: f64 = 1e-9;

/// Hermiticity tolerance for inputs that must be Hermitian.
pub const HERMITIAN: f64 = 1e-9;

/// Eigenvalues of a PSD input below `-PSD_REJECT` are rejected.
pub const PSD_REJECT: f64 = 1e-8;

/// Eigenvalue clusters closer than this (relative) are treated as degenerate.
pub const CLUSTER: f64 = 1e-8;

/// A spectral norm this close to 1 is snapped to exactly 1 when dilating.
pub const NORM_SNAP: f64 = 1e-12;

/// Negative probabilities above this magnitude indicate a numerical failure.
pub const PROBABILITY_FLOOR: f64 = 1e-14;
