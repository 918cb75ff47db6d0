//! Strong simulation of linear optical circuits with exact and sampled
//! gradients.
//!
//! The crate computes Fock-space amplitudes through matrix permanents,
//! expectation values of normal observables from output distributions, and
//! derivatives of those expectation values with respect to phase parameters.
//! Each derivative is itself an expectation value on a circuit of width
//! `2m + 2` fed with one extra photon, obtained by dilating the
//! number-operator insertion into a unitary.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

pub mod circuits;
pub mod dilation;
pub mod error;
pub mod expectation;
pub mod fock;
pub mod gradient;
pub mod io;
pub mod linalg;
pub mod optimize;
pub mod permanent;
pub mod qpath;
pub mod random;
pub mod scalar;
pub mod tol;

pub use circuits::{
    clements_decompose, clements_layout, universal_interferometer, Gate, MeshDecomposition,
    ParamCircuit, PhaseValue,
};
pub use dilation::{dilate, Dilation};
pub use error::{Error, Result};
pub use expectation::{
    eigen_weight, exact_distribution, expectation, sample, EvalMode, NormalObservable,
    OutputDistribution, ShotRecord,
};
pub use fock::{enumerate_basis, FockBasis, OccupationState};
pub use gradient::{
    build_derivative_circuit, build_m, derivative, gradient, split_at_parameter,
    DerivativeCircuit, GradientReport, PhaseSplit,
};
pub use linalg::{
    diagonalize_normal, psd_sqrt, spectral_norm, svd, unitarity_residual, NormalDecomposition,
    Svd,
};
pub use optimize::{gradient_descent, OptimizationProblem, Termination, Trajectory};
pub use permanent::{amplitude, build_submatrix, permanent, AmplitudeQuery};
pub use qpath::{QPathDiagram, SectorOperator};
pub use scalar::{CMat, Real};

/// Double-precision complex scalar.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix in double precision.
pub type ComplexMatrix = CMat<f64>;
pub type Circuit = ParamCircuit<f64>;
pub type Diagram = QPathDiagram<f64>;
pub type Observable = NormalObservable<f64>;
pub type Dilation64 = Dilation<f64>;
pub type Report = GradientReport<f64>;
