//! QPath diagrams: a matrix together with photons created on, and
//! post-selected from, a trailing block of ancilla modes.
//!
//! A diagram `(A, I, J)` with `A: m + k -> m' + k'` denotes the Fock operator
//! `<J|_anc A |I>_anc`, taking `m` open modes to `m'` open modes. The ancilla
//! block always sits after the open modes; composition stacks ancilla blocks
//! in the order the diagrams were composed.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{sector_basis, FockBasis, OccupationState};
use crate::linalg::{ensure_finite, one, real, zero};
use crate::permanent::amplitude;
use crate::scalar::{cis, CMat, Real};

/// Largest sector dimension the dense oracle will build.
pub const MAX_SECTOR_DIM: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct QPathDiagram<T: Real> {
    matrix: CMat<T>,
    created: OccupationState,
    postselected: OccupationState,
}

impl<T: Real> QPathDiagram<T> {
    pub fn new(
        matrix: CMat<T>,
        created: OccupationState,
        postselected: OccupationState,
    ) -> Result<Self> {
        ensure_finite(&matrix, "diagram matrix")?;
        if created.modes() > matrix.ncols() {
            return Err(Error::DimensionMismatch {
                what: "created ancillas vs matrix columns",
                expected: matrix.ncols(),
                found: created.modes(),
            });
        }
        if postselected.modes() > matrix.nrows() {
            return Err(Error::DimensionMismatch {
                what: "post-selected ancillas vs matrix rows",
                expected: matrix.nrows(),
                found: postselected.modes(),
            });
        }
        Ok(Self {
            matrix,
            created,
            postselected,
        })
    }

    /// Diagram with no ancillas.
    pub fn from_matrix(matrix: CMat<T>) -> Self {
        Self {
            matrix,
            created: OccupationState::zeros(0),
            postselected: OccupationState::zeros(0),
        }
    }

    pub fn identity(modes: usize) -> Self {
        Self::from_matrix(CMat::identity(modes, modes))
    }

    /// Single-mode phase shift `e^{i n theta}`.
    pub fn phase(theta: T) -> Self {
        Self::from_matrix(CMat::from_element(1, 1, cis(theta)))
    }

    /// Two modes merged into one, matrix `(1 1)`.
    pub fn merge() -> Self {
        Self::from_matrix(CMat::from_element(1, 2, one()))
    }

    /// One mode split into two, matrix `(1 1)^T`.
    pub fn split() -> Self {
        Self::from_matrix(CMat::from_element(2, 1, one()))
    }

    /// State `|n>` on a fresh mode (no open inputs, one open output).
    pub fn create(n: usize) -> Result<Self> {
        Self::new(
            CMat::from_element(1, 1, one()),
            OccupationState::new(vec![n])?,
            OccupationState::zeros(0),
        )
    }

    /// Effect `<n|` closing a mode.
    pub fn select(n: usize) -> Result<Self> {
        Self::new(
            CMat::from_element(1, 1, one()),
            OccupationState::zeros(0),
            OccupationState::new(vec![n])?,
        )
    }

    /// Single-mode number operator: matrix `[[1,1],[1,0]]`, one ancilla photon
    /// created and post-selected.
    pub fn number_operator() -> Self {
        let m = CMat::from_row_slice(2, 2, &[one(), one(), one(), zero()]);
        Self {
            matrix: m,
            created: OccupationState::single(1, 0),
            postselected: OccupationState::single(1, 0),
        }
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn created(&self) -> &OccupationState {
        &self.created
    }

    pub fn postselected(&self) -> &OccupationState {
        &self.postselected
    }

    pub fn open_inputs(&self) -> usize {
        self.matrix.ncols() - self.created.modes()
    }

    pub fn open_outputs(&self) -> usize {
        self.matrix.nrows() - self.postselected.modes()
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn compose(&self, next: &QPathDiagram<T>) -> Result<QPathDiagram<T>> {
        let mid = self.open_outputs();
        if mid != next.open_inputs() {
            return Err(Error::DimensionMismatch {
                what: "composition open modes",
                expected: mid,
                found: next.open_inputs(),
            });
        }
        let (m_in, kf_in) = (self.open_inputs(), self.created.modes());
        let kf_out = self.postselected.modes();
        let kg_in = next.created.modes();
        let (m_out, kg_out) = (next.open_outputs(), next.postselected.modes());

        // First stage: self ⊕ 1 on next's ancilla inputs.
        // cols [m_in, kf_in, kg_in] -> rows [mid, kf_out, kg_in]
        let mut first = CMat::zeros(mid + kf_out + kg_in, m_in + kf_in + kg_in);
        first
            .view_mut((0, 0), (mid + kf_out, m_in + kf_in))
            .copy_from(&self.matrix);
        for k in 0..kg_in {
            first[(mid + kf_out + k, m_in + kf_in + k)] = one();
        }

        // Second stage: next on [mid, kg_in], identity on self's ancilla outputs.
        // cols [mid, kf_out, kg_in] -> rows [m_out, kf_out, kg_out]
        let g = &next.matrix;
        let mut second = CMat::zeros(m_out + kf_out + kg_out, mid + kf_out + kg_in);
        let g_row = |r: usize| if r < m_out { r } else { r + kf_out };
        let g_col = |c: usize| if c < mid { c } else { c + kf_out };
        for r in 0..g.nrows() {
            for c in 0..g.ncols() {
                second[(g_row(r), g_col(c))] = g[(r, c)];
            }
        }
        for k in 0..kf_out {
            second[(m_out + k, mid + k)] = one();
        }

        Ok(QPathDiagram {
            matrix: second * first,
            created: self.created.concat(&next.created),
            postselected: self.postselected.concat(&next.postselected),
        })
    }

    /// Parallel composition: open modes of `self` then `other`; ancillas of
    /// `self` then `other`.
    pub fn tensor(&self, other: &QPathDiagram<T>) -> QPathDiagram<T> {
        let (fi, fo) = (self.open_inputs(), self.open_outputs());
        let (gi, go) = (other.open_inputs(), other.open_outputs());
        let (fci, fco) = (self.created.modes(), self.postselected.modes());
        let (gci, gco) = (other.created.modes(), other.postselected.modes());
        let rows = fo + go + fco + gco;
        let cols = fi + gi + fci + gci;
        let mut out = CMat::zeros(rows, cols);
        let f_row = |r: usize| if r < fo { r } else { go + r };
        let f_col = |c: usize| if c < fi { c } else { gi + c };
        let g_row = |r: usize| if r < go { fo + r } else { fo + fco + r };
        let g_col = |c: usize| if c < gi { fi + c } else { fi + fci + c };
        for r in 0..self.matrix.nrows() {
            for c in 0..self.matrix.ncols() {
                out[(f_row(r), f_col(c))] = self.matrix[(r, c)];
            }
        }
        for r in 0..other.matrix.nrows() {
            for c in 0..other.matrix.ncols() {
                out[(g_row(r), g_col(c))] = other.matrix[(r, c)];
            }
        }
        QPathDiagram {
            matrix: out,
            created: self.created.concat(&other.created),
            postselected: self.postselected.concat(&other.postselected),
        }
    }

    /// Hermitian conjugate: adjoint matrix, created and post-selected swapped.
    pub fn dagger(&self) -> QPathDiagram<T> {
        QPathDiagram {
            matrix: self.matrix.adjoint(),
            created: self.postselected.clone(),
            postselected: self.created.clone(),
        }
    }

    /// Multiplies the matrix by a scalar.
    pub fn scaled(&self, z: Complex<T>) -> QPathDiagram<T> {
        QPathDiagram {
            matrix: self.matrix.map(|e| e * z),
            created: self.created.clone(),
            postselected: self.postselected.clone(),
        }
    }

    /// Photons leaving the open outputs when `n` enter the open inputs.
    pub fn output_photons(&self, n: usize) -> Result<usize> {
        (n + self.created.photons())
            .checked_sub(self.postselected.photons())
            .ok_or(Error::NegativePhotons)
    }

    /// `<output| D |input>` for open-mode patterns.
    pub fn amplitude(&self, input: &OccupationState, output: &OccupationState) -> Result<Complex<T>> {
        amplitude(
            &self.matrix,
            &input.concat(&self.created),
            &output.concat(&self.postselected),
        )
    }

    /// Dense matrix of the diagram's operator on the `n`-photon input sector.
    ///
    /// Rows index `Φ(m', n_out)` and columns `Φ(m, n)`, both in canonical order.
    pub fn to_sector_operator(&self, n: usize) -> Result<SectorOperator<T>> {
        let n_out = self.output_photons(n)?;
        let in_basis = sector_basis(self.open_inputs(), n)?;
        let out_basis = sector_basis(self.open_outputs(), n_out)?;
        for dim in [in_basis.len(), out_basis.len()] {
            if dim > MAX_SECTOR_DIM {
                return Err(Error::OracleTooLarge {
                    dimension: dim,
                    max: MAX_SECTOR_DIM,
                });
            }
        }
        let rows: Vec<Vec<Complex<T>>> = out_basis
            .states()
            .par_iter()
            .map(|j| {
                in_basis
                    .states()
                    .iter()
                    .map(|i| self.amplitude(i, j))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let matrix = CMat::from_fn(out_basis.len(), in_basis.len(), |r, c| rows[r][c]);
        Ok(SectorOperator {
            input: in_basis,
            output: out_basis,
            matrix,
        })
    }
}

/// A Fock operator restricted to fixed photon-number sectors.
#[derive(Clone, Debug)]
pub struct SectorOperator<T: Real> {
    pub input: FockBasis,
    pub output: FockBasis,
    pub matrix: CMat<T>,
}

impl<T: Real> SectorOperator<T> {
    /// Column vector of the basis state `s` in the input sector.
    pub fn basis_vector(&self, s: &OccupationState) -> Result<CMat<T>> {
        let k = self.input.index_of(s)?;
        let mut v = CMat::zeros(self.input.len(), 1);
        v[(k, 0)] = real(T::one());
        Ok(v)
    }
}
