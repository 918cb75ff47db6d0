//! Unitary dilation of arbitrary matrices.
//!
//! For `A: m -> m'` let `s = max(1, ||A||)` and `T = A / s`. The block matrix
//!
//! ```text
//!     U = [ -T^†      D(T^†) ]     rows:    m  then m'
//!         [  D(T)     T      ]     columns: m' then m
//! ```
//!
//! with defect operators `D(X) = sqrt(1 - X X^†)` is unitary, and on any
//! pattern with `n` input photons
//! `<J| A |I> = s^n <0_m + J| U |0_m' + I>`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::OccupationState;
use crate::linalg::{ensure_finite, spectral_norm, svd};
use crate::permanent::amplitude;
use crate::scalar::{CMat, Real};
use crate::tol;

#[derive(Clone, Debug)]
pub struct Dilation<T: Real> {
    unitary: CMat<T>,
    scale: T,
    contraction: CMat<T>,
}

impl<T: Real> Dilation<T> {
    /// The `(m + m') x (m + m')` unitary.
    pub fn unitary(&self) -> &CMat<T> {
        &self.unitary
    }

    /// `s_A = max(1, ||A||)`.
    pub fn scale(&self) -> T {
        self.scale
    }

    /// `T = A / s_A`, the lower-right block of [`unitary`](Self::unitary).
    pub fn contraction(&self) -> &CMat<T> {
        &self.contraction
    }

    /// Vacuum modes prepended to input patterns (the rows of `A`).
    pub fn input_padding(&self) -> usize {
        self.contraction.nrows()
    }

    /// Vacuum modes prepended to output patterns (the columns of `A`).
    pub fn output_padding(&self) -> usize {
        self.contraction.ncols()
    }

    /// Input pattern `I` on `A`'s modes lifted to the dilation's modes.
    pub fn pad_input(&self, input: &OccupationState) -> OccupationState {
        OccupationState::zeros(self.input_padding()).concat(input)
    }

    pub fn pad_output(&self, output: &OccupationState) -> OccupationState {
        OccupationState::zeros(self.output_padding()).concat(output)
    }

    /// `<J| A |I>` recovered as `s^n <0 + J| U |0 + I>`.
    pub fn amplitude(&self, input: &OccupationState, output: &OccupationState) -> Result<Complex<T>> {
        if input.photons() != output.photons() {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        let a = amplitude(&self.unitary, &self.pad_input(input), &self.pad_output(output))?;
        let n = i32::try_from(input.photons()).expect("photon count bounded");
        Ok(a * self.scale.powi(n))
    }
}

/// Dilates `a` into a unitary of size `rows + cols`.
///
/// A spectral norm within `1e-12` of one snaps the scale to exactly one.
pub fn dilate<T: Real>(a: &CMat<T>) -> Result<Dilation<T>> {
    ensure_finite(a, "dilation input")?;
    let (rows, cols) = a.shape();
    let norm = spectral_norm(a)?;
    let scale = if (norm - T::one()).abs() <= T::tol(tol::NORM_SNAP) || norm <= T::one() {
        T::one()
    } else {
        norm
    };
    let inv = Complex::new(T::one() / scale, T::zero());
    let t = a.map(|z| z * inv);

    // T = W S V^†; D(T) = 1 + W (sqrt(1 - S^2) - 1) W^†, D(T^†) likewise with V.
    let dec = svd(&t)?;
    let shifts: Vec<Complex<T>> = dec
        .singular_values
        .iter()
        .map(|&s| {
            let s = s.min(T::one());
            Complex::new((T::one() - s * s).max(T::zero()).sqrt() - T::one(), T::zero())
        })
        .collect();
    let defect = |basis: &CMat<T>| -> CMat<T> {
        let mut scaled = basis.clone();
        for (j, z) in shifts.iter().enumerate() {
            for e in scaled.column_mut(j).iter_mut() {
                *e *= *z;
            }
        }
        let n = basis.nrows();
        CMat::identity(n, n) + scaled * basis.adjoint()
    };
    let d_t = defect(&dec.u);
    let d_t_adj = defect(&dec.v_adjoint.adjoint());

    let size = rows + cols;
    let mut u = CMat::zeros(size, size);
    u.view_mut((0, 0), (cols, rows)).copy_from(&(-t.adjoint()));
    u.view_mut((0, rows), (cols, cols)).copy_from(&d_t_adj);
    u.view_mut((cols, 0), (rows, rows)).copy_from(&d_t);
    u.view_mut((cols, rows), (rows, cols)).copy_from(&t);
    if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("dilation produced non-finite entries".into()));
    }
    Ok(Dilation {
        unitary: u,
        scale,
        contraction: t,
    })
}

/// `<J| A |I>` computed through the dilation of `A`.
pub fn amplitude_via_dilation<T: Real>(
    a: &CMat<T>,
    input: &OccupationState,
    output: &OccupationState,
) -> Result<Complex<T>> {
    if input.modes() != a.ncols() || output.modes() != a.nrows() {
        return Err(Error::DimensionMismatch {
            what: "pattern vs matrix shape",
            expected: a.ncols(),
            found: input.modes(),
        });
    }
    dilate(a)?.amplitude(input, output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_basis;
    use crate::linalg::{frobenius, unitarity_residual};
    use crate::random::{complex_gaussian, haar_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn st(v: &[usize]) -> OccupationState {
        OccupationState::new(v.to_vec()).unwrap()
    }

    fn lower_right(d: &Dilation<f64>) -> CMat<f64> {
        let (r, c) = d.contraction().shape();
        d.unitary().view((c, r), (r, c)).into_owned()
    }

    #[test]
    fn unitary_input_has_no_defect() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: CMat<f64> = haar_unitary(3, &mut rng);
        let d = dilate(&a).unwrap();
        assert_eq!(d.scale(), 1.0);
        let u = d.unitary();
        assert!(frobenius(&(u.view((0, 3), (3, 3)).into_owned())) < 1e-7);
        assert!(frobenius(&(u.view((3, 0), (3, 3)).into_owned())) < 1e-7);
        assert!(frobenius(&(u.view((0, 0), (3, 3)).into_owned() + a.adjoint())) < 1e-12);
        assert!(unitarity_residual(u).unwrap() < 1e-10);
    }

    #[test]
    fn scalar_two() {
        let a = CMat::from_element(1, 1, Complex::new(2.0, 0.0));
        let d = dilate(&a).unwrap();
        assert_eq!(d.scale(), 2.0);
        let expected = CMat::from_row_slice(
            2,
            2,
            &[
                Complex::new(-1.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(1.0, 0.0),
            ],
        );
        assert!(frobenius(&(d.unitary() - expected)) < 1e-15);
        let amp = d.amplitude(&st(&[1]), &st(&[1])).unwrap();
        assert!((amp - 2.0).norm() < 1e-14);
    }

    #[test]
    fn number_operator_matrix() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                Complex::new(1.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 0.0),
            ],
        );
        let d = dilate(&a).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((d.scale() - phi).abs() < 1e-12);
        assert!(unitarity_residual(d.unitary()).unwrap() < 1e-12);
        assert!(frobenius(&(lower_right(&d) - d.contraction())) < 1e-15);
        for i in 0..=5 {
            let s = st(&[i, 1]);
            let amp = d.amplitude(&s, &s).unwrap();
            assert!((amp - i as f64).norm() < 1e-12, "i={i}: {amp}");
        }
    }

    #[test]
    fn contraction_recovers_all_amplitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut a: CMat<f64> = complex_gaussian(3, 3, &mut rng);
        let n = spectral_norm(&a).unwrap();
        a = a.map(|z| z / (1.2 * n));
        let d = dilate(&a).unwrap();
        assert_eq!(d.scale(), 1.0);
        for photons in 0..=3 {
            let basis = enumerate_basis(3, photons).unwrap();
            for i in basis.iter() {
                for j in basis.iter() {
                    let direct = amplitude(&a, i, j).unwrap();
                    let lifted = d.amplitude(i, j).unwrap();
                    assert!((direct - lifted).norm() < 1e-9 * (1.0 + direct.norm()));
                }
            }
        }
    }

    #[test]
    fn rectangular_dilation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: CMat<f64> = complex_gaussian(2, 3, &mut rng).map(|z| z * 1.7);
        let d = dilate(&a).unwrap();
        assert_eq!(d.unitary().shape(), (5, 5));
        assert!(unitarity_residual(d.unitary()).unwrap() < 1e-10);
        let ins = enumerate_basis(3, 2).unwrap();
        let outs = enumerate_basis(2, 2).unwrap();
        for i in ins.iter() {
            for j in outs.iter() {
                let direct = amplitude(&a, i, j).unwrap();
                let lifted = amplitude_via_dilation(&a, i, j).unwrap();
                assert!((direct - lifted).norm() < 1e-9 * (1.0 + direct.norm()));
            }
        }
    }

    #[test]
    fn norm_snaps_to_one() {
        let a = CMat::from_element(1, 1, Complex::new(1.0 + 1e-13, 0.0));
        assert_eq!(dilate(&a).unwrap().scale(), 1.0);
    }
}
