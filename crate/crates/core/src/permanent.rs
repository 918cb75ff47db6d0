//! Matrix permanents and multi-photon transition amplitudes.
//!
//! Matrices follow the operator convention: columns index input modes and
//! rows index output modes, so an `m -> m'` matrix is `m' x m`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, Scalar};
use num_complex::Complex;
use num_traits::Num;

use crate::error::{Error, Result};
use crate::fock::{OccupationState, MAX_PHOTONS};
use crate::scalar::{CMat, Real};

/// Largest permanent evaluated exactly.
pub const MAX_PERMANENT: usize = 30;

/// Permanent by Ryser's formula, iterating subsets in Gray-code order.
///
/// Works over any commutative ring, so integer and rational matrices give
/// exact results. Costs `O(2^k k)` for a `k x k` input.
pub fn permanent<T: Scalar + Num>(m: &DMatrix<T>) -> Result<T> {
    let k = m.nrows();
    if m.ncols() != k {
        return Err(Error::NotSquare {
            rows: k,
            cols: m.ncols(),
        });
    }
    if k > MAX_PERMANENT {
        return Err(Error::PermanentTooLarge {
            size: k,
            max: MAX_PERMANENT,
        });
    }
    if k == 0 {
        return Ok(T::one());
    }
    let mut row_sums = vec![T::zero(); k];
    let mut in_subset = vec![false; k];
    let mut total = T::zero();
    let mut odd = false;
    for step in 1u64..(1u64 << k) {
        let j = step.trailing_zeros() as usize;
        in_subset[j] = !in_subset[j];
        odd = !odd;
        for (i, s) in row_sums.iter_mut().enumerate() {
            let a = m[(i, j)].clone();
            *s = if in_subset[j] {
                s.clone() + a
            } else {
                s.clone() - a
            };
        }
        let prod = row_sums
            .iter()
            .fold(T::one(), |acc, s| acc * s.clone());
        // (-1)^{|S|}; the overall (-1)^k is applied at the end.
        total = if odd { total - prod } else { total + prod };
    }
    if k % 2 == 1 {
        total = T::zero() - total;
    }
    Ok(total)
}

/// Repeats row `y` of `a` `output[y]` times and column `x` `input[x]` times.
///
/// Yields the `n x n` matrix whose permanent gives `<output| A |input>`
/// up to normalization.
pub fn build_submatrix<T: Scalar>(
    a: &DMatrix<T>,
    input: &OccupationState,
    output: &OccupationState,
) -> Result<DMatrix<T>> {
    check_pattern(a.nrows(), a.ncols(), input, output)?;
    if input.photons() != output.photons() {
        return Err(Error::PhotonMismatch {
            input: input.photons(),
            output: output.photons(),
        });
    }
    let cols = expand(input);
    let rows = expand(output);
    Ok(DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        a[(rows[i], cols[j])].clone()
    }))
}

fn expand(s: &OccupationState) -> Vec<usize> {
    s.as_slice()
        .iter()
        .enumerate()
        .flat_map(|(mode, &count)| std::iter::repeat_n(mode, count))
        .collect()
}

fn check_pattern(
    rows: usize,
    cols: usize,
    input: &OccupationState,
    output: &OccupationState,
) -> Result<()> {
    if input.modes() != cols {
        return Err(Error::DimensionMismatch {
            what: "input pattern vs matrix columns",
            expected: cols,
            found: input.modes(),
        });
    }
    if output.modes() != rows {
        return Err(Error::DimensionMismatch {
            what: "output pattern vs matrix rows",
            expected: rows,
            found: output.modes(),
        });
    }
    Ok(())
}

fn factorials() -> &'static [f64; MAX_PHOTONS + 1] {
    static TABLE: OnceLock<[f64; MAX_PHOTONS + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; MAX_PHOTONS + 1];
        let mut exact: u64 = 1;
        for k in 1..=MAX_PHOTONS {
            if k <= 20 {
                exact *= k as u64;
                t[k] = exact as f64;
            } else {
                t[k] = t[k - 1] * k as f64;
            }
        }
        t
    })
}

/// `sqrt(prod_x I_x! prod_y J_y!)`.
pub fn normalization(input: &OccupationState, output: &OccupationState) -> f64 {
    let f = factorials();
    input
        .as_slice()
        .iter()
        .chain(output.as_slice())
        .map(|&k| f[k].sqrt())
        .product()
}

/// `<output| A |input>` on the Fock space.
///
/// Zero when photon numbers differ; otherwise the permanent of the repeated
/// submatrix divided by [`normalization`].
pub fn amplitude<T: Real>(
    a: &CMat<T>,
    input: &OccupationState,
    output: &OccupationState,
) -> Result<Complex<T>> {
    check_pattern(a.nrows(), a.ncols(), input, output)?;
    if input.photons() != output.photons() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let sub = build_submatrix(a, input, output)?;
    let p = permanent(&sub)?;
    let norm = T::lit(normalization(input, output));
    Ok(p / norm)
}

/// A single amplitude evaluation request.
#[derive(Clone, Debug)]
pub struct AmplitudeQuery<T: Real> {
    pub matrix: CMat<T>,
    pub input: OccupationState,
    pub output: OccupationState,
}

impl<T: Real> AmplitudeQuery<T> {
    pub fn new(matrix: CMat<T>, input: OccupationState, output: OccupationState) -> Result<Self> {
        check_pattern(matrix.nrows(), matrix.ncols(), &input, &output)?;
        Ok(Self {
            matrix,
            input,
            output,
        })
    }

    pub fn evaluate(&self) -> Result<Complex<T>> {
        amplitude(&self.matrix, &self.input, &self.output)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use crate::random::complex_gaussian;
    use num_rational::Rational64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn st(v: &[usize]) -> OccupationState {
        OccupationState::new(v.to_vec()).unwrap()
    }

    /// Sum over all permutations; independent of Ryser.
    fn brute_permanent(m: &CMat<f64>) -> Complex<f64> {
        fn rec(m: &CMat<f64>, row: usize, used: &mut Vec<bool>, acc: Complex<f64>) -> Complex<f64> {
            let k = m.nrows();
            if row == k {
                return acc;
            }
            let mut total = Complex::new(0.0, 0.0);
            for c in 0..k {
                if !used[c] {
                    used[c] = true;
                    total += rec(m, row + 1, used, acc * m[(row, c)]);
                    used[c] = false;
                }
            }
            total
        }
        rec(m, 0, &mut vec![false; m.nrows()], Complex::new(1.0, 0.0))
    }

    fn golden() -> CMat<f64> {
        CMat::from_row_slice(
            2,
            2,
            &[
                Complex::new(1.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 0.0),
            ],
        )
    }

    #[test]
    fn empty_and_small() {
        assert_eq!(permanent(&DMatrix::<i64>::zeros(0, 0)).unwrap(), 1);
        let g = DMatrix::from_row_slice(2, 2, &[1i64, 1, 1, 0]);
        assert_eq!(permanent(&g).unwrap(), 1);
        let ones = DMatrix::from_element(5, 5, 1i64);
        assert_eq!(permanent(&ones).unwrap(), 120);
    }

    #[test]
    fn exact_rational_permanent() {
        let h = DMatrix::from_fn(4, 4, |i, j| Rational64::new(1, (i + j + 1) as i64));
        // brute force over permutations in exact arithmetic
        let mut expected = Rational64::new(0, 1);
        let idx = [0usize, 1, 2, 3];
        for a in idx {
            for b in idx {
                for c in idx {
                    for d in idx {
                        let p = [a, b, c, d];
                        let mut seen = [false; 4];
                        if p.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                            expected += h[(0, a)] * h[(1, b)] * h[(2, c)] * h[(3, d)];
                        }
                    }
                }
            }
        }
        assert_eq!(permanent(&h).unwrap(), expected);
    }

    #[test]
    fn ryser_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..=6 {
            let a: CMat<f64> = complex_gaussian(k, k, &mut rng);
            let p = permanent(&a).unwrap();
            assert!((p - brute_permanent(&a)).norm() < 1e-10);
        }
    }

    #[test]
    fn homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: CMat<f64> = complex_gaussian(3, 3, &mut rng);
        let z = Complex::new(2.0, 1.0);
        let lhs = permanent(&x.map(|e| e * z)).unwrap();
        let rhs = z * z * z * permanent(&x).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn size_cap_and_shape() {
        let big = DMatrix::<i64>::zeros(31, 31);
        assert!(matches!(
            permanent(&big),
            Err(Error::PermanentTooLarge { size: 31, .. })
        ));
        assert!(matches!(
            permanent(&DMatrix::<i64>::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn submatrix_repeats() {
        let g = golden();
        let same = build_submatrix(&g, &st(&[1, 1]), &st(&[1, 1])).unwrap();
        assert_eq!(same, g);
        let sub = build_submatrix(&g, &st(&[2, 1]), &st(&[2, 1])).unwrap();
        let expected = CMat::from_fn(3, 3, |i, j| {
            Complex::new(if i == 2 && j == 2 { 0.0 } else { 1.0 }, 0.0)
        });
        assert_eq!(sub, expected);
        let empty = build_submatrix(&g, &st(&[0, 0]), &st(&[0, 0])).unwrap();
        assert_eq!(empty.shape(), (0, 0));
        assert!(matches!(
            build_submatrix(&g, &st(&[1, 0]), &st(&[1, 1])),
            Err(Error::PhotonMismatch { .. })
        ));
    }

    #[test]
    fn amplitude_examples() {
        let id = identity::<f64>(3);
        let s = st(&[2, 0, 1]);
        assert!((amplitude(&id, &s, &s).unwrap() - 1.0).norm() < 1e-14);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bs = CMat::from_row_slice(
            2,
            2,
            &[
                Complex::new(h, 0.0),
                Complex::new(0.0, h),
                Complex::new(0.0, h),
                Complex::new(h, 0.0),
            ],
        );
        assert!(amplitude(&bs, &st(&[1, 1]), &st(&[1, 1])).unwrap().norm() < 1e-15);

        let a = amplitude(&golden(), &st(&[2, 1]), &st(&[2, 1])).unwrap();
        assert!((a - 2.0).norm() < 1e-14);

        assert_eq!(
            amplitude(&golden(), &st(&[1, 0]), &st(&[1, 1])).unwrap(),
            Complex::new(0.0, 0.0)
        );
    }

    #[test]
    fn amplitude_uses_column_as_input() {
        // Single photon: <e_y| A |e_x> = A[y, x].
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                Complex::new(1.0, 0.0),
                Complex::new(2.0, 0.0),
                Complex::new(3.0, 0.0),
                Complex::new(4.0, 0.0),
            ],
        );
        let v = amplitude(&a, &st(&[0, 1]), &st(&[1, 0])).unwrap();
        assert_eq!(v, Complex::new(2.0, 0.0));
    }

    #[test]
    fn normalization_large_counts() {
        let n = normalization(&st(&[25]), &st(&[25]));
        let f25: f64 = (1..=25).map(|k| k as f64).product();
        assert!((n / f25 - 1.0).abs() < 1e-14);
    }
}
