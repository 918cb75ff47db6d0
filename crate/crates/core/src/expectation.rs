//! Output distributions, shot sampling and expectation values of normal
//! observables.
//!
//! For a normal `Q = V diag(lambda) V^†` and an `n`-photon state `psi`,
//! `<psi| Q |psi> = sum_S lambda^S P(S)` where `P` is the output distribution
//! of `V^†` applied after the state preparation and `lambda^S = prod_i
//! lambda_i^{S_i}`. The measurement circuit is "prepare, then `V^†`, then
//! detect".

use std::sync::OnceLock;

use num_complex::Complex;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuits::ParamCircuit;
use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, FockBasis, OccupationState};
use crate::linalg::{
    diagonalize_normal, frobenius, hermiticity_residual, normality_residual, unitarity_residual,
    NormalDecomposition,
};
use crate::permanent::amplitude;
use crate::scalar::{cpowu, CMat, Real};
use crate::tol;

/// How an expectation value is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Full output distribution.
    Exact,
    /// Empirical frequencies from `shots` seeded draws.
    Shots { shots: u64, seed: u64 },
}

impl EvalMode {
    /// Same shot budget with a seed derived from `stream`.
    pub fn substream(self, stream: u64) -> EvalMode {
        match self {
            EvalMode::Exact => EvalMode::Exact,
            EvalMode::Shots { shots, seed } => EvalMode::Shots {
                shots,
                seed: mix_seed(seed, stream),
            },
        }
    }

    pub fn shots(self) -> u64 {
        match self {
            EvalMode::Exact => 0,
            EvalMode::Shots { shots, .. } => shots,
        }
    }
}

/// SplitMix64 finalizer over `seed + stream`.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct OutputDistribution<T: Real> {
    pub basis: FockBasis,
    pub probabilities: Vec<T>,
}

impl<T: Real> OutputDistribution<T> {
    pub fn probability(&self, s: &OccupationState) -> Result<T> {
        Ok(self.probabilities[self.basis.index_of(s)?])
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().fold(T::zero(), |a, &p| a + p)
    }
}

/// Counts of sampled detection events, aligned with the sampled basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    pub seed: u64,
    pub shots: u64,
    pub counts: Vec<u64>,
}

impl ShotRecord {
    /// Empirical frequency of each basis state.
    pub fn frequencies<T: Real>(&self) -> Vec<T> {
        let total = T::lit(self.shots as f64);
        self.counts
            .iter()
            .map(|&c| T::lit(c as f64) / total)
            .collect()
    }

    /// `(state, count)` pairs with non-zero counts, in basis order.
    pub fn nonzero<'a>(&'a self, basis: &'a FockBasis) -> impl Iterator<Item = (&'a OccupationState, u64)> {
        basis
            .iter()
            .zip(&self.counts)
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| (s, c))
    }
}

fn check_unitary<T: Real>(u: &CMat<T>) -> Result<()> {
    let r = unitarity_residual(u)?;
    if r > T::tol(tol::UNITARY_INPUT) {
        return Err(Error::NotUnitary { residual: r.as_f64() });
    }
    Ok(())
}

/// `P(J | input) = |<J| U |input>|^2` for every `J` with the same photon number.
pub fn exact_distribution<T: Real>(
    u: &CMat<T>,
    input: &OccupationState,
) -> Result<OutputDistribution<T>> {
    check_unitary(u)?;
    if input.modes() != u.ncols() {
        return Err(Error::DimensionMismatch {
            what: "input state modes vs unitary",
            expected: u.ncols(),
            found: input.modes(),
        });
    }
    let basis = enumerate_basis(u.nrows(), input.photons())?;
    let probabilities = basis
        .states()
        .par_iter()
        .map(|j| {
            let p = amplitude(u, input, j)?.norm_sqr();
            if p < -T::lit(tol::PROBABILITY_FLOOR) {
                return Err(Error::Numerical(format!("negative probability {p}")));
            }
            Ok(p.max(T::zero()))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(OutputDistribution {
        basis,
        probabilities,
    })
}

/// Draws `shots` i.i.d. outcomes; identical seeds give identical records.
pub fn sample<T: Real>(dist: &OutputDistribution<T>, shots: u64, seed: u64) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let weights: Vec<f64> = dist.probabilities.iter().map(|p| p.as_f64()).collect();
    let index = WeightedIndex::new(&weights)
        .map_err(|e| Error::Numerical(format!("cannot sample distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; weights.len()];
    for _ in 0..shots {
        counts[index.sample(&mut rng)] += 1;
    }
    Ok(ShotRecord {
        seed,
        shots,
        counts,
    })
}

/// `lambda^s = prod_i lambda_i^{s_i}`.
pub fn eigen_weight<T: Real>(eigenvalues: &[Complex<T>], s: &OccupationState) -> Result<Complex<T>> {
    if s.modes() != eigenvalues.len() {
        return Err(Error::DimensionMismatch {
            what: "occupation state vs eigenvalue count",
            expected: eigenvalues.len(),
            found: s.modes(),
        });
    }
    Ok(eigenvalues
        .iter()
        .zip(s.as_slice())
        .fold(Complex::new(T::one(), T::zero()), |acc, (&l, &k)| {
            acc * cpowu(l, k)
        }))
}

/// Observable induced by a normal matrix; the diagonalization is computed on
/// first use.
#[derive(Debug)]
pub struct NormalObservable<T: Real> {
    matrix: CMat<T>,
    hermitian: bool,
    decomposition: OnceLock<NormalDecomposition<T>>,
}

impl<T: Real> Clone for NormalObservable<T> {
    fn clone(&self) -> Self {
        let decomposition = OnceLock::new();
        if let Some(d) = self.decomposition.get() {
            let _ = decomposition.set(d.clone());
        }
        Self {
            matrix: self.matrix.clone(),
            hermitian: self.hermitian,
            decomposition,
        }
    }
}

impl<T: Real> NormalObservable<T> {
    pub fn new(matrix: CMat<T>) -> Result<Self> {
        crate::linalg::ensure_finite(&matrix, "observable")?;
        let scale = T::one().max(frobenius(&matrix));
        let residual = normality_residual(&matrix)?;
        if residual > T::tol(tol::NORMALITY) * scale * scale {
            return Err(Error::NotNormal {
                residual: residual.as_f64(),
            });
        }
        let hermitian = hermiticity_residual(&matrix)? <= T::tol(tol::HERMITIAN) * scale;
        Ok(Self {
            matrix,
            hermitian,
            decomposition: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn decomposition(&self) -> Result<&NormalDecomposition<T>> {
        if let Some(d) = self.decomposition.get() {
            return Ok(d);
        }
        let d = diagonalize_normal(&self.matrix)?;
        Ok(self.decomposition.get_or_init(|| d))
    }

    pub fn adjoint(&self) -> Result<NormalObservable<T>> {
        NormalObservable::new(self.matrix.adjoint())
    }

    pub fn scaled(&self, factor: T) -> Result<NormalObservable<T>> {
        let z = Complex::new(factor, T::zero());
        NormalObservable::new(self.matrix.map(|e| e * z))
    }
}

/// `sum_S lambda^S P(S)` where `P` is the output distribution of
/// `measurement * state_prep` on `input`.
///
/// `measurement_prep` already includes the rotation into the eigenbasis.
pub fn weighted_expectation<T: Real>(
    eigenvalues: &[Complex<T>],
    measurement_prep: &CMat<T>,
    input: &OccupationState,
    mode: EvalMode,
) -> Result<Complex<T>> {
    let dist = exact_distribution(measurement_prep, input)?;
    let weights = match mode {
        EvalMode::Exact => dist.probabilities.clone(),
        EvalMode::Shots { shots, seed } => sample(&dist, shots, seed)?.frequencies(),
    };
    let mut acc = Complex::new(T::zero(), T::zero());
    for (s, w) in dist.basis.iter().zip(weights) {
        if w != T::zero() {
            acc += eigen_weight(eigenvalues, s)? * w;
        }
    }
    Ok(acc)
}

/// `<psi| Q |psi>` for `psi = C(theta) |input>`.
///
/// Hermitian observables return a real value; in exact mode the discarded
/// imaginary part is checked against the structural tolerance.
pub fn expectation<T: Real>(
    q: &NormalObservable<T>,
    prep: &ParamCircuit<T>,
    theta: &[T],
    input: &OccupationState,
    mode: EvalMode,
) -> Result<Complex<T>> {
    if q.modes() != prep.modes() {
        return Err(Error::DimensionMismatch {
            what: "observable modes vs circuit modes",
            expected: prep.modes(),
            found: q.modes(),
        });
    }
    let u = prep.to_unitary(theta)?;
    expectation_of_unitary(q, &u, input, mode)
}

/// [`expectation`] for a state prepared by an explicit unitary.
pub fn expectation_of_unitary<T: Real>(
    q: &NormalObservable<T>,
    prep: &CMat<T>,
    input: &OccupationState,
    mode: EvalMode,
) -> Result<Complex<T>> {
    let dec = q.decomposition()?;
    let measured = dec.eigenvectors.adjoint() * prep;
    let value = weighted_expectation(&dec.eigenvalues, &measured, input, mode)?;
    if q.is_hermitian() {
        if mode == EvalMode::Exact {
            let scale = T::one().max(value.re.abs());
            if value.im.abs() > T::tol(tol::STRUCTURAL) * scale {
                return Err(Error::Numerical(format!(
                    "Hermitian expectation has imaginary part {}",
                    value.im
                )));
            }
        }
        return Ok(Complex::new(value.re, T::zero()));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use crate::qpath::QPathDiagram;
    use crate::random::{haar_unitary, random_normal};
    use crate::scalar::cis;

    fn st(v: &[usize]) -> OccupationState {
        OccupationState::new(v.to_vec()).unwrap()
    }

    fn bs() -> CMat<f64> {
        let mut c = ParamCircuit::<f64>::new(2).unwrap();
        c.beam_splitter(0, 1).unwrap();
        c.to_unitary(&[]).unwrap()
    }

    fn mzi() -> ParamCircuit<f64> {
        let mut c = ParamCircuit::new(2).unwrap();
        c.beam_splitter(0, 1).unwrap();
        c.phase(0, "theta", Some(0.0)).unwrap();
        c.beam_splitter(0, 1).unwrap();
        c
    }

    fn diag(vals: &[Complex<f64>]) -> CMat<f64> {
        let mut d = CMat::zeros(vals.len(), vals.len());
        for (k, v) in vals.iter().enumerate() {
            d[(k, k)] = *v;
        }
        d
    }

    #[test]
    fn identity_distribution() {
        let d = exact_distribution(&identity::<f64>(2), &st(&[1, 0])).unwrap();
        assert_eq!(d.probability(&st(&[1, 0])).unwrap(), 1.0);
        assert_eq!(d.probability(&st(&[0, 1])).unwrap(), 0.0);
    }

    #[test]
    fn hong_ou_mandel() {
        let d = exact_distribution(&bs(), &st(&[1, 1])).unwrap();
        assert!(d.probability(&st(&[1, 1])).unwrap() < 1e-12);
        assert!((d.probability(&st(&[2, 0])).unwrap() - 0.5).abs() < 1e-12);
        assert!((d.probability(&st(&[0, 2])).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn distribution_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u: CMat<f64> = haar_unitary(4, &mut rng);
        let d = exact_distribution(&u, &st(&[1, 0, 1, 0])).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-10);
        assert!(matches!(
            exact_distribution(&u.map(|z| z * 2.0), &st(&[1, 0, 1, 0])),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn sampling_contract() {
        let d = exact_distribution(&identity::<f64>(3), &st(&[0, 2, 0])).unwrap();
        let rec = sample(&d, 500, 3).unwrap();
        assert_eq!(rec.counts[d.basis.index_of(&st(&[0, 2, 0])).unwrap()], 500);

        let hom = exact_distribution(&bs(), &st(&[1, 1])).unwrap();
        let a = sample(&hom, 1000, 42).unwrap();
        let b = sample(&hom, 1000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.iter().sum::<u64>(), 1000);
        assert!(sample(&hom, 0, 1).is_err());

        let big = sample(&hom, 1_000_000, 7).unwrap();
        let p11 = big.frequencies::<f64>()[hom.basis.index_of(&st(&[1, 1])).unwrap()];
        assert!(p11 < 1e-5);
    }

    #[test]
    fn eigen_weights() {
        let one = Complex::new(1.0, 0.0);
        assert_eq!(eigen_weight(&[one, one], &st(&[3, 1])).unwrap(), one);
        let l = [Complex::new(2.0, 0.0), Complex::new(3.0, 0.0)];
        assert_eq!(eigen_weight(&l, &st(&[1, 2])).unwrap(), Complex::new(18.0, 0.0));
        let u: [Complex<f64>; 2] = [cis(0.3), cis(-1.1)];
        assert!((eigen_weight(&u, &st(&[2, 3])).unwrap().norm() - 1.0).abs() < 1e-14);
        assert!(eigen_weight(&u, &st(&[1])).is_err());
    }

    #[test]
    fn expectation_examples() {
        let c = mzi();
        let q = NormalObservable::new(identity::<f64>(2)).unwrap();
        let v = expectation(&q, &c, &[0.8], &st(&[1, 1]), EvalMode::Exact).unwrap();
        assert!((v - 1.0).norm() < 1e-12);

        let phi = 0.7;
        let single = ParamCircuit::<f64>::new(1).unwrap();
        let q = NormalObservable::new(CMat::from_element(1, 1, cis(phi))).unwrap();
        let v = expectation(&q, &single, &[], &st(&[3]), EvalMode::Exact).unwrap();
        assert!((v - cis(3.0 * phi)).norm() < 1e-12);
    }

    #[test]
    fn mzi_matches_dense_oracle_and_closed_form() {
        let c = mzi();
        let z = NormalObservable::new(diag(&[Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)])).unwrap();
        for &theta in &[0.0, 0.3, 1.1, 2.5] {
            let v = expectation(&z, &c, &[theta], &st(&[1, 0]), EvalMode::Exact).unwrap();
            // closed form of this landscape
            assert!((v.re + f64::cos(theta)).abs() < 1e-12);
            let u = c.to_unitary(&[theta]).unwrap();
            let psi_op = QPathDiagram::from_matrix(u).to_sector_operator(1).unwrap();
            let q_op = QPathDiagram::from_matrix(z.matrix().clone()).to_sector_operator(1).unwrap();
            let psi = &psi_op.matrix * psi_op.basis_vector(&st(&[1, 0])).unwrap();
            let oracle = (psi.adjoint() * &q_op.matrix * &psi)[(0, 0)];
            assert!((v - oracle).norm() < 1e-10);
        }
    }

    #[test]
    fn random_normal_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let qm: CMat<f64> = random_normal(3, &mut rng);
            let q = NormalObservable::new(qm.clone()).unwrap();
            let u: CMat<f64> = haar_unitary(3, &mut rng);
            let input = st(&[1, 0, 1]);
            let v = expectation_of_unitary(&q, &u, &input, EvalMode::Exact).unwrap();
            let psi_op = QPathDiagram::from_matrix(u).to_sector_operator(2).unwrap();
            let q_op = QPathDiagram::from_matrix(qm).to_sector_operator(2).unwrap();
            let psi = &psi_op.matrix * psi_op.basis_vector(&input).unwrap();
            let oracle = (psi.adjoint() * &q_op.matrix * &psi)[(0, 0)];
            assert!((v - oracle).norm() < 1e-9 * (1.0 + oracle.norm()));
        }
    }

    #[test]
    fn shots_are_seeded() {
        let c = mzi();
        let z = NormalObservable::new(diag(&[Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)])).unwrap();
        let mode = EvalMode::Shots { shots: 20_000, seed: 9 };
        let a = expectation(&z, &c, &[1.1], &st(&[1, 0]), mode).unwrap();
        let b = expectation(&z, &c, &[1.1], &st(&[1, 0]), mode).unwrap();
        assert_eq!(a, b);
        assert!((a.re + f64::cos(1.1)).abs() < 0.03);
    }

    #[test]
    fn rejects_non_normal_and_mismatch() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                Complex::new(1.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(1.0, 0.0),
            ],
        );
        assert!(matches!(NormalObservable::new(a), Err(Error::NotNormal { .. })));
        let q = NormalObservable::new(identity::<f64>(3)).unwrap();
        assert!(expectation(&q, &mzi(), &[0.0], &st(&[1, 0]), EvalMode::Exact).is_err());
    }
}
