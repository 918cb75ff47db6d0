//! Derivatives of expectation values through dilated derivative circuits.
//!
//! Write the circuit as `C(theta) = B P(theta) A` around the phase of one
//! parameter on mode `p`. With `phi = A' |I>` for `A' = P(theta) A` and
//! `N = B^† Q B`, the product rule gives
//!
//! ```text
//! d/dtheta <Q> = Term1(Q) + conj(Term1(Q^†)),   Term1(Q) = i <phi| N n_p |phi>.
//! ```
//!
//! `N n_p` is not an interferometer, but it is the ancilla-`|1>` matrix
//! element of `M = (N ⊕ c) E`, where `E` is the number-operator matrix
//! `[[1, 1], [1, 0]]` on `(p, ancilla)` and `c = ||Q||`. Dilating `M` into a
//! unitary `W = K H K^†` on `2m + 2` modes turns `Term1` into the expectation
//! of `W` on `n + 1` photons, i.e. a weighted distribution of the circuit
//! `K^† (1 ⊕ A' ⊕ 1)`.

use std::time::{Duration, Instant};

use num_complex::Complex;
use rayon::prelude::*;

use crate::circuits::{clements_decompose, ParamCircuit};
use crate::dilation::{dilate, Dilation};
use crate::error::{Error, Result};
use crate::expectation::{weighted_expectation, EvalMode, NormalObservable};
use crate::fock::OccupationState;
use crate::linalg::{diagonalize_normal, direct_sum, identity, spectral_norm, unitarity_residual, NormalDecomposition};
use crate::scalar::{CMat, Real};
use crate::tol;

/// A circuit cut open at one phase gate: `C = suffix P(theta) prefix`.
#[derive(Clone, Debug)]
pub struct PhaseSplit<T: Real> {
    pub prefix: CMat<T>,
    pub suffix: CMat<T>,
    pub phase_mode: usize,
    pub theta: T,
}

impl<T: Real> PhaseSplit<T> {
    pub fn modes(&self) -> usize {
        self.prefix.nrows()
    }

    /// `P(theta) prefix`, the state preparation up to and including the phase.
    pub fn prepared(&self) -> CMat<T> {
        let mut a = self.prefix.clone();
        let z = crate::scalar::cis(self.theta);
        for x in a.row_mut(self.phase_mode).iter_mut() {
            *x *= z;
        }
        a
    }

    pub fn rebuild(&self) -> CMat<T> {
        &self.suffix * self.prepared()
    }
}

fn check_values<T: Real>(c: &ParamCircuit<T>, values: &[T]) -> Result<()> {
    if values.len() != c.num_params() {
        return Err(Error::ParameterCount {
            expected: c.num_params(),
            found: values.len(),
        });
    }
    Ok(())
}

pub fn split_at_parameter<T: Real>(
    c: &ParamCircuit<T>,
    values: &[T],
    param: &str,
) -> Result<PhaseSplit<T>> {
    check_values(c, values)?;
    let k = c.param_index(param)?;
    let (g, mode) = c
        .gates()
        .iter()
        .enumerate()
        .find_map(|(g, gate)| match gate {
            crate::circuits::Gate::PhaseShift { mode, .. } if c.gate_param(gate) == Some(k) => {
                Some((g, *mode))
            }
            _ => None,
        })
        .ok_or_else(|| Error::UnknownParameter(param.to_string()))?;
    Ok(PhaseSplit {
        prefix: c.product(&c.gates()[..g], values),
        suffix: c.product(&c.gates()[g + 1..], values),
        phase_mode: mode,
        theta: values[k],
    })
}

/// Weight of the ancilla block in `M`: `||Q||`, or one for `Q = 0`.
pub fn ancilla_weight<T: Real>(q: &NormalObservable<T>) -> Result<T> {
    let norm = spectral_norm(q.matrix())?;
    Ok(if norm > T::zero() { norm } else { T::one() })
}

/// `M = (B^† Q B ⊕ c) E` on `m + 1` modes, with the ancilla last.
pub fn build_m<T: Real>(split: &PhaseSplit<T>, q: &NormalObservable<T>) -> Result<CMat<T>> {
    let m = split.modes();
    if q.modes() != m {
        return Err(Error::DimensionMismatch {
            what: "observable modes vs circuit modes",
            expected: m,
            found: q.modes(),
        });
    }
    let n = split.suffix.adjoint() * q.matrix() * &split.suffix;
    let c = ancilla_weight(q)?;
    let block = direct_sum(&n, &CMat::from_element(1, 1, Complex::new(c, T::zero())));
    let p = split.phase_mode;
    let mut e = identity::<T>(m + 1);
    e[(m, p)] = Complex::new(T::one(), T::zero());
    e[(p, m)] = Complex::new(T::one(), T::zero());
    e[(m, m)] = Complex::new(T::zero(), T::zero());
    Ok(block * e)
}

/// One dilated derivative circuit and the data needed to read `Term1` off it.
#[derive(Clone, Debug)]
pub struct DerivativeCircuit<T: Real> {
    pub m: CMat<T>,
    pub dilation: Dilation<T>,
    /// `W = K H K^†` for the dilated unitary `W`.
    pub observable_decomp: NormalDecomposition<T>,
    /// `K^† (1 ⊕ P(theta) A ⊕ 1)` routed as meshes, on `2m + 2` modes.
    pub prep: ParamCircuit<T>,
    /// `0^{m+1} I 1`.
    pub input: OccupationState,
    /// `i s^{n+1} / c`.
    pub global_scalar: Complex<T>,
    /// Frobenius residual of the routed meshes against their targets.
    pub mesh_residual: T,
}

impl<T: Real> DerivativeCircuit<T> {
    pub fn width(&self) -> usize {
        self.prep.modes()
    }

    pub fn photons(&self) -> usize {
        self.input.photons()
    }

    /// `Term1 = global_scalar * sum_S h^S P(S)`.
    pub fn term(&self, mode: EvalMode) -> Result<Complex<T>> {
        let u = self.prep.to_unitary_bound()?;
        let sum = weighted_expectation(&self.observable_decomp.eigenvalues, &u, &self.input, mode)?;
        Ok(self.global_scalar * sum)
    }
}

pub fn build_derivative_circuit<T: Real>(
    split: &PhaseSplit<T>,
    param: &str,
    q: &NormalObservable<T>,
    input: &OccupationState,
) -> Result<DerivativeCircuit<T>> {
    let m = split.modes();
    if input.modes() != m {
        return Err(Error::DimensionMismatch {
            what: "input state modes vs circuit modes",
            expected: m,
            found: input.modes(),
        });
    }
    let m_mat = build_m(split, q)?;
    let c = ancilla_weight(q)?;
    let dilation = dilate(&m_mat)?;
    let w = dilation.unitary();
    let res = unitarity_residual(w)?;
    if res > T::tol(tol::STRUCTURAL) {
        return Err(Error::Numerical(format!(
            "dilated unitary residual {:.3e}",
            res.as_f64()
        )));
    }
    let decomp = diagonalize_normal(w)?;
    let width = 2 * m + 2;
    let live = m + 1;

    let mut prep = ParamCircuit::new(width)?;
    let a_mesh = clements_decompose(&split.prefix)?;
    prep.append(&a_mesh.circuit, live, "prep_")?;
    prep.phase(live + split.phase_mode, param, Some(split.theta))?;
    let k_mesh = clements_decompose(&decomp.eigenvectors.adjoint())?;
    prep.append(&k_mesh.circuit, 0, "measure_")?;

    let padded = OccupationState::zeros(live)
        .concat(input)
        .concat(&OccupationState::single(1, 0));
    let photons = i32::try_from(padded.photons()).expect("photon count bounded");
    let global_scalar = Complex::new(T::zero(), dilation.scale().powi(photons) / c);
    Ok(DerivativeCircuit {
        m: m_mat,
        dilation,
        observable_decomp: decomp,
        prep,
        input: padded,
        global_scalar,
        mesh_residual: a_mesh.residual + k_mesh.residual,
    })
}

/// `d/dtheta <I| C^† Q C |I>` for one named parameter.
///
/// Hermitian observables use `2 Re Term1` from a single circuit; other normal
/// observables add `conj(Term1(Q^†))` from a second circuit.
pub fn derivative<T: Real>(
    c: &ParamCircuit<T>,
    values: &[T],
    param: &str,
    q: &NormalObservable<T>,
    input: &OccupationState,
    mode: EvalMode,
) -> Result<Complex<T>> {
    Ok(derivative_logged(c, values, param, q, input, mode, false)?.0)
}

/// Same as [`derivative`] but always evaluates both product-rule terms.
pub fn derivative_two_circuit<T: Real>(
    c: &ParamCircuit<T>,
    values: &[T],
    param: &str,
    q: &NormalObservable<T>,
    input: &OccupationState,
    mode: EvalMode,
) -> Result<Complex<T>> {
    Ok(derivative_logged(c, values, param, q, input, mode, true)?.0)
}

struct Evaluation {
    record: QueryRecord,
    build: Duration,
    evaluate: Duration,
}

fn derivative_logged<T: Real>(
    c: &ParamCircuit<T>,
    values: &[T],
    param: &str,
    q: &NormalObservable<T>,
    input: &OccupationState,
    mode: EvalMode,
    force_two: bool,
) -> Result<(Complex<T>, Evaluation)> {
    let started = Instant::now();
    let split = split_at_parameter(c, values, param)?;
    let first = build_derivative_circuit(&split, param, q, input)?;
    let mirrored = if q.is_hermitian() && !force_two {
        None
    } else {
        Some(build_derivative_circuit(&split, param, &q.adjoint()?, input)?)
    };
    let build = started.elapsed();

    let started = Instant::now();
    let t1 = first.term(mode.substream(0))?;
    let value = match &mirrored {
        None => Complex::new(T::lit(2.0) * t1.re, T::zero()),
        Some(dc) => t1 + dc.term(mode.substream(1))?.conj(),
    };
    let evaluate = started.elapsed();
    let circuits = if mirrored.is_some() { 2 } else { 1 };
    Ok((
        value,
        Evaluation {
            record: QueryRecord {
                width: first.width(),
                photons: first.photons(),
                distributions_evaluated: circuits,
                shots: mode.shots() * circuits as u64,
            },
            build,
            evaluate,
        },
    ))
}

/// Resources used for one parameter's derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryRecord {
    pub width: usize,
    pub photons: usize,
    pub distributions_evaluated: usize,
    pub shots: u64,
}

/// Classical time summed over parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Timing {
    /// Splitting, dilation, diagonalization and mesh routing.
    pub build: Duration,
    /// Distribution evaluation and sampling.
    pub evaluate: Duration,
    pub total: Duration,
}

#[derive(Clone, Debug)]
pub struct GradientReport<T: Real> {
    /// `(name, derivative)` in parameter order.
    pub values: Vec<(String, Complex<T>)>,
    pub query_log: Vec<QueryRecord>,
    pub timing: Timing,
}

impl<T: Real> GradientReport<T> {
    pub fn get(&self, name: &str) -> Option<Complex<T>> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.values.iter().map(|(_, v)| v.re).collect()
    }

    pub fn distributions_evaluated(&self) -> usize {
        self.query_log.iter().map(|r| r.distributions_evaluated).sum()
    }
}

/// Derivatives for every parameter, evaluated in parallel.
///
/// In shots mode parameter `k` draws from a seed stream derived from the
/// caller's seed and `k`, so reports are reproducible.
pub fn gradient<T: Real>(
    c: &ParamCircuit<T>,
    values: &[T],
    q: &NormalObservable<T>,
    input: &OccupationState,
    mode: EvalMode,
) -> Result<GradientReport<T>> {
    let started = Instant::now();
    check_values(c, values)?;
    // force the lazy diagonalization once, outside the parallel section
    q.decomposition()?;
    let names: Vec<String> = c.param_names().map(str::to_string).collect();
    let results = names
        .par_iter()
        .enumerate()
        .map(|(k, name)| derivative_logged(c, values, name, q, input, mode.substream(k as u64), false))
        .collect::<Result<Vec<_>>>()?;
    let mut timing = Timing::default();
    let mut values_out = Vec::with_capacity(names.len());
    let mut query_log = Vec::with_capacity(names.len());
    for (name, (v, e)) in names.into_iter().zip(results) {
        timing.build += e.build;
        timing.evaluate += e.evaluate;
        values_out.push((name, v));
        query_log.push(e.record);
    }
    timing.total = started.elapsed();
    Ok(GradientReport {
        values: values_out,
        query_log,
        timing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::universal_interferometer;
    use crate::expectation::expectation;
    use crate::linalg::frobenius;
    use crate::qpath::QPathDiagram;
    use crate::random::{haar_unitary, random_hermitian, random_normal};
    use crate::scalar::cis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn st(v: &[usize]) -> OccupationState {
        OccupationState::new(v.to_vec()).unwrap()
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

    fn central_diff(
        c: &ParamCircuit<f64>,
        values: &[f64],
        k: usize,
        q: &NormalObservable<f64>,
        input: &OccupationState,
    ) -> Complex<f64> {
        let h = 1e-5;
        let mut plus = values.to_vec();
        let mut minus = values.to_vec();
        plus[k] += h;
        minus[k] -= h;
        let fp = expectation(q, c, &plus, input, EvalMode::Exact).unwrap();
        let fm = expectation(q, c, &minus, input, EvalMode::Exact).unwrap();
        (fp - fm) / (2.0 * h)
    }

    /// Random circuit of phases, splitters and a fixed unitary.
    fn random_circuit(m: usize, rng: &mut ChaCha8Rng) -> (ParamCircuit<f64>, Vec<f64>) {
        let mut c = ParamCircuit::new(m).unwrap();
        let mut vals = Vec::new();
        for g in 0..6 {
            let k = rng.random_range(0..m);
            c.phase(k, &format!("t{g}"), None).unwrap();
            vals.push(rng.random::<f64>() * 6.28);
            if m > 1 {
                let a = rng.random_range(0..m - 1);
                c.beam_splitter(a, a + 1).unwrap();
            }
        }
        c.unitary((0..m).collect(), haar_unitary(m, rng)).unwrap();
        (c, vals)
    }

    #[test]
    fn split_examples() {
        let mut single = ParamCircuit::<f64>::new(1).unwrap();
        single.phase(0, "t", None).unwrap();
        let s = split_at_parameter(&single, &[0.4], "t").unwrap();
        assert_eq!(s.prefix, identity(1));
        assert_eq!(s.suffix, identity(1));

        let c = mzi();
        let s = split_at_parameter(&c, &[0.9], "theta").unwrap();
        let mut bs = ParamCircuit::<f64>::new(2).unwrap();
        bs.beam_splitter(0, 1).unwrap();
        let b = bs.to_unitary(&[]).unwrap();
        assert!(frobenius(&(&s.prefix - &b)) < 1e-15);
        assert!(frobenius(&(&s.suffix - &b)) < 1e-15);
        assert!(matches!(
            split_at_parameter(&c, &[0.9], "nope"),
            Err(Error::UnknownParameter(_))
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (c, _) = random_circuit(3, &mut rng);
        for _ in 0..10 {
            let vals: Vec<f64> = (0..c.num_params()).map(|_| rng.random::<f64>() * 6.3).collect();
            for name in ["t0", "t3", "t5"] {
                let s = split_at_parameter(&c, &vals, name).unwrap();
                assert!(frobenius(&(s.rebuild() - c.to_unitary(&vals).unwrap())) < 1e-12);
            }
        }
    }

    #[test]
    fn m_for_identity_is_number_operator() {
        let mut c = ParamCircuit::<f64>::new(1).unwrap();
        c.phase(0, "t", None).unwrap();
        let s = split_at_parameter(&c, &[0.0], "t").unwrap();
        let q = NormalObservable::new(identity(1)).unwrap();
        let m = build_m(&s, &q).unwrap();
        let one = Complex::new(1.0, 0.0);
        let expected = CMat::from_row_slice(2, 2, &[one, one, one, Complex::new(0.0, 0.0)]);
        assert_eq!(m, expected);
        let golden = ((3.0 + 5f64.sqrt()) / 2.0).sqrt();
        assert!((spectral_norm(&m).unwrap() - golden).abs() < 1e-12);
    }

    #[test]
    fn m_insertion_matches_sector_oracle() {
        // ancilla-|1> element of Fock(M) = c * Fock(N) n_p
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 1..=3 {
            for n in 0..=2 {
                let qm: CMat<f64> = random_normal(m, &mut rng);
                let q = NormalObservable::new(qm).unwrap();
                let split = PhaseSplit {
                    prefix: haar_unitary(m, &mut rng),
                    suffix: haar_unitary(m, &mut rng),
                    phase_mode: rng.random_range(0..m),
                    theta: 0.3,
                };
                let mm = build_m(&split, &q).unwrap();
                let c = ancilla_weight(&q).unwrap();
                let anc = st(&[1]);
                let diagram = QPathDiagram::new(mm, anc.clone(), anc).unwrap();
                let lhs = diagram.to_sector_operator(n).unwrap();
                let nmat = split.suffix.adjoint() * q.matrix() * &split.suffix;
                let nop = QPathDiagram::from_matrix(nmat).to_sector_operator(n).unwrap();
                let mut number = CMat::zeros(nop.input.len(), nop.input.len());
                for (k, s) in nop.input.iter().enumerate() {
                    number[(k, k)] = Complex::new(s[split.phase_mode] as f64, 0.0);
                }
                let rhs = (&nop.matrix * number).map(|z| z * c);
                assert!(frobenius(&(lhs.matrix - rhs)) < 1e-10, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn circuit_contract() {
        let c = mzi();
        let s = split_at_parameter(&c, &[0.7], "theta").unwrap();
        let q = NormalObservable::new(diag(&[Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)])).unwrap();
        let dc = build_derivative_circuit(&s, "theta", &q, &st(&[1, 0])).unwrap();
        assert_eq!(dc.width(), 6);
        assert_eq!(dc.photons(), 2);
        assert_eq!(dc.input, st(&[0, 0, 0, 1, 0, 1]));
        assert!(unitarity_residual(dc.dilation.unitary()).unwrap() < 1e-10);
        assert!(dc.mesh_residual < 1e-10);
    }

    /// `<I| C^† Q (i B n_p P A) |I>` from dense sector operators.
    fn dense_term1(
        c: &ParamCircuit<f64>,
        vals: &[f64],
        param: &str,
        q: &NormalObservable<f64>,
        input: &OccupationState,
    ) -> Complex<f64> {
        let s = split_at_parameter(c, vals, param).unwrap();
        let n = input.photons();
        let sector = |a: &CMat<f64>| QPathDiagram::from_matrix(a.clone()).to_sector_operator(n).unwrap();
        let cop = sector(&c.to_unitary(vals).unwrap());
        let qop = sector(q.matrix());
        let bop = sector(&s.suffix);
        let aop = sector(&s.prepared());
        let mut number = CMat::zeros(aop.output.len(), aop.output.len());
        for (k, st) in aop.output.iter().enumerate() {
            number[(k, k)] = Complex::new(0.0, st[s.phase_mode] as f64);
        }
        let v = cop.basis_vector(input).unwrap();
        let dc = &bop.matrix * number * &aop.matrix;
        ((cop.matrix * &v).adjoint() * qop.matrix * dc * v)[(0, 0)]
    }

    #[test]
    fn term1_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 1..=3 {
            for n in 1..=2 {
                let (c, vals) = random_circuit(m, &mut rng);
                let q = NormalObservable::new(random_normal(m, &mut rng)).unwrap();
                let input = {
                    let mut v = vec![0; m];
                    for _ in 0..n {
                        v[rng.random_range(0..m)] += 1;
                    }
                    st(&v)
                };
                for name in ["t0", "t2", "t5"] {
                    let s = split_at_parameter(&c, &vals, name).unwrap();
                    let dc = build_derivative_circuit(&s, name, &q, &input).unwrap();
                    let t = dc.term(EvalMode::Exact).unwrap();
                    let oracle = dense_term1(&c, &vals, name, &q, &input);
                    assert!((t - oracle).norm() < 1e-8, "m={m} n={n}: {t} vs {oracle}");
                }
            }
        }
    }

    #[test]
    fn mzi_derivative_examples() {
        let c = mzi();
        let z = NormalObservable::new(diag(&[Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)])).unwrap();
        let input = st(&[1, 0]);
        for &theta in &[0.3, 1.1, 2.5] {
            let d = derivative(&c, &[theta], "theta", &z, &input, EvalMode::Exact).unwrap();
            let fd = central_diff(&c, &[theta], 0, &z, &input);
            assert!((d - fd).norm() <= 1e-6 * (1.0 + fd.norm()));
            assert!((d.re - theta.sin()).abs() < 1e-9);
            assert_eq!(d.im, 0.0);
        }
        let qn = NormalObservable::new(diag(&[Complex::new(0.0, 1.0), Complex::new(1.0, 0.0)])).unwrap();
        assert!(!qn.is_hermitian());
        for &theta in &[0.3, 1.1, 2.5] {
            let d = derivative(&c, &[theta], "theta", &qn, &input, EvalMode::Exact).unwrap();
            let fd = central_diff(&c, &[theta], 0, &qn, &input);
            assert!((d.re - fd.re).abs() <= 1e-6 * (1.0 + fd.re.abs()));
            assert!((d.im - fd.im).abs() <= 1e-6 * (1.0 + fd.im.abs()));
        }
    }

    #[test]
    fn single_mode_derivative_vanishes() {
        let mut c = ParamCircuit::<f64>::new(1).unwrap();
        c.phase(0, "t", None).unwrap();
        for q in [CMat::from_element(1, 1, Complex::new(2.5, 0.0)), CMat::from_element(1, 1, cis(0.8) * 1.5)] {
            let q = NormalObservable::new(q).unwrap();
            let d = derivative(&c, &[1.3], "t", &q, &st(&[2]), EvalMode::Exact).unwrap();
            assert!(d.norm() < 1e-9, "{d}");
        }
    }

    #[test]
    fn two_circuit_path_agrees_on_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let (c, vals) = random_circuit(3, &mut rng);
            let q = NormalObservable::new(random_hermitian(3, &mut rng)).unwrap();
            let input = st(&[1, 1, 0]);
            let one = derivative(&c, &vals, "t1", &q, &input, EvalMode::Exact).unwrap();
            let two = derivative_two_circuit(&c, &vals, "t1", &q, &input, EvalMode::Exact).unwrap();
            assert!((one - two).norm() < 1e-8);
        }
    }

    #[test]
    fn derivative_scales_with_photon_power() {
        // Fock(2Q) = 2^n Fock(Q) on n photons
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (c, vals) = random_circuit(2, &mut rng);
        let q = NormalObservable::new(random_hermitian(2, &mut rng)).unwrap();
        let doubled = q.scaled(2.0).unwrap();
        for (input, factor) in [(st(&[1, 0]), 2.0), (st(&[1, 1]), 4.0)] {
            let d1 = derivative(&c, &vals, "t4", &q, &input, EvalMode::Exact).unwrap();
            let d2 = derivative(&c, &vals, "t4", &doubled, &input, EvalMode::Exact).unwrap();
            assert!((d2 - d1 * factor).norm() < 1e-10 * (1.0 + d1.norm()), "{d1} {d2}");
        }
    }

    #[test]
    fn gradient_counts_and_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for m in 2..=3 {
            let c = universal_interferometer::<f64>(m).unwrap();
            let q = NormalObservable::new(random_hermitian(m, &mut rng)).unwrap();
            let input = OccupationState::single(m, 0);
            let vals: Vec<f64> = (0..c.num_params()).map(|_| rng.random::<f64>() * 6.3).collect();
            let rep = gradient(&c, &vals, &q, &input, EvalMode::Exact).unwrap();
            assert_eq!(rep.distributions_evaluated(), m * (m - 1));
            for rec in &rep.query_log {
                assert_eq!((rec.width, rec.photons), (2 * m + 2, 2));
            }
            for (k, (_, v)) in rep.values.iter().enumerate() {
                let fd = central_diff(&c, &vals, k, &q, &input);
                assert!((v - fd).norm() <= 1e-6 * (1.0 + fd.norm()));
            }
        }
        let q = NormalObservable::new(random_normal(2, &mut rng)).unwrap();
        let c = universal_interferometer::<f64>(2).unwrap();
        let rep = gradient(&c, &[0.3, 0.4], &q, &st(&[1, 0]), EvalMode::Exact).unwrap();
        assert_eq!(rep.distributions_evaluated(), 4);
    }

    #[test]
    fn constant_direction_has_zero_component() {
        // a phase on the last mode before detection does not change a diagonal Q
        let mut c = mzi();
        c.phase(1, "tail", None).unwrap();
        let z = NormalObservable::new(diag(&[Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)])).unwrap();
        let rep = gradient(&c, &[0.8, 1.9], &z, &st(&[1, 0]), EvalMode::Exact).unwrap();
        assert!(rep.get("tail").unwrap().norm() < 1e-9);
        assert!((rep.get("theta").unwrap().re - 0.8f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn shot_gradients_are_reproducible() {
        let c = universal_interferometer::<f64>(2).unwrap();
        let z = NormalObservable::new(diag(&[Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)])).unwrap();
        let mode = EvalMode::Shots { shots: 5000, seed: 11 };
        let a = gradient(&c, &[0.5, 1.0], &z, &st(&[1, 0]), mode).unwrap();
        let b = gradient(&c, &[0.5, 1.0], &z, &st(&[1, 0]), mode).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.query_log[0].shots, 5000);
    }
}
