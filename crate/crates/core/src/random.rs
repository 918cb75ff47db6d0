//! Random matrix ensembles used by tests and benchmarks.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalar::{CMat, Real};

/// Entries i.i.d. standard complex normal (`E|z|^2 = 1`).
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(re * s), T::lit(im * s))
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMat<T> {
    let z: CMat<f64> = complex_gaussian(m, m, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    q.map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
}

/// Hermitian matrix `(G + G^†)/2` with `G` Ginibre.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMat<T> {
    let g: CMat<T> = complex_gaussian(m, m, rng);
    let half = Complex::new(T::lit(0.5), T::zero());
    (&g + g.adjoint()).map(|z| z * half)
}

/// Normal matrix `V diag(lambda) V^†` with Haar `V` and complex normal spectrum.
pub fn random_normal<T: Real, R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMat<T> {
    let v: CMat<T> = haar_unitary(m, rng);
    let lambdas: CMat<T> = complex_gaussian(m, 1, rng);
    let mut d = CMat::zeros(m, m);
    for k in 0..m {
        d[(k, k)] = lambdas[(k, 0)];
    }
    &v * d * v.adjoint()
}
