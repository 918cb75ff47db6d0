//! Dense complex linear algebra: SVD, spectral norm, PSD square roots and
//! unitary diagonalization of normal matrices.
//!
//! Factorizations are delegated to nalgebra; this module adds input
//! validation, deterministic ordering and the normal-matrix eigensolver.

use nalgebra::linalg::SVD;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{CMat, Real};
use crate::tol;

/// Singular value decomposition `M = U diag(S) V^†` with `S` descending.
///
/// For an `r x c` input the factors are thin: `U` is `r x k`, `V^†` is `k x c`
/// with `k = min(r, c)`; both are unitary when `M` is square.
#[derive(Clone, Debug)]
pub struct Svd<T: Real> {
    pub u: CMat<T>,
    pub singular_values: Vec<T>,
    pub v_adjoint: CMat<T>,
}

impl<T: Real> Svd<T> {
    pub fn reconstruct(&self) -> CMat<T> {
        let k = self.singular_values.len();
        let mut scaled = self.u.clone();
        for j in 0..k {
            let s = Complex::new(self.singular_values[j], T::zero());
            for z in scaled.column_mut(j).iter_mut() {
                *z *= s;
            }
        }
        scaled * &self.v_adjoint
    }
}

/// Eigen-decomposition `N = V diag(lambda) V^†` of a normal matrix.
#[derive(Clone, Debug)]
pub struct NormalDecomposition<T: Real> {
    /// Unitary matrix whose columns are orthonormal eigenvectors.
    pub eigenvectors: CMat<T>,
    pub eigenvalues: Vec<Complex<T>>,
}

impl<T: Real> NormalDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> CMat<T> {
        let mut scaled = self.eigenvectors.clone();
        for (j, lambda) in self.eigenvalues.iter().enumerate() {
            for z in scaled.column_mut(j).iter_mut() {
                *z *= *lambda;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }
}

pub fn ensure_finite<T: Real>(m: &CMat<T>, context: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context))
    }
}

fn ensure_square<T: Real>(m: &CMat<T>) -> Result<usize> {
    if m.nrows() == m.ncols() {
        Ok(m.nrows())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Frobenius norm.
pub fn frobenius<T: Real>(m: &CMat<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
        .sqrt()
}

pub fn svd<T: Real>(m: &CMat<T>) -> Result<Svd<T>> {
    ensure_finite(m, "svd input")?;
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            u: CMat::zeros(rows, 0),
            singular_values: Vec::new(),
            v_adjoint: CMat::zeros(0, cols),
        });
    }
    let raw = SVD::try_new(m.clone(), true, true, T::default_epsilon(), 100_000)
        .ok_or_else(|| Error::Numerical("svd did not converge".into()))?;
    let u = raw.u.expect("requested U");
    let v_t = raw.v_t.expect("requested V^†");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        raw.singular_values[b]
            .partial_cmp(&raw.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut su = CMat::zeros(rows, k);
    let mut sv = CMat::zeros(k, cols);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv.set_row(dst, &v_t.row(src));
        s.push(raw.singular_values[src].max(T::zero()));
    }
    Ok(Svd {
        u: su,
        singular_values: s,
        v_adjoint: sv,
    })
}

/// Largest singular value; zero for an empty matrix.
pub fn spectral_norm<T: Real>(m: &CMat<T>) -> Result<T> {
    Ok(svd(m)?
        .singular_values
        .first()
        .copied()
        .unwrap_or_else(T::zero))
}

pub fn hermiticity_residual<T: Real>(m: &CMat<T>) -> Result<T> {
    ensure_square(m)?;
    Ok(frobenius(&(m - m.adjoint())))
}

pub fn normality_residual<T: Real>(m: &CMat<T>) -> Result<T> {
    ensure_square(m)?;
    let adj = m.adjoint();
    Ok(frobenius(&(m * &adj - &adj * m)))
}

/// `||M^† M - I||` in the Frobenius norm.
pub fn unitarity_residual<T: Real>(m: &CMat<T>) -> Result<T> {
    let n = ensure_square(m)?;
    Ok(frobenius(&(m.adjoint() * m - CMat::<T>::identity(n, n))))
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues unsorted.
fn hermitian_eigen<T: Real>(h: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let half = Complex::new(T::lit(0.5), T::zero());
    let sym = (h + h.adjoint()).map(|z| z * half);
    let eig = sym.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Principal square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-8, 0)` (relative to `max(1, ||H||)`) are clamped to
/// zero; anything more negative is rejected.
pub fn psd_sqrt<T: Real>(h: &CMat<T>) -> Result<CMat<T>> {
    ensure_square(h)?;
    ensure_finite(h, "psd_sqrt input")?;
    let scale = T::one().max(frobenius(h));
    let herm = hermiticity_residual(h)?;
    if herm > T::tol(tol::STRUCTURAL) * scale {
        return Err(Error::NotHermitian {
            residual: herm.as_f64(),
        });
    }
    let (vals, vecs) = hermitian_eigen(h);
    let floor = -T::tol(tol::PSD_REJECT) * scale;
    if let Some(&min) = vals.iter().min_by(|a, b| a.partial_cmp(b).unwrap()) {
        if min < floor {
            return Err(Error::NotPsd {
                min_eigenvalue: min.as_f64(),
            });
        }
    }
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let r = Complex::new(v.max(T::zero()).sqrt(), T::zero());
        for z in scaled.column_mut(j).iter_mut() {
            *z *= r;
        }
    }
    Ok(scaled * vecs.adjoint())
}

/// Unitarily diagonalizes a normal matrix.
///
/// The Hermitian and anti-Hermitian parts of a normal matrix commute, so the
/// eigenvectors of `H1 + t H2` for a generic real `t` diagonalize both. Within
/// clusters that remain degenerate the block is re-diagonalized with a second
/// `t` and the cluster is re-orthonormalized. Eigenvalues are ordered by
/// descending modulus, ties broken by ascending phase angle.
pub fn diagonalize_normal<T: Real>(n: &CMat<T>) -> Result<NormalDecomposition<T>> {
    let dim = ensure_square(n)?;
    ensure_finite(n, "diagonalize_normal input")?;
    let norm = frobenius(n);
    let scale = T::one().max(norm);
    let residual = normality_residual(n)?;
    if residual > T::tol(tol::NORMALITY) * scale * scale {
        return Err(Error::NotNormal {
            residual: residual.as_f64(),
        });
    }
    if dim == 0 {
        return Ok(NormalDecomposition {
            eigenvectors: CMat::zeros(0, 0),
            eigenvalues: Vec::new(),
        });
    }

    const MIXES: [f64; 3] = [0.618_033_988_749_894_9, 0.318_309_886_183_790_7, 1.414_213_562_373_095];
    let vecs = joint_eigenvectors(n, &MIXES);

    let ev: Vec<Complex<T>> = (0..dim)
        .map(|k| {
            let v = vecs.column(k);
            (v.adjoint() * n * v)[(0, 0)]
        })
        .collect();

    let mut order: Vec<usize> = (0..dim).collect();
    let key = |z: &Complex<T>| {
        let modulus = (z.re * z.re + z.im * z.im).sqrt().as_f64();
        ((modulus * 1e9).round() as i64, z.im.atan2(z.re).as_f64())
    };
    order.sort_by(|&a, &b| {
        let (ma, pa) = key(&ev[a]);
        let (mb, pb) = key(&ev[b]);
        mb.cmp(&ma)
            .then(pa.partial_cmp(&pb).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut eigenvectors = CMat::zeros(dim, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &vecs.column(src));
        eigenvalues.push(ev[src]);
    }
    let decomp = NormalDecomposition {
        eigenvectors,
        eigenvalues,
    };

    let recon = frobenius(&(decomp.reconstruct() - n));
    let ortho = unitarity_residual(&decomp.eigenvectors)?;
    if recon > T::tol(tol::STRUCTURAL) * scale || ortho > T::tol(tol::STRUCTURAL) {
        return Err(Error::Numerical(format!(
            "normal diagonalization residuals too large (reconstruction {:.3e}, orthonormality {:.3e})",
            recon.as_f64(),
            ortho.as_f64()
        )));
    }
    Ok(decomp)
}

/// Orthonormal eigenvectors shared by the Hermitian and anti-Hermitian parts
/// of `n`, refining degenerate clusters with successive mixing constants.
fn joint_eigenvectors<T: Real>(n: &CMat<T>, mixes: &[f64]) -> CMat<T> {
    let dim = n.nrows();
    let Some((&mix, rest)) = mixes.split_first() else {
        return CMat::identity(dim, dim);
    };
    let half = Complex::new(T::lit(0.5), T::zero());
    let adj = n.adjoint();
    let h1 = (n + &adj).map(|z| z * half);
    // (N - N^†) / 2i
    let h2 = (n - &adj).map(|z| Complex::new(z.im, -z.re) * half);
    let combined = h1 + h2.map(|z| z * Complex::new(T::lit(mix), T::zero()));
    let (vals, vecs) = hermitian_eigen(&combined);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let mut sorted = CMat::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vecs.column(src));
    }
    let gap = T::tol(tol::CLUSTER) * T::one().max(frobenius(&combined));

    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && vals[order[end]] - vals[order[end - 1]] <= gap {
            end += 1;
        }
        if end - start > 1 {
            let block = sorted.columns(start, end - start).into_owned();
            let restricted = block.adjoint() * n * &block;
            let inner = joint_eigenvectors(&restricted, rest);
            let mut refined = block * inner;
            gram_schmidt(&mut refined);
            for (j, col) in (start..end).enumerate() {
                sorted.set_column(col, &refined.column(j));
            }
        }
        start = end;
    }
    sorted
}

/// Modified Gram-Schmidt on the columns of `m`, in place.
pub fn gram_schmidt<T: Real>(m: &mut CMat<T>) {
    for j in 0..m.ncols() {
        for k in 0..j {
            let proj = (m.column(k).adjoint() * m.column(j))[(0, 0)];
            let ck = m.column(k).into_owned();
            let mut cj = m.column_mut(j);
            for (a, b) in cj.iter_mut().zip(ck.iter()) {
                *a -= *b * proj;
            }
        }
        let norm = m
            .column(j)
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt();
        if norm > T::zero() {
            let inv = Complex::new(T::one() / norm, T::zero());
            for z in m.column_mut(j).iter_mut() {
                *z *= inv;
            }
        }
    }
}

/// Block-diagonal `a ⊕ b`.
pub fn direct_sum<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Embeds a `k x k` block acting on `modes` into an `m x m` identity.
pub fn embed<T: Real>(block: &CMat<T>, modes: &[usize], m: usize) -> CMat<T> {
    let mut out = CMat::identity(m, m);
    for (i, &r) in modes.iter().enumerate() {
        for (j, &c) in modes.iter().enumerate() {
            out[(r, c)] = block[(i, j)];
        }
    }
    out
}

pub fn identity<T: Real>(m: usize) -> CMat<T> {
    CMat::identity(m, m)
}

pub(crate) fn real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

pub(crate) fn one<T: Real>() -> Complex<T> {
    Complex::one()
}

pub(crate) fn zero<T: Real>() -> Complex<T> {
    Complex::zero()
}
