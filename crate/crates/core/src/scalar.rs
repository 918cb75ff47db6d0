//! Scalar abstraction shared by every numerical module.
//!
//! All core routines are written against [`Real`], which is implemented for
//! `f32` and `f64`. Complex scalars are `num_complex::Complex<T>`, which is the
//! complex type nalgebra operates on.

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Real floating-point scalar usable throughout the crate.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Machine epsilon of the underlying format, widened to `f64`.
    const MACHINE_EPSILON: f64;

    /// Converts an `f64` literal into this scalar.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a tolerance expressed for double precision into this scalar.
    ///
    /// Tolerances are floored at `1024 * epsilon` so that single precision
    /// gets a usable threshold instead of one below its resolution.
    fn tol(t: f64) -> Self {
        Self::lit(t.max(Self::MACHINE_EPSILON * 1024.0))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const MACHINE_EPSILON: f64 = f32::EPSILON as f64;
}

impl Real for f64 {
    const MACHINE_EPSILON: f64 = f64::EPSILON;
}

/// Dense complex matrix over the scalar `T`.
pub type CMat<T> = DMatrix<Complex<T>>;

/// `e^{i theta}`.
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// Integer power by repeated squaring; valid for any complex base.
pub fn cpowu<T: Real>(z: Complex<T>, mut k: usize) -> Complex<T> {
    let mut base = z;
    let mut acc = Complex::new(T::one(), T::zero());
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        k >>= 1;
    }
    acc
}
