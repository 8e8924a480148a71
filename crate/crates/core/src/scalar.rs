//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All geometry is written against [`Real`], which is implemented for `f32`
//! and `f64`. Complex amplitudes are `Complex<T>` with the same real type.

use std::fmt;

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable as the base field of the geometry.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + fmt::Display + fmt::Debug
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Converts an integer count into this scalar.
    #[inline]
    fn count(n: usize) -> Self {
        nalgebra::convert(n as f64)
    }

    /// Lossy conversion used for serialization and reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Dense complex matrix over a real scalar.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex column vector over a real scalar.
pub type CVector<T> = DVector<Complex<T>>;
/// Dense real matrix.
pub type RMatrix<T> = DMatrix<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// Modulus of a complex number for any [`Real`] base type.
pub trait Modulus<T> {
    fn modulus_r(&self) -> T;
}

impl<T: Real> Modulus<T> for Complex<T> {
    #[inline]
    fn modulus_r(&self) -> T {
        self.norm_sqr().sqrt()
    }
}
