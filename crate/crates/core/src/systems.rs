//! Ready-made characteristic functions for the systems studied in this crate.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::charfun::{CharFun, CharFunError, MatrixFun};
use crate::kernels::DelayKernel;
use crate::poly::ComplexPoly;
use crate::scalar::{lit, Real, C};

/// `ż = a z + L ∫ z(t−τ) h(τ) dτ` with complex `a`.
pub fn scalar<T: Real>(a: C<T>, kernel: DelayKernel<T>) -> Result<CharFun<T>, CharFunError> {
    let q = MatrixFun::from_fn(1, |_, _| ComplexPoly::constant(a));
    let b = MatrixFun::from_fn(1, |_, _| ComplexPoly::x());
    CharFun::build(&q, &b, kernel)
}

/// `ż = z + L z(t − 1/2)`.
pub fn example1<T: Real>() -> CharFun<T> {
    scalar(C::one(), DelayKernel::dirac(lit(0.5))).expect("valid preset")
}

/// `ż = 0.1(1+i) z + L (z(t−1) − z)`.
pub fn example2<T: Real>() -> CharFun<T> {
    let c = Complex::new(lit(0.1), lit(0.1));
    let q = MatrixFun::from_fn(1, |_, _| ComplexPoly::linear(c, -C::<T>::one()));
    let b = MatrixFun::from_fn(1, |_, _| ComplexPoly::x());
    CharFun::build(&q, &b, DelayKernel::dirac(T::one())).expect("valid preset")
}

/// `ż = (a + id) z + L z(t − τ)`.
pub fn scalar_discrete<T: Real>(a: T, d: T, tau: T) -> Result<CharFun<T>, CharFunError> {
    scalar(Complex::new(a, d), DelayKernel::dirac(tau))
}

/// `ż = a z + L ∫ z(t−τ) h^n_T(τ) dτ` with a Gamma kernel.
pub fn scalar_gamma<T: Real>(a: T, n: u32, mean: T) -> Result<CharFun<T>, CharFunError> {
    scalar(Complex::new(a, T::zero()), DelayKernel::gamma(n, mean))
}

/// Transverse mode of the car-following model: `ż = L ∫ z(t−τ) h(τ) dτ`.
pub fn carfollowing<T: Real>(kernel: DelayKernel<T>) -> Result<CharFun<T>, CharFunError> {
    scalar(C::zero(), kernel)
}

/// Mode of the delayed-PD second-order agent network,
/// `F = λ² − aλ − b − (k₁ + k₂λ) L ĥ(λ)` with the exponential kernel of mean `T`
/// (`T = 0` means undelayed coupling).
pub fn mas<T: Real>(a: T, b: T, k1: T, k2: T, mean: T) -> Result<CharFun<T>, CharFunError> {
    let kernel = if mean.is_zero() {
        DelayKernel::dirac(T::zero())
    } else {
        DelayKernel::exponential(mean)
    };
    mas_with_kernel(a, b, k1, k2, kernel)
}

pub fn mas_with_kernel<T: Real>(
    a: T,
    b: T,
    k1: T,
    k2: T,
    kernel: DelayKernel<T>,
) -> Result<CharFun<T>, CharFunError> {
    let zero = T::zero();
    let q = MatrixFun::constant_real(2, &[zero, T::one(), b, a]);
    let bm = MatrixFun::from_fn(2, |i, j| match (i, j) {
        (1, 0) => ComplexPoly::from_real(&[zero, k1]),
        (1, 1) => ComplexPoly::from_real(&[zero, k2]),
        _ => ComplexPoly::zero(),
    });
    CharFun::build(&q, &bm, kernel)
}

/// Linearization of the Ott–Antonsen order-parameter equation about `r = 0`:
/// `ṙ = (K/2 − 1 + id) r + L ∫ r(t−τ) h(τ) dτ`.
pub fn kuramoto_linear<T: Real>(
    coupling: T,
    d: T,
    kernel: DelayKernel<T>,
) -> Result<CharFun<T>, CharFunError> {
    scalar(Complex::new(coupling * lit(0.5) - T::one(), d), kernel)
}
