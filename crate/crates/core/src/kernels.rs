//! Delay distributions `h(τ)` and their Laplace transforms `ĥ(λ)`.
//!
//! Every kernel is a probability density on `[0, ∞)` (or a point mass), so
//! `ĥ(0) = 1` and `|ĥ(λ)| ≤ 1` on the closed right half-plane. The closed
//! forms used here are entire (Dirac, Uniform) or rational (Gamma,
//! Exponential), so they also define the analytic continuation to
//! `Re λ < 0`, which is what [`DelayKernel::laplace_continued`] evaluates.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{from_usize, lit, Real, C};

/// Below this value of `|λ|·A` the uniform kernel switches to its Taylor series.
const UNIFORM_SERIES_SWITCH: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel transform has a pole at lambda = {re} + {im}i")]
    Pole { re: f64, im: f64 },
    #[error("lambda = {re} + {im}i lies in the open left half-plane; use analytic continuation")]
    OutsideHalfPlane { re: f64, im: f64 },
    #[error("invalid kernel parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Delay distribution with a closed-form Laplace transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DelayKernel<T> {
    /// Point mass at `tau`: a discrete delay.
    Dirac { tau: T },
    /// Uniform density on `[offset, offset + width]`.
    Uniform {
        #[serde(rename = "a")]
        offset: T,
        #[serde(rename = "A")]
        width: T,
    },
    /// Gamma density of shape `n` and mean `mean`.
    Gamma {
        n: u32,
        #[serde(rename = "T")]
        mean: T,
    },
    /// Exponential density of mean `mean`; the `n = 1` Gamma kernel.
    Exponential {
        #[serde(rename = "T")]
        mean: T,
    },
}

impl<T: Real> DelayKernel<T> {
    pub fn dirac(tau: T) -> Self {
        DelayKernel::Dirac { tau }
    }

    pub fn gamma(n: u32, mean: T) -> Self {
        DelayKernel::Gamma { n, mean }
    }

    pub fn exponential(mean: T) -> Self {
        DelayKernel::Exponential { mean }
    }

    pub fn uniform(offset: T, width: T) -> Self {
        DelayKernel::Uniform { offset, width }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let ok = match *self {
            DelayKernel::Dirac { tau } => tau >= T::zero() && tau.is_finite(),
            DelayKernel::Uniform { offset, width } => {
                offset >= T::zero() && width > T::zero() && (offset + width).is_finite()
            }
            DelayKernel::Gamma { n, mean } => n >= 1 && mean > T::zero() && mean.is_finite(),
            DelayKernel::Exponential { mean } => mean > T::zero() && mean.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(KernelError::InvalidParameter(match self {
                DelayKernel::Dirac { .. } => "dirac delay must be finite and nonnegative",
                DelayKernel::Uniform { .. } => "uniform kernel needs offset >= 0 and width > 0",
                DelayKernel::Gamma { .. } => "gamma kernel needs n >= 1 and mean > 0",
                DelayKernel::Exponential { .. } => "exponential kernel needs mean > 0",
            }))
        }
    }

    /// Mean delay `∫ τ h(τ) dτ`.
    pub fn mean(&self) -> T {
        match *self {
            DelayKernel::Dirac { tau } => tau,
            DelayKernel::Uniform { offset, width } => offset + width * lit(0.5),
            DelayKernel::Gamma { mean, .. } | DelayKernel::Exponential { mean } => mean,
        }
    }

    /// Largest rate at which `arg ĥ(iβ)` can turn per unit of `β`.
    ///
    /// Used to size contour samplings along the imaginary axis.
    pub fn phase_rate(&self) -> T {
        match *self {
            DelayKernel::Dirac { tau } => tau,
            DelayKernel::Uniform { offset, width } => offset + width,
            DelayKernel::Gamma { mean, .. } | DelayKernel::Exponential { mean } => mean,
        }
    }

    /// `ĥ(λ)` on the closed right half-plane.
    pub fn laplace(&self, lambda: C<T>) -> Result<C<T>, KernelError> {
        self.check_half_plane(lambda)?;
        self.laplace_continued(lambda)
    }

    /// `dĥ/dλ` on the closed right half-plane.
    pub fn laplace_derivative(&self, lambda: C<T>) -> Result<C<T>, KernelError> {
        self.check_half_plane(lambda)?;
        self.laplace_derivative_continued(lambda)
    }

    /// `ĥ(λ)` through its analytic continuation; only the Gamma pole fails.
    pub fn laplace_continued(&self, lambda: C<T>) -> Result<C<T>, KernelError> {
        match *self {
            DelayKernel::Dirac { tau } => Ok((-lambda * tau).exp()),
            DelayKernel::Gamma { n, mean } => gamma_transform(n, mean, lambda),
            DelayKernel::Exponential { mean } => gamma_transform(1, mean, lambda),
            DelayKernel::Uniform { offset, width } => {
                let x = lambda * width;
                let head = (-lambda * offset).exp();
                Ok(head * one_minus_exp_over(x))
            }
        }
    }

    /// `dĥ/dλ` through its analytic continuation.
    pub fn laplace_derivative_continued(&self, lambda: C<T>) -> Result<C<T>, KernelError> {
        match *self {
            DelayKernel::Dirac { tau } => Ok(-(-lambda * tau).exp() * tau),
            DelayKernel::Gamma { n, mean } => gamma_derivative(n, mean, lambda),
            DelayKernel::Exponential { mean } => gamma_derivative(1, mean, lambda),
            DelayKernel::Uniform { offset, width } => {
                // ĥ = e^{-aλ} g(Aλ),  g(x) = (1 - e^{-x})/x
                let x = lambda * width;
                let head = (-lambda * offset).exp();
                Ok(head * (one_minus_exp_over_prime(x) * width - one_minus_exp_over(x) * offset))
            }
        }
    }

    fn check_half_plane(&self, lambda: C<T>) -> Result<(), KernelError> {
        if lambda.re < T::zero() {
            Err(KernelError::OutsideHalfPlane {
                re: lambda.re.to_f64().unwrap_or(f64::NAN),
                im: lambda.im.to_f64().unwrap_or(f64::NAN),
            })
        } else {
            Ok(())
        }
    }
}

fn gamma_base<T: Real>(n: u32, mean: T, lambda: C<T>) -> Result<C<T>, KernelError> {
    let base = lambda * (mean / from_usize::<T>(n as usize)) + T::one();
    if base.norm_sqr() == T::zero() {
        return Err(KernelError::Pole {
            re: lambda.re.to_f64().unwrap_or(f64::NAN),
            im: lambda.im.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(base)
}

/// `(1 + λT/n)^{-n}`
fn gamma_transform<T: Real>(n: u32, mean: T, lambda: C<T>) -> Result<C<T>, KernelError> {
    let base = gamma_base(n, mean, lambda)?;
    Ok(base.powi(n as i32).inv())
}

/// `-T (1 + λT/n)^{-n-1}`
fn gamma_derivative<T: Real>(n: u32, mean: T, lambda: C<T>) -> Result<C<T>, KernelError> {
    let base = gamma_base(n, mean, lambda)?;
    Ok(-base.powi(n as i32 + 1).inv() * mean)
}

/// `(1 - e^{-x}) / x`, continuous at `x = 0`.
fn one_minus_exp_over<T: Real>(x: C<T>) -> C<T> {
    if x.norm() < lit(UNIFORM_SERIES_SWITCH) {
        // 1 - x/2 + x²/6 - x³/24
        let one = Complex::new(T::one(), T::zero());
        one + x * (-one * lit::<T>(0.5) + x * (one / lit::<T>(6.0) - x / lit::<T>(24.0)))
    } else {
        (-(-x).exp() + T::one()) / x
    }
}

/// Derivative of `(1 - e^{-x}) / x` with respect to `x`.
fn one_minus_exp_over_prime<T: Real>(x: C<T>) -> C<T> {
    if x.norm() < lit(UNIFORM_SERIES_SWITCH) {
        // -1/2 + x/3 - x²/8 + x³/30
        let one = Complex::new(T::one(), T::zero());
        -one * lit::<T>(0.5) + x * (one / lit::<T>(3.0) + x * (-one / lit::<T>(8.0) + x / lit::<T>(30.0)))
    } else {
        let e = (-x).exp();
        (x * e - (-e + T::one())) / (x * x)
    }
}
