//! Univariate complex polynomials in ascending-degree storage.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::linalg::{EigenError, Matrix};
use crate::scalar::{from_usize, Real, C};

/// `c₀ + c₁x + … + c_d x^d`, trailing coefficient nonzero unless zero polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoly<T> {
    coeffs: Vec<C<T>>,
}

impl<T: Real> ComplexPoly<T> {
    pub fn new(mut coeffs: Vec<C<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ComplexPoly { coeffs }
    }

    pub fn zero() -> Self {
        ComplexPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: C<T>) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::new(vec![C::zero(), C::one()])
    }

    /// `c₀ + c₁ x`
    pub fn linear(c0: C<T>, c1: C<T>) -> Self {
        Self::new(vec![c0, c1])
    }

    pub fn from_real(coeffs: &[T]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, T::zero())).collect())
    }

    pub fn coeffs(&self) -> &[C<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn has_real_coefficients(&self) -> bool {
        self.coeffs.iter().all(|c| c.im.is_zero())
    }

    pub fn eval(&self, x: C<T>) -> C<T> {
        self.coeffs.iter().rev().fold(C::zero(), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * from_usize::<T>(k))
                .collect(),
        )
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// `Σ |c_k| ρ^k`, an upper bound of `|p(x)|` on `|x| ≤ ρ`.
    pub fn modulus_bound(&self, rho: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * rho + c.norm())
    }

    /// All complex roots, via companion-matrix eigenvalues followed by a Newton polish.
    ///
    /// Leading coefficients below `rel_tol · max|c_k|` are treated as zero.
    pub fn roots(&self, rel_tol: T) -> Result<Vec<C<T>>, EigenError> {
        let scale = self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()));
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= rel_tol * scale) {
            coeffs.pop();
        }
        let deg = match coeffs.len() {
            0 | 1 => return Ok(Vec::new()),
            n => n - 1,
        };
        let lead = coeffs[deg];
        if deg == 1 {
            return Ok(vec![-coeffs[0] / lead]);
        }
        let companion = Matrix::from_fn(deg, |i, j| {
            if j == deg - 1 {
                -coeffs[i] / lead
            } else if i == j + 1 {
                C::one()
            } else {
                C::zero()
            }
        });
        let trimmed = ComplexPoly { coeffs };
        let dp = trimmed.derivative();
        let mut roots = companion.eigenvalues()?;
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let d = dp.eval(*r);
                if d.is_zero() {
                    break;
                }
                let step = trimmed.eval(*r) / d;
                let next = *r - step;
                if !(next.re.is_finite() && next.im.is_finite()) {
                    break;
                }
                if trimmed.eval(next).norm() <= trimmed.eval(*r).norm() {
                    *r = next;
                } else {
                    break;
                }
            }
        }
        Ok(roots)
    }
}

impl<T: Real> Add for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn add(self, rhs: Self) -> ComplexPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or_else(C::zero)
                        + rhs.coeffs.get(k).copied().unwrap_or_else(C::zero)
                })
                .collect(),
        )
    }
}

impl<T: Real> Sub for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn sub(self, rhs: Self) -> ComplexPoly<T> {
        self + &(-rhs)
    }
}

impl<T: Real> Neg for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn neg(self) -> ComplexPoly<T> {
        ComplexPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl<T: Real> Mul for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn mul(self, rhs: Self) -> ComplexPoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}

impl<T: Real> One for ComplexPoly<T> {
    fn one() -> Self {
        Self::constant(C::one())
    }
}

impl<T: Real> Mul for ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn mul(self, rhs: Self) -> ComplexPoly<T> {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trailing_zeros_trimmed() {
        let p = ComplexPoly::<f64>::new(vec![C::new(1.0, 0.0), C::zero(), C::zero()]);
        assert_eq!(p.degree(), Some(0));
        assert_eq!(ComplexPoly::<f64>::new(vec![C::zero()]).degree(), None);
    }

    #[test]
    fn horner_and_derivative() {
        // 1 + 2x + 3x^2 at x = i: 1 + 2i - 3
        let p = ComplexPoly::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(p.eval(C::new(0.0, 1.0)), C::new(-2.0, 2.0));
        assert_eq!(p.derivative(), ComplexPoly::from_real(&[2.0, 6.0]));
    }

    #[test]
    fn roots_of_product_of_linear_factors() {
        let rs = [C::new(1.0, 2.0), C::new(-0.5, 0.0), C::new(3.0, -1.0), C::new(0.0, 0.25)];
        let p = rs
            .iter()
            .fold(ComplexPoly::one(), |acc, &r| &acc * &ComplexPoly::linear(-r, C::one()));
        let found = p.roots(1e-14).unwrap();
        assert_eq!(found.len(), 4);
        for r in rs {
            assert!(found.iter().any(|z| (z - r).norm() < 1e-12), "{r}");
        }
    }

    #[test]
    fn negligible_leading_coefficient_drops_degree() {
        let p = ComplexPoly::new(vec![C::new(-2.0, 0.0), C::new(1.0, 0.0), C::new(1e-20, 0.0)]);
        let r = p.roots(1e-14).unwrap();
        assert_eq!(r, vec![C::new(2.0, 0.0)]);
        assert!(ComplexPoly::constant(C::new(3.0, 0.0)).roots(1e-14).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn arithmetic_is_consistent_with_evaluation(
            a in proptest::collection::vec(-3.0..3.0f64, 0..5),
            b in proptest::collection::vec(-3.0..3.0f64, 0..5),
            re in -2.0..2.0f64, im in -2.0..2.0f64,
        ) {
            let p = ComplexPoly::from_real(&a);
            let q = ComplexPoly::from_real(&b);
            let x = C::new(re, im);
            prop_assert!(((&p * &q).eval(x) - p.eval(x) * q.eval(x)).norm() < 1e-9);
            prop_assert!(((&p - &q).eval(x) - (p.eval(x) - q.eval(x))).norm() < 1e-9);
        }
    }
}
