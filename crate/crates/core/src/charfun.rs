//! Characteristic functions `F(λ, L) = det[λI − Q(L) − B(L) ĥ(λ)]`.
//!
//! The determinant is expanded symbolically with `λ` and `s = ĥ(λ)` treated as
//! independent indeterminates, which yields the term table
//!
//! ```text
//! F(λ, L) = λ^q − Σ_{k<q, k+j≤q} P_{k,j}(L) λ^k ĥ(λ)^j
//! ```
//!
//! with every `P_{k,j}` a polynomial in `L`. Keeping `F` monic in `λ^q` is what
//! rules out characteristic roots escaping to infinity in the right
//! half-plane, so constructors reject any term table that breaks it.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::kernels::{DelayKernel, KernelError};
use crate::linalg::Matrix;
use crate::poly::ComplexPoly;
use crate::scalar::{from_usize, lit, Real, C};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharFunError {
    #[error("Q is {q}x{q} but B is {b}x{b}")]
    DimensionMismatch { q: usize, b: usize },
    #[error("system dimension must be at least 1")]
    EmptySystem,
    #[error("matrix function needs {expected} entries, got {got}")]
    BadEntryCount { expected: usize, got: usize },
    #[error("term lambda^{k} h^{j} at top degree q = {q}: neutral-type system, cannot be expressed with a monic characteristic function")]
    NeutralType { k: usize, j: usize, q: usize },
    #[error("term lambda^{k} h^{j} exceeds total degree q = {q}")]
    TermOutOfRange { k: usize, j: usize, q: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// `q × q` matrix whose entries are polynomials in `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFun<T> {
    q: usize,
    entries: Vec<ComplexPoly<T>>,
}

impl<T: Real> MatrixFun<T> {
    /// Row-major entries.
    pub fn new(q: usize, entries: Vec<ComplexPoly<T>>) -> Result<Self, CharFunError> {
        if q == 0 {
            return Err(CharFunError::EmptySystem);
        }
        if entries.len() != q * q {
            return Err(CharFunError::BadEntryCount {
                expected: q * q,
                got: entries.len(),
            });
        }
        Ok(MatrixFun { q, entries })
    }

    pub fn from_fn(q: usize, mut f: impl FnMut(usize, usize) -> ComplexPoly<T>) -> Self {
        let entries = (0..q * q).map(|idx| f(idx / q, idx % q)).collect();
        MatrixFun { q, entries }
    }

    pub fn zeros(q: usize) -> Self {
        Self::from_fn(q, |_, _| ComplexPoly::zero())
    }

    /// Constant matrix with real entries (row-major).
    pub fn constant_real(q: usize, rows: &[T]) -> Self {
        Self::from_fn(q, |i, j| ComplexPoly::from_real(&[rows[i * q + j]]))
    }

    pub fn dim(&self) -> usize {
        self.q
    }

    pub fn entry(&self, i: usize, j: usize) -> &ComplexPoly<T> {
        &self.entries[i * self.q + j]
    }

    pub fn eval(&self, l: C<T>) -> Matrix<T> {
        Matrix::from_fn(self.q, |i, j| self.entry(i, j).eval(l))
    }
}

/// Polynomial in `λ` and `s` with coefficients polynomial in `L`.
#[derive(Debug, Clone, Default)]
struct TriPoly<T> {
    terms: BTreeMap<(usize, usize), ComplexPoly<T>>,
}

impl<T: Real> TriPoly<T> {
    fn single(k: usize, j: usize, p: ComplexPoly<T>) -> Self {
        let mut t = TriPoly { terms: BTreeMap::new() };
        if !p.is_zero() {
            t.terms.insert((k, j), p);
        }
        t
    }

    fn add_assign(&mut self, other: &TriPoly<T>, sign: C<T>) {
        for (&key, p) in &other.terms {
            let sum = match self.terms.get(&key) {
                Some(cur) => cur + &p.scale(sign),
                None => p.scale(sign),
            };
            if sum.is_zero() {
                self.terms.remove(&key);
            } else {
                self.terms.insert(key, sum);
            }
        }
    }

    fn mul(&self, other: &TriPoly<T>) -> TriPoly<T> {
        let mut out = TriPoly { terms: BTreeMap::new() };
        for (&(k1, j1), p1) in &self.terms {
            for (&(k2, j2), p2) in &other.terms {
                out.add_assign(&TriPoly::single(k1 + k2, j1 + j2, p1 * p2), C::one());
            }
        }
        out
    }
}

/// Cofactor expansion along the first row; `q ≤ 4` in every use.
fn tri_det<T: Real>(m: &[Vec<TriPoly<T>>]) -> TriPoly<T> {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = TriPoly::default();
    for col in 0..n {
        if m[0][col].terms.is_empty() {
            continue;
        }
        let minor: Vec<Vec<TriPoly<T>>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != col)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let sign = if col % 2 == 0 { C::one() } else { -C::<T>::one() };
        acc.add_assign(&m[0][col].mul(&tri_det(&minor)), sign);
    }
    acc
}

/// Characteristic function in term-table form.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFun<T> {
    q: usize,
    kernel: DelayKernel<T>,
    terms: BTreeMap<(usize, usize), ComplexPoly<T>>,
}

impl<T: Real> CharFun<T> {
    /// Expands `det[λI − Q(L) − B(L)ĥ(λ)]` symbolically.
    pub fn build(
        q_mat: &MatrixFun<T>,
        b_mat: &MatrixFun<T>,
        kernel: DelayKernel<T>,
    ) -> Result<Self, CharFunError> {
        let q = q_mat.dim();
        if b_mat.dim() != q {
            return Err(CharFunError::DimensionMismatch { q, b: b_mat.dim() });
        }
        kernel.validate()?;
        let grid: Vec<Vec<TriPoly<T>>> = (0..q)
            .map(|i| {
                (0..q)
                    .map(|j| {
                        let mut e = TriPoly::single(0, 0, -q_mat.entry(i, j));
                        e.add_assign(&TriPoly::single(0, 1, -b_mat.entry(i, j)), C::one());
                        if i == j {
                            e.add_assign(&TriPoly::single(1, 0, ComplexPoly::one()), C::one());
                        }
                        e
                    })
                    .collect()
            })
            .collect();
        let det = tri_det(&grid);
        let mut terms = BTreeMap::new();
        for ((k, j), p) in det.terms {
            if (k, j) == (q, 0) {
                debug_assert_eq!(p, ComplexPoly::one());
                continue;
            }
            terms.insert((k, j), -&p);
        }
        Self::from_terms(q, kernel, terms)
    }

    /// Builds directly from `P_{k,j}`; `F = λ^q − Σ P_{k,j}(L) λ^k ĥ^j`.
    pub fn from_terms(
        q: usize,
        kernel: DelayKernel<T>,
        terms: BTreeMap<(usize, usize), ComplexPoly<T>>,
    ) -> Result<Self, CharFunError> {
        if q == 0 {
            return Err(CharFunError::EmptySystem);
        }
        kernel.validate()?;
        let mut kept = BTreeMap::new();
        for ((k, j), p) in terms {
            if p.is_zero() {
                continue;
            }
            if k >= q {
                return Err(CharFunError::NeutralType { k, j, q });
            }
            if k + j > q {
                return Err(CharFunError::TermOutOfRange { k, j, q });
            }
            kept.insert((k, j), p);
        }
        Ok(CharFun {
            q,
            kernel,
            terms: kept,
        })
    }

    pub fn dim(&self) -> usize {
        self.q
    }

    pub fn kernel(&self) -> &DelayKernel<T> {
        &self.kernel
    }

    pub fn terms(&self) -> &BTreeMap<(usize, usize), ComplexPoly<T>> {
        &self.terms
    }

    /// Largest power of `L` appearing in any term.
    pub fn degree_in_l(&self) -> usize {
        self.terms.values().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    /// All `P_{k,j}` have real coefficients, so roots and curves are conjugate-symmetric.
    pub fn has_real_coefficients(&self) -> bool {
        self.terms.values().all(|p| p.has_real_coefficients())
    }

    /// Replaces the kernel, keeping the term table.
    pub fn with_kernel(&self, kernel: DelayKernel<T>) -> Result<Self, CharFunError> {
        kernel.validate()?;
        Ok(CharFun {
            q: self.q,
            kernel,
            terms: self.terms.clone(),
        })
    }

    fn powers(&self, lambda: C<T>) -> Result<(C<T>, C<T>), CharFunError> {
        let h = self.kernel.laplace_continued(lambda)?;
        let dh = self.kernel.laplace_derivative_continued(lambda)?;
        Ok((h, dh))
    }

    pub fn eval(&self, lambda: C<T>, l: C<T>) -> Result<C<T>, CharFunError> {
        let h = self.kernel.laplace_continued(lambda)?;
        Ok(self.eval_with_transform(lambda, h, l))
    }

    /// `F` when `ĥ(λ)` is already known.
    pub fn eval_with_transform(&self, lambda: C<T>, h: C<T>, l: C<T>) -> C<T> {
        let mut f = lambda.powi(self.q as i32);
        for (&(k, j), p) in &self.terms {
            f -= p.eval(l) * lambda.powi(k as i32) * h.powi(j as i32);
        }
        f
    }

    /// `∂F/∂λ`, exact.
    pub fn d_lambda(&self, lambda: C<T>, l: C<T>) -> Result<C<T>, CharFunError> {
        let (h, dh) = self.powers(lambda)?;
        let q = self.q as i32;
        let mut d = lambda.powi(q - 1) * from_usize::<T>(self.q);
        for (&(k, j), p) in &self.terms {
            let pv = p.eval(l);
            let mut term = C::zero();
            if k > 0 {
                term += lambda.powi(k as i32 - 1) * from_usize::<T>(k) * h.powi(j as i32);
            }
            if j > 0 {
                term += lambda.powi(k as i32) * h.powi(j as i32 - 1) * dh * from_usize::<T>(j);
            }
            d -= pv * term;
        }
        Ok(d)
    }

    /// `∂F/∂L`, exact.
    pub fn d_l(&self, lambda: C<T>, l: C<T>) -> Result<C<T>, CharFunError> {
        let h = self.kernel.laplace_continued(lambda)?;
        Ok(self.d_l_with_transform(lambda, h, l))
    }

    pub fn d_l_with_transform(&self, lambda: C<T>, h: C<T>, l: C<T>) -> C<T> {
        let mut d = C::zero();
        for (&(k, j), p) in &self.terms {
            d -= p.derivative().eval(l) * lambda.powi(k as i32) * h.powi(j as i32);
        }
        d
    }

    /// `F(λ, ·)` as a polynomial in `L` for fixed `λ`.
    pub fn l_polynomial(&self, lambda: C<T>) -> Result<ComplexPoly<T>, CharFunError> {
        let h = self.kernel.laplace_continued(lambda)?;
        let mut acc = ComplexPoly::constant(lambda.powi(self.q as i32));
        for (&(k, j), p) in &self.terms {
            acc = &acc - &p.scale(lambda.powi(k as i32) * h.powi(j as i32));
        }
        Ok(acc)
    }

    /// For rational kernels, `F(λ, L)·(1 + λT/n)^{n·J}` as a polynomial in `λ`,
    /// `J` the highest power of `ĥ`. Its extra roots sit at `λ = −n/T`, in the
    /// open left half-plane, so the right-half-plane root count is unchanged.
    pub fn rational_form(&self, l: C<T>) -> Option<ComplexPoly<T>> {
        let (n, mean) = match self.kernel {
            DelayKernel::Gamma { n, mean } => (n as usize, mean),
            DelayKernel::Exponential { mean } => (1, mean),
            DelayKernel::Dirac { tau } if tau.is_zero() => (0, T::zero()),
            _ => return None,
        };
        let jmax = self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0);
        let base = if n == 0 {
            ComplexPoly::one()
        } else {
            ComplexPoly::linear(C::one(), Complex::new(mean / from_usize::<T>(n), T::zero()))
        };
        let pow = |e: usize| (0..e).fold(ComplexPoly::one(), |acc, _| &acc * &base);
        let lam_pow = |k: usize| {
            let mut c = vec![C::zero(); k + 1];
            c[k] = C::one();
            ComplexPoly::new(c)
        };
        let mut acc = &lam_pow(self.q) * &pow(n * jmax);
        for (&(k, j), p) in &self.terms {
            let term = (&lam_pow(k) * &pow(n * (jmax - j))).scale(p.eval(l));
            acc = &acc - &term;
        }
        Some(acc)
    }

    /// Smallest `R` (to a few percent) with `Σ R^{k−q} max_{|L−c|≤ρ}|P_{k,j}(L)| ≤ 1/2`.
    ///
    /// For `|λ| ≥ R` with `Re λ ≥ 0` and `L` in the disk this gives
    /// `|F(λ, L)| ≥ |λ|^q / 2`, so every unstable root lies inside the
    /// half-disk of radius `R`.
    pub fn radius_bound(&self, center: C<T>, radius: T) -> T {
        let outer = center.norm() + radius.abs();
        let bounds: Vec<(usize, T)> = self
            .terms
            .iter()
            .map(|(&(k, _), p)| (k, p.modulus_bound(outer)))
            .collect();
        let q = self.q as i32;
        let excess = |r: T| {
            bounds
                .iter()
                .fold(T::zero(), |acc, &(k, m)| acc + m * r.powi(k as i32 - q))
        };
        let half = lit::<T>(0.5);
        if bounds.iter().all(|&(_, m)| m.is_zero()) {
            return T::one();
        }
        let floor = lit::<T>(1e-6);
        let mut hi = T::one();
        while excess(hi) > half {
            hi = hi * lit(2.0);
        }
        let mut lo = hi * half;
        while excess(lo) <= half {
            if lo <= floor {
                return lo;
            }
            hi = lo;
            lo = lo * half;
        }
        for _ in 0..40 {
            let mid = (lo + hi) * half;
            if excess(mid) <= half {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}
