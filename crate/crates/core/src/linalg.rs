//! Small dense complex linear algebra: determinants and eigenvalues.
//!
//! Eigenvalues come from the classical pipeline: diagonal balancing, Householder
//! reduction to upper Hessenberg form, then single-shift QR iteration with
//! Wilkinson shifts and periodic exceptional shifts. Only eigenvalues are
//! computed; the unitary factors are never accumulated.

use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{lit, Real, C};

/// Iteration budget per eigenvalue.
pub const QR_MAX_ITER: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("QR iteration did not converge: {found} of {n} eigenvalues found after {iterations} sweeps on the active block ending at row {row}")]
    NoConvergence {
        n: usize,
        found: usize,
        iterations: usize,
        row: usize,
    },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<C<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![C::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_real(n: usize, rows: &[T]) -> Self {
        assert_eq!(rows.len(), n * n, "row-major data of wrong length");
        Matrix {
            n,
            data: rows.iter().map(|&x| Complex::new(x, T::zero())).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> C<T> {
        (0..self.n).fold(C::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[C<T>]) -> Vec<C<T>> {
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).fold(C::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> C<T> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = C::<T>::one();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| a[x * n + k].norm().partial_cmp(&a[y * n + k].norm()).unwrap())
                .unwrap();
            if a[p * n + k].is_zero() {
                return C::zero();
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[k * n + j];
                    a[i * n + j] -= f * v;
                }
            }
        }
        det
    }

    /// All eigenvalues, in no particular order.
    pub fn eigenvalues(&self) -> Result<Vec<C<T>>, EigenError> {
        if self.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(EigenError::NonFinite);
        }
        let mut h = self.clone();
        h.balance();
        h.reduce_to_hessenberg();
        h.hessenberg_qr()
    }

    /// Parlett–Reinsch balancing by powers of two.
    fn balance(&mut self) {
        let n = self.n;
        let radix = lit::<T>(2.0);
        let sq = radix * radix;
        let mut done = false;
        while !done {
            done = true;
            for i in 0..n {
                let mut r = T::zero();
                let mut c = T::zero();
                for j in 0..n {
                    if j != i {
                        c += self[(j, i)].l1_norm();
                        r += self[(i, j)].l1_norm();
                    }
                }
                if c.is_zero() || r.is_zero() {
                    continue;
                }
                let s = c + r;
                let mut g = r / radix;
                let mut f = T::one();
                while c < g {
                    f *= radix;
                    c *= sq;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sq;
                }
                if (c + r) / f < lit::<T>(0.95) * s {
                    done = false;
                    let inv = T::one() / f;
                    for j in 0..n {
                        self[(i, j)] = self[(i, j)] * inv;
                    }
                    for j in 0..n {
                        self[(j, i)] = self[(j, i)] * f;
                    }
                }
            }
        }
    }

    /// Householder similarity reduction to upper Hessenberg form.
    fn reduce_to_hessenberg(&mut self) {
        let n = self.n;
        if n < 3 {
            return;
        }
        for k in 0..n - 2 {
            let alpha_norm = (k + 1..n)
                .map(|i| self[(i, k)].norm_sqr())
                .fold(T::zero(), |a, b| a + b)
                .sqrt();
            if alpha_norm.is_zero() {
                continue;
            }
            let x0 = self[(k + 1, k)];
            let phase = if x0.norm().is_zero() {
                C::one()
            } else {
                x0 / x0.norm()
            };
            // v = x + e^{i arg x0} ‖x‖ e1, reflector P = I - 2 v v^H / v^H v
            let mut v: Vec<C<T>> = (k + 1..n).map(|i| self[(i, k)]).collect();
            v[0] += phase * alpha_norm;
            let vnorm2 = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
            if vnorm2.is_zero() {
                continue;
            }
            let two = lit::<T>(2.0);
            // A <- P A  (rows k+1..n)
            for j in 0..n {
                let dot = v
                    .iter()
                    .enumerate()
                    .fold(C::zero(), |acc, (t, vi)| acc + vi.conj() * self[(k + 1 + t, j)]);
                let f = dot * two / vnorm2;
                for (t, vi) in v.iter().enumerate() {
                    let idx = (k + 1 + t, j);
                    self[idx] = self[idx] - vi * f;
                }
            }
            // A <- A P  (columns k+1..n)
            for i in 0..n {
                let dot = v
                    .iter()
                    .enumerate()
                    .fold(C::zero(), |acc, (t, vi)| acc + self[(i, k + 1 + t)] * vi);
                let f = dot * two / vnorm2;
                for (t, vi) in v.iter().enumerate() {
                    let idx = (i, k + 1 + t);
                    self[idx] = self[idx] - f * vi.conj();
                }
            }
            for i in k + 2..n {
                self[(i, k)] = C::zero();
            }
        }
    }

    /// Shifted QR on an upper Hessenberg matrix; consumes `self`.
    fn hessenberg_qr(mut self) -> Result<Vec<C<T>>, EigenError> {
        let n = self.n;
        let eps = T::epsilon();
        let mut eig = vec![C::zero(); n];
        if n == 0 {
            return Ok(eig);
        }
        let mut hi = n - 1;
        let mut iter = 0usize;
        let mut total_found = 0usize;
        loop {
            if hi == 0 {
                eig[0] = self[(0, 0)];
                break;
            }
            // look for a negligible subdiagonal entry
            let mut l = hi;
            while l > 0 {
                let s = self[(l - 1, l - 1)].l1_norm() + self[(l, l)].l1_norm();
                let s = if s.is_zero() { self.max_abs() } else { s };
                if self[(l, l - 1)].l1_norm() <= eps * s {
                    self[(l, l - 1)] = C::zero();
                    break;
                }
                l -= 1;
            }
            if l == hi {
                eig[hi] = self[(hi, hi)];
                total_found += 1;
                hi -= 1;
                iter = 0;
                continue;
            }
            iter += 1;
            if iter > QR_MAX_ITER {
                return Err(EigenError::NoConvergence {
                    n,
                    found: total_found,
                    iterations: iter - 1,
                    row: hi,
                });
            }
            let shift = if iter % 10 == 0 {
                // exceptional shift to break cycles
                let s = self[(hi, hi - 1)].re.abs()
                    + if hi >= 2 { self[(hi - 1, hi - 2)].re.abs() } else { T::zero() };
                self[(hi, hi)] + C::new(s, s) * lit::<T>(0.75)
            } else {
                self.wilkinson_shift(hi)
            };
            self.qr_sweep(l, hi, shift);
        }
        Ok(eig)
    }

    /// Eigenvalue of the trailing 2×2 block of the active window closest to its last diagonal entry.
    fn wilkinson_shift(&self, hi: usize) -> C<T> {
        let a = self[(hi - 1, hi - 1)];
        let b = self[(hi - 1, hi)];
        let c = self[(hi, hi - 1)];
        let d = self[(hi, hi)];
        let half = lit::<T>(0.5);
        let tr = (a + d) * half;
        let disc = ((a - d) * half * (a - d) * half + b * c).sqrt();
        let e1 = tr + disc;
        let e2 = tr - disc;
        if (e1 - d).norm() < (e2 - d).norm() {
            e1
        } else {
            e2
        }
    }

    /// One explicit-shift QR step on rows/columns `lo..=hi`.
    fn qr_sweep(&mut self, lo: usize, hi: usize, shift: C<T>) {
        for k in lo..=hi {
            self[(k, k)] -= shift;
        }
        let mut rots: Vec<(C<T>, C<T>)> = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let a = self[(k, k)];
            let b = self[(k + 1, k)];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (ca, cb) = if r.is_zero() {
                (C::one(), C::zero())
            } else {
                (a / r, b / r)
            };
            // G = [[conj(ca), conj(cb)], [-cb, ca]]
            for j in k..=hi {
                let x = self[(k, j)];
                let y = self[(k + 1, j)];
                self[(k, j)] = ca.conj() * x + cb.conj() * y;
                self[(k + 1, j)] = -cb * x + ca * y;
            }
            rots.push((ca, cb));
        }
        for (t, &(ca, cb)) in rots.iter().enumerate() {
            let k = lo + t;
            let top = (k + 2).min(hi);
            // right-multiply by G^H
            for i in lo..=top {
                let x = self[(i, k)];
                let y = self[(i, k + 1)];
                self[(i, k)] = x * ca + y * cb;
                self[(i, k + 1)] = -x * cb.conj() + y * ca.conj();
            }
        }
        for k in lo..=hi {
            self[(k, k)] += shift;
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.n + j]
    }
}
