//! Planar helpers on the complex `L` plane.

use num_complex::Complex;

use crate::scalar::{lit, Real, C};

/// Axis-aligned rectangle `[re_lo, re_hi] × [im_lo, im_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T> {
    pub re_lo: T,
    pub re_hi: T,
    pub im_lo: T,
    pub im_hi: T,
}

impl<T: Real> Window<T> {
    pub fn new(re_lo: T, re_hi: T, im_lo: T, im_hi: T) -> Self {
        Window {
            re_lo,
            re_hi,
            im_lo,
            im_hi,
        }
    }

    /// Square `[−h, h]²`.
    pub fn square(h: T) -> Self {
        Self::new(-h, h, -h, h)
    }

    pub fn is_valid(&self) -> bool {
        self.re_lo < self.re_hi
            && self.im_lo < self.im_hi
            && [self.re_lo, self.re_hi, self.im_lo, self.im_hi]
                .iter()
                .all(|x| x.is_finite())
    }

    pub fn width(&self) -> T {
        self.re_hi - self.re_lo
    }

    pub fn height(&self) -> T {
        self.im_hi - self.im_lo
    }

    pub fn diagonal(&self) -> T {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> C<T> {
        let half = lit::<T>(0.5);
        Complex::new((self.re_lo + self.re_hi) * half, (self.im_lo + self.im_hi) * half)
    }

    /// Largest modulus of any point in the window.
    pub fn outer_radius(&self) -> T {
        self.corners().iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn corners(&self) -> [C<T>; 4] {
        [
            Complex::new(self.re_lo, self.im_lo),
            Complex::new(self.re_hi, self.im_lo),
            Complex::new(self.re_hi, self.im_hi),
            Complex::new(self.re_lo, self.im_hi),
        ]
    }

    pub fn contains(&self, z: C<T>) -> bool {
        z.re >= self.re_lo && z.re <= self.re_hi && z.im >= self.im_lo && z.im <= self.im_hi
    }
}

/// 2-D cross product `Im(conj(a)·b)`.
#[inline]
pub fn cross<T: Real>(a: C<T>, b: C<T>) -> T {
    a.re * b.im - a.im * b.re
}

/// 2-D dot product `Re(conj(a)·b)`.
#[inline]
pub fn dot<T: Real>(a: C<T>, b: C<T>) -> T {
    a.re * b.re + a.im * b.im
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance<T: Real>(p: C<T>, a: C<T>, b: C<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2.is_zero() {
        return (p - a).norm();
    }
    let t = (dot(p - a, ab) / len2).max(T::zero()).min(T::one());
    (p - (a + ab * t)).norm()
}

/// Proper intersection of segments `[p0, p1]` and `[q0, q1]`.
///
/// Returns `(s, t)` with `p0 + s(p1−p0) = q0 + t(q1−q0)`, `s, t ∈ [0, 1]`.
/// Parallel segments never intersect here.
pub fn segment_intersection<T: Real>(p0: C<T>, p1: C<T>, q0: C<T>, q1: C<T>) -> Option<(T, T)> {
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = cross(r, s);
    let scale = r.norm() * s.norm();
    if denom.abs() <= T::epsilon() * lit(16.0) * scale || scale.is_zero() {
        return None;
    }
    let qp = q0 - p0;
    let u = cross(qp, s) / denom;
    let v = cross(qp, r) / denom;
    let (zero, one) = (T::zero(), T::one());
    if u >= zero && u <= one && v >= zero && v <= one {
        Some((u, v))
    } else {
        None
    }
}

/// Principal value of `arg(b / a)` in `(−π, π]`.
#[inline]
pub fn phase_step<T: Real>(a: C<T>, b: C<T>) -> T {
    (b * a.conj()).arg()
}
