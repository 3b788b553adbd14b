//! Stability crossing curves: the loci `L(β)` with `F(iβ, L(β)) = 0`.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::charfun::{CharFun, CharFunError};
use crate::geometry::{cross, phase_step, segment_intersection, Window};
use crate::linalg::EigenError;
use crate::scalar::{i_unit, lit, sgn, to_f64, tol, Real, C};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SccError {
    #[error("identically singular frequency: F(i{beta}, L) vanishes for every L")]
    IdenticallySingular { beta: f64 },
    #[error("invalid sweep: need beta_lo < beta_hi and a positive step")]
    InvalidRange,
    #[error("Newton polish did not converge at beta = {beta}")]
    NoConvergence { beta: f64 },
    #[error("beta = {beta} lies outside the traced branch")]
    OutOfBranch { beta: f64 },
    #[error(transparent)]
    CharFun(#[from] CharFunError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Polar coordinates of one branch node. `theta` is unwrapped along the branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarSample<T> {
    pub r: T,
    pub theta: T,
    pub theta_prime: T,
    /// False where `r < 1e−12`, so `θ` and `θ′` carry no information.
    pub defined: bool,
}

/// One continuous piece of a crossing curve, sampled on an ascending `β` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SccBranch<T> {
    pub beta: Vec<T>,
    pub points: Vec<C<T>>,
    pub tangent: Vec<C<T>>,
    pub polar: Vec<PolarSample<T>>,
    /// Position of the followed root among the roots of `F(iβ₀, ·)` at the first node.
    pub root_index: usize,
}

impl<T: Real> SccBranch<T> {
    /// Assembles a branch from samples and derivatives, computing the polar profile.
    pub fn from_parts(beta: Vec<T>, points: Vec<C<T>>, tangent: Vec<C<T>>, root_index: usize) -> Self {
        assert!(beta.len() == points.len() && beta.len() == tangent.len());
        let polar = compute_polar(&points, &tangent);
        SccBranch {
            beta,
            points,
            tangent,
            polar,
            root_index,
        }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn beta_range(&self) -> (T, T) {
        (self.beta[0], self.beta[self.len() - 1])
    }

    /// Index `m` of the segment `[β_m, β_{m+1}]` containing `beta`, clamped.
    pub fn segment_of(&self, beta: T) -> usize {
        let n = self.len();
        if n < 2 {
            return 0;
        }
        let idx = self.beta.partition_point(|&b| b <= beta);
        idx.saturating_sub(1).min(n - 2)
    }

    /// Cubic Hermite interpolation of `(L, L′)` through the stored nodes.
    pub fn interpolate(&self, beta: T) -> (C<T>, C<T>) {
        if self.len() == 1 {
            return (self.points[0], self.tangent[0]);
        }
        let m = self.segment_of(beta);
        let h = self.beta[m + 1] - self.beta[m];
        let s = (beta - self.beta[m]) / h;
        let (p0, p1) = (self.points[m], self.points[m + 1]);
        let (d0, d1) = (self.tangent[m] * h, self.tangent[m + 1] * h);
        let (d0, d1) = if finite(d0) && finite(d1) {
            (d0, d1)
        } else {
            (p1 - p0, p1 - p0)
        };
        let one = T::one();
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + one;
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        let p = p0 * h00 + d0 * h10 + p1 * h01 + d1 * h11;
        let g00 = lit::<T>(6.0) * (s2 - s);
        let g10 = three * s2 - lit::<T>(4.0) * s + one;
        let g11 = three * s2 - two * s;
        let dp = (p0 * g00 + d0 * g10 - p1 * g00 + d1 * g11) / h;
        (p, dp)
    }
}

/// Polar profile `(r, θ, θ′)` of a branch, with `θ′ = Im(L′/L)`.
pub fn polar_profile<T: Real>(branch: &SccBranch<T>) -> Vec<PolarSample<T>> {
    compute_polar(&branch.points, &branch.tangent)
}

fn compute_polar<T: Real>(points: &[C<T>], tangent: &[C<T>]) -> Vec<PolarSample<T>> {
    let r_min = tol::<T>(1e-12);
    let mut out = Vec::with_capacity(points.len());
    let mut theta = T::zero();
    for (m, (&l, &dl)) in points.iter().zip(tangent).enumerate() {
        let r = l.norm();
        theta = if m == 0 {
            l.arg()
        } else {
            theta + phase_step(points[m - 1], l)
        };
        let defined = r >= r_min;
        let theta_prime = if defined { (dl / l).im } else { T::nan() };
        out.push(PolarSample {
            r,
            theta,
            theta_prime,
            defined,
        });
    }
    out
}

/// Sweep parameters for [`trace_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions<T> {
    pub beta_lo: T,
    pub beta_hi: T,
    /// Uniform base step.
    pub step: T,
    /// Segments longer than this are bisected.
    pub max_chord: T,
    /// Bisection stops below this `β` spacing.
    pub min_step: T,
    /// Segments with both ends beyond this modulus are refined only while
    /// longer than half the smaller end modulus.
    pub clip_radius: T,
}

impl<T: Real> TraceOptions<T> {
    pub fn new(beta_lo: T, beta_hi: T, step: T) -> Self {
        TraceOptions {
            beta_lo,
            beta_hi,
            step,
            max_chord: lit(0.05),
            min_step: step * lit(1.0 / 16_777_216.0),
            clip_radius: lit(50.0),
        }
    }

    /// Resolution tied to a window: chords at most 2% of its diagonal.
    pub fn for_window(beta_lo: T, beta_hi: T, step: T, window: &Window<T>) -> Self {
        let diag = window.diagonal();
        TraceOptions {
            max_chord: diag * lit(0.02),
            clip_radius: window.outer_radius() * lit(2.0) + diag,
            ..Self::new(beta_lo, beta_hi, step)
        }
    }
}

#[derive(Debug, Clone)]
struct Node<T> {
    beta: T,
    roots: Vec<C<T>>,
    tangents: Vec<C<T>>,
}

#[inline]
fn finite<T: Real>(z: C<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// All roots `L` of `F(iβ, L) = 0` with one Newton polish each, plus tangents.
fn sample<T: Real>(f: &CharFun<T>, beta: T) -> Result<Node<T>, SccError> {
    let lambda = Complex::new(T::zero(), beta);
    let h = f.kernel().laplace_continued(lambda).map_err(CharFunError::from)?;
    let poly = f.l_polynomial(lambda)?;
    let scale = T::one().max(beta.abs().powi(f.dim() as i32));
    if poly.coeffs().iter().all(|c| c.norm() <= T::epsilon() * lit(16.0) * scale) {
        return Err(SccError::IdenticallySingular { beta: to_f64(beta) });
    }
    let mut roots = poly.roots(tol(1e-13))?;
    let mut tangents = Vec::with_capacity(roots.len());
    for l in roots.iter_mut() {
        let dl = f.d_l_with_transform(lambda, h, *l);
        if !dl.is_zero() {
            let next = *l - f.eval_with_transform(lambda, h, *l) / dl;
            if finite(next) {
                *l = next;
            }
        }
        tangents.push(tangent_at(f, lambda, *l)?);
    }
    Ok(Node {
        beta,
        roots,
        tangents,
    })
}

/// `L′(β) = −i ∂_λF / ∂_LF`; NaN where `∂_LF` vanishes.
fn tangent_at<T: Real>(f: &CharFun<T>, lambda: C<T>, l: C<T>) -> Result<C<T>, SccError> {
    let dl = f.d_l(lambda, l)?;
    if dl.is_zero() {
        return Ok(Complex::new(T::nan(), T::nan()));
    }
    Ok(-i_unit::<T>() * f.d_lambda(lambda, l)? / dl)
}

/// Greedy minimal-distance assignment against tangent extrapolation.
fn match_roots<T: Real>(a: &Node<T>, b: &Node<T>) -> Vec<(usize, usize)> {
    let h = b.beta - a.beta;
    let mut costs = Vec::with_capacity(a.roots.len() * b.roots.len());
    for (i, (&la, &ta)) in a.roots.iter().zip(&a.tangents).enumerate() {
        let pred = if finite(ta * h) { la + ta * h } else { la };
        for (j, &lb) in b.roots.iter().enumerate() {
            let d = (lb - pred).norm();
            costs.push((if d.is_nan() { T::infinity() } else { d }, i, j));
        }
    }
    costs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut used_a = vec![false; a.roots.len()];
    let mut used_b = vec![false; b.roots.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in costs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}

fn needs_refinement<T: Real>(a: &Node<T>, b: &Node<T>, opts: &TraceOptions<T>) -> bool {
    if a.roots.len() != b.roots.len() {
        return true;
    }
    let h = b.beta - a.beta;
    match_roots(a, b).into_iter().any(|(i, j)| {
        let (la, lb) = (a.roots[i], b.roots[j]);
        let chord = (lb - la).norm();
        let long = chord > opts.max_chord && !far_and_short(la, lb, chord, opts);
        long || jumps(chord, a.tangents[i], b.tangents[j], h, la)
    })
}

/// Both ends beyond the clip radius and the chord short relative to their
/// modulus, so the segment cannot approach the window.
fn far_and_short<T: Real>(la: C<T>, lb: C<T>, chord: T, opts: &TraceOptions<T>) -> bool {
    let r = la.norm().min(lb.norm());
    r >= opts.clip_radius && chord <= r * lit(0.5)
}

/// Match distance beyond ten times the local motion `|L′|·Δβ`.
fn jumps<T: Real>(dist: T, ta: C<T>, tb: C<T>, h: T, l: C<T>) -> bool {
    let motion = ta.norm().max(tb.norm()) * h;
    if !motion.is_finite() {
        return false;
    }
    dist > motion * lit(10.0) + tol::<T>(1e-9) * (T::one() + l.norm())
}

fn refine<T: Real>(
    f: &CharFun<T>,
    a: &Node<T>,
    b: &Node<T>,
    opts: &TraceOptions<T>,
    out: &mut Vec<Node<T>>,
) -> Result<(), SccError> {
    if b.beta - a.beta <= opts.min_step || !needs_refinement(a, b, opts) {
        return Ok(());
    }
    let mid = sample(f, (a.beta + b.beta) * lit(0.5))?;
    refine(f, a, &mid, opts, out)?;
    let mid_clone = mid.clone();
    out.push(mid);
    refine(f, &mid_clone, b, opts, out)
}

/// Traces every branch over `[beta_lo, beta_hi]` with default resolution.
pub fn trace<T: Real>(f: &CharFun<T>, beta_lo: T, beta_hi: T, step: T) -> Result<Vec<SccBranch<T>>, SccError> {
    trace_with(f, &TraceOptions::new(beta_lo, beta_hi, step))
}

pub fn trace_with<T: Real>(f: &CharFun<T>, opts: &TraceOptions<T>) -> Result<Vec<SccBranch<T>>, SccError> {
    if !(opts.beta_lo < opts.beta_hi) || !(opts.step > T::zero()) || !opts.step.is_finite() {
        return Err(SccError::InvalidRange);
    }
    let span = opts.beta_hi - opts.beta_lo;
    let count = (span / opts.step).ceil().to_usize().unwrap_or(1).max(1);
    let h = span / crate::scalar::from_usize::<T>(count);
    let base: Vec<Node<T>> = (0..=count)
        .into_par_iter()
        .map(|m| {
            let beta = if m == count {
                opts.beta_hi
            } else {
                opts.beta_lo + h * crate::scalar::from_usize::<T>(m)
            };
            sample(f, beta)
        })
        .collect::<Result<_, _>>()?;
    let fills: Vec<Vec<Node<T>>> = base
        .par_windows(2)
        .map(|w| {
            let mut out = Vec::new();
            refine(f, &w[0], &w[1], opts, &mut out).map(|_| out)
        })
        .collect::<Result<_, _>>()?;
    let mut nodes = Vec::with_capacity(base.len() + fills.iter().map(Vec::len).sum::<usize>());
    for (node, fill) in base.iter().zip(fills) {
        nodes.push(node.clone());
        nodes.extend(fill);
    }
    nodes.push(base[count].clone());
    Ok(assemble(&nodes, opts))
}

struct Building<T> {
    beta: Vec<T>,
    points: Vec<C<T>>,
    tangent: Vec<C<T>>,
    root_index: usize,
}

impl<T: Real> Building<T> {
    fn start(node: &Node<T>, j: usize) -> Self {
        Building {
            beta: vec![node.beta],
            points: vec![node.roots[j]],
            tangent: vec![node.tangents[j]],
            root_index: j,
        }
    }

    fn push(&mut self, node: &Node<T>, j: usize) {
        self.beta.push(node.beta);
        self.points.push(node.roots[j]);
        self.tangent.push(node.tangents[j]);
    }
}

fn assemble<T: Real>(nodes: &[Node<T>], opts: &TraceOptions<T>) -> Vec<SccBranch<T>> {
    let mut building: Vec<Building<T>> = Vec::new();
    let mut active: Vec<Option<usize>> = Vec::new();
    if let Some(first) = nodes.first() {
        for j in 0..first.roots.len() {
            active.push(Some(building.len()));
            building.push(Building::start(first, j));
        }
    }
    for w in nodes.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let h = b.beta - a.beta;
        let mut next = vec![None; b.roots.len()];
        for (i, j) in match_roots(a, b) {
            let Some(id) = active[i] else { continue };
            let (la, lb) = (a.roots[i], b.roots[j]);
            let (ta, tb) = (a.tangents[i], b.tangents[j]);
            let dist = (lb - la).norm();
            let unresolved = h <= opts.min_step
                && dist > opts.max_chord
                && !far_and_short(la, lb, dist, opts);
            let broken = !finite(ta) || !finite(tb) || unresolved || jumps(dist, ta, tb, h, la);
            if !broken {
                building[id].push(b, j);
                next[j] = Some(id);
            }
        }
        for (j, slot) in next.iter_mut().enumerate() {
            if slot.is_none() {
                *slot = Some(building.len());
                building.push(Building::start(b, j));
            }
        }
        active = next;
    }
    building
        .into_iter()
        .filter(|b| b.beta.len() >= 2)
        .map(|b| SccBranch::from_parts(b.beta, b.points, b.tangent, b.root_index))
        .collect()
}

/// Outcome of [`trace_covering`].
#[derive(Debug, Clone)]
pub struct Coverage<T> {
    pub branches: Vec<SccBranch<T>>,
    pub beta_max: T,
    /// False when the `β` limit was reached before the curves left the window.
    pub complete: bool,
    pub warnings: Vec<String>,
}

/// Traces over `[−B, B]`, doubling `B` until every root in the outer quarter of
/// the sweep on both ends lies beyond the window's diagonal and outer radius.
pub fn trace_covering<T: Real>(
    f: &CharFun<T>,
    window: &Window<T>,
    step: T,
    beta_limit: T,
) -> Result<Coverage<T>, SccError> {
    let reach = window.diagonal().max(window.outer_radius());
    let mut b = lit::<T>(8.0).max(step * lit(16.0)).min(beta_limit);
    loop {
        let opts = TraceOptions::for_window(-b, b, step, window);
        let branches = trace_with(f, &opts)?;
        let outer = b * lit(0.75);
        let min_far = branches
            .iter()
            .flat_map(|br| br.beta.iter().zip(&br.points))
            .filter(|(beta, _)| beta.abs() >= outer)
            .fold(T::infinity(), |m, (_, l)| m.min(l.norm()));
        let near_ends = ends_inside(f, b, reach)?;
        if min_far > reach && !near_ends {
            return Ok(Coverage {
                branches,
                beta_max: b,
                complete: true,
                warnings: Vec::new(),
            });
        }
        if b >= beta_limit {
            return Ok(Coverage {
                branches,
                beta_max: b,
                complete: false,
                warnings: vec![format!(
                    "crossing curves still reach the window at |beta| = {}; sweep limit hit",
                    to_f64(b)
                )],
            });
        }
        b = (b * lit(2.0)).min(beta_limit);
    }
}

fn ends_inside<T: Real>(f: &CharFun<T>, b: T, reach: T) -> Result<bool, SccError> {
    for beta in [-b, b] {
        let node = sample(f, beta)?;
        if node.roots.iter().any(|l| l.norm() <= reach) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Newton-polished point and tangent of `branch` at an arbitrary `β` in its range.
pub fn point_at<T: Real>(f: &CharFun<T>, branch: &SccBranch<T>, beta: T) -> Result<(C<T>, C<T>), SccError> {
    let (lo, hi) = branch.beta_range();
    let slack = (hi - lo) * tol::<T>(1e-9);
    if beta < lo - slack || beta > hi + slack {
        return Err(SccError::OutOfBranch { beta: to_f64(beta) });
    }
    let (guess, _) = branch.interpolate(beta);
    let l = polish(f, beta, guess)?;
    let t = tangent_at(f, Complex::new(T::zero(), beta), l)?;
    Ok((l, t))
}

fn polish<T: Real>(f: &CharFun<T>, beta: T, guess: C<T>) -> Result<C<T>, SccError> {
    let lambda = Complex::new(T::zero(), beta);
    let h = f.kernel().laplace_continued(lambda).map_err(CharFunError::from)?;
    let mut l = guess;
    let stop = tol::<T>(1e-14);
    for _ in 0..30 {
        let dl = f.d_l_with_transform(lambda, h, l);
        if dl.is_zero() {
            break;
        }
        let step = f.eval_with_transform(lambda, h, l) / dl;
        l -= step;
        if !finite(l) {
            break;
        }
        if step.norm() <= stop * (T::one() + l.norm()) {
            return Ok(l);
        }
    }
    let scale = T::one().max(beta.abs().powi(f.dim() as i32));
    if finite(l) && f.eval_with_transform(lambda, h, l).norm() <= tol::<T>(1e-9) * scale {
        Ok(l)
    } else {
        Err(SccError::NoConvergence { beta: to_f64(beta) })
    }
}

/// Why a crossing report claims no jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// `∂_λF = 0`: the imaginary root is not simple.
    RegularCrossingFails,
    /// `∂_LF = 0`: no tangent.
    TangentUndefined,
    /// `θ′ = 0` or `L = 0`: the ray rule does not apply.
    RayUndefined,
}

/// Local crossing data at a point of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport<T> {
    pub beta_star: T,
    pub l_star: C<T>,
    pub tangent: C<T>,
    /// `i·L′(β*)`; stepping along it crosses from higher to lower `NU`.
    pub normal: C<T>,
    /// `NU(L*+εn) − NU(L*−εn)`: −1, or 0 when degenerate.
    pub jump_normal: i32,
    pub theta_prime: T,
    /// `NU` change stepping radially outward: `Sgn(θ′)`, or 0 when undefined.
    pub jump_ray: i32,
    pub degenerate: Vec<Degeneracy>,
}

pub fn crossing_at<T: Real>(
    f: &CharFun<T>,
    branch: &SccBranch<T>,
    beta_star: T,
) -> Result<CrossingReport<T>, SccError> {
    let (l, _) = point_at(f, branch, beta_star)?;
    let lambda = Complex::new(T::zero(), beta_star);
    let dlam = f.d_lambda(lambda, l)?;
    let dl = f.d_l(lambda, l)?;
    let scale = T::one().max(beta_star.abs().powi(f.dim() as i32 - 1));
    let tiny = T::epsilon() * lit(64.0) * scale;
    let mut degenerate = Vec::new();
    if dlam.norm() <= tiny {
        degenerate.push(Degeneracy::RegularCrossingFails);
    }
    let tangent = if dl.norm() <= T::epsilon() * lit(64.0) {
        degenerate.push(Degeneracy::TangentUndefined);
        Complex::new(T::nan(), T::nan())
    } else {
        -i_unit::<T>() * dlam / dl
    };
    let normal = i_unit::<T>() * tangent;
    let r = l.norm();
    let theta_prime = if r >= tol::<T>(1e-12) && finite(tangent) {
        (tangent / l).im
    } else {
        T::nan()
    };
    let ray_floor = tol::<T>(1e-12) * (T::one() + tangent.norm() / r);
    let jump_ray = if theta_prime.is_finite() && theta_prime.abs() > ray_floor {
        sgn(theta_prime)
    } else {
        degenerate.push(Degeneracy::RayUndefined);
        0
    };
    let jump_normal = if degenerate
        .iter()
        .any(|d| matches!(d, Degeneracy::RegularCrossingFails | Degeneracy::TangentUndefined))
    {
        0
    } else {
        -1
    };
    Ok(CrossingReport {
        beta_star,
        l_star: l,
        tangent,
        normal,
        jump_normal,
        theta_prime,
        jump_ray,
        degenerate,
    })
}

/// A point visited twice: `branches[branch_a]` at `beta_a` meets `branches[branch_b]` at `beta_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection<T> {
    pub branch_a: usize,
    pub beta_a: T,
    pub branch_b: usize,
    pub beta_b: T,
    pub point: C<T>,
}

struct Seg<T> {
    branch: usize,
    index: usize,
    lo: C<T>,
    hi: C<T>,
}

/// Crossings of the branch polylines with themselves and with each other,
/// refined by Newton on the Hermite interpolants. Pairs closer than `tol` in
/// both parameters are merged.
pub fn self_intersections<T: Real>(branches: &[SccBranch<T>], tol: T) -> Vec<Intersection<T>> {
    let raw = polyline_crossings(branches);
    let refined = raw
        .into_iter()
        .map(|x| {
            newton_pair(x, |b, beta| Ok::<_, SccError>(branches[b].interpolate(beta))).unwrap_or(x)
        })
        .collect();
    dedup(refined, tol)
}

/// As [`self_intersections`], with every point refined on `F` itself.
pub fn self_intersections_exact<T: Real>(
    f: &CharFun<T>,
    branches: &[SccBranch<T>],
    tol: T,
) -> Result<Vec<Intersection<T>>, SccError> {
    let raw = polyline_crossings(branches);
    let refined = raw
        .into_par_iter()
        .map(|x| newton_pair(x, |b, beta| point_at(f, &branches[b], beta)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(dedup(refined, tol))
}

fn polyline_crossings<T: Real>(branches: &[SccBranch<T>]) -> Vec<Intersection<T>> {
    let mut segs = Vec::new();
    for (b, br) in branches.iter().enumerate() {
        for m in 0..br.len().saturating_sub(1) {
            let (p, q) = (br.points[m], br.points[m + 1]);
            segs.push(Seg {
                branch: b,
                index: m,
                lo: Complex::new(p.re.min(q.re), p.im.min(q.im)),
                hi: Complex::new(p.re.max(q.re), p.im.max(q.im)),
            });
        }
    }
    segs.sort_by(|x, y| x.lo.re.partial_cmp(&y.lo.re).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = Vec::new();
    for i in 0..segs.len() {
        let s = &segs[i];
        for t in &segs[i + 1..] {
            if t.lo.re > s.hi.re {
                break;
            }
            if t.lo.im > s.hi.im || t.hi.im < s.lo.im {
                continue;
            }
            if s.branch == t.branch && s.index.abs_diff(t.index) <= 1 {
                continue;
            }
            let (ba, bb) = (&branches[s.branch], &branches[t.branch]);
            let hit = segment_intersection(
                ba.points[s.index],
                ba.points[s.index + 1],
                bb.points[t.index],
                bb.points[t.index + 1],
            );
            if let Some((u, v)) = hit {
                let beta_a = ba.beta[s.index] + (ba.beta[s.index + 1] - ba.beta[s.index]) * u;
                let beta_b = bb.beta[t.index] + (bb.beta[t.index + 1] - bb.beta[t.index]) * v;
                let point = ba.points[s.index] + (ba.points[s.index + 1] - ba.points[s.index]) * u;
                out.push(ordered(s.branch, beta_a, t.branch, beta_b, point));
            }
        }
    }
    out
}

fn ordered<T: Real>(ba: usize, beta_a: T, bb: usize, beta_b: T, point: C<T>) -> Intersection<T> {
    if (ba, beta_a) <= (bb, beta_b) {
        Intersection {
            branch_a: ba,
            beta_a,
            branch_b: bb,
            beta_b,
            point,
        }
    } else {
        Intersection {
            branch_a: bb,
            beta_a: beta_b,
            branch_b: ba,
            beta_b: beta_a,
            point,
        }
    }
}

/// Solves `L_a(β_a) = L_b(β_b)` from the polyline estimate; keeps the
/// estimate when the curves are tangent there.
fn newton_pair<T: Real, E>(
    x: Intersection<T>,
    eval: impl Fn(usize, T) -> Result<(C<T>, C<T>), E>,
) -> Result<Intersection<T>, E> {
    let (mut ba, mut bb) = (x.beta_a, x.beta_b);
    let start_gap = {
        let (pa, _) = eval(x.branch_a, ba)?;
        let (pb, _) = eval(x.branch_b, bb)?;
        (pa - pb).norm()
    };
    let mut best = (start_gap, ba, bb);
    for _ in 0..12 {
        let (pa, ta) = eval(x.branch_a, ba)?;
        let (pb, tb) = eval(x.branch_b, bb)?;
        let g = pa - pb;
        if g.norm() < best.0 {
            best = (g.norm(), ba, bb);
        }
        let det = cross(tb, ta);
        if !det.is_finite() || det.abs() <= T::epsilon() * lit(1e4) * ta.norm() * tb.norm() {
            break;
        }
        // [ta, −tb] (dba, dbb)ᵀ = −g
        let dba = cross(tb, g) / det;
        let dbb = cross(ta, g) / det;
        ba -= dba;
        bb -= dbb;
        if dba.abs().max(dbb.abs()) <= tol::<T>(1e-15) * (T::one() + ba.abs().max(bb.abs())) {
            break;
        }
    }
    let (pa, _) = eval(x.branch_a, ba)?;
    let (pb, _) = eval(x.branch_b, bb)?;
    if (pa - pb).norm() < best.0 {
        best = ((pa - pb).norm(), ba, bb);
    }
    let (_, ba, bb) = best;
    let (pa, _) = eval(x.branch_a, ba)?;
    Ok(ordered(x.branch_a, ba, x.branch_b, bb, pa))
}

fn dedup<T: Real>(mut xs: Vec<Intersection<T>>, tol: T) -> Vec<Intersection<T>> {
    xs.sort_by(|x, y| {
        (x.branch_a, x.branch_b)
            .cmp(&(y.branch_a, y.branch_b))
            .then(x.beta_a.partial_cmp(&y.beta_a).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut out: Vec<Intersection<T>> = Vec::new();
    for x in xs {
        let dup = out.iter().rev().take(8).any(|y| {
            y.branch_a == x.branch_a
                && y.branch_b == x.branch_b
                && (y.beta_a - x.beta_a).abs() <= tol
                && (y.beta_b - x.beta_b).abs() <= tol
        });
        if !dup {
            out.push(x);
        }
    }
    out
}
