//! Unstable-root counts `NU(L)` and the stability region `Ω = {NU = 0}`.

use std::collections::VecDeque;

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::charfun::{CharFun, CharFunError};
use crate::geometry::{cross, dot, point_segment_distance, segment_intersection, Window};
use crate::linalg::EigenError;
use crate::scalar::{from_usize, lit, to_f64, tol, Real, C};
use crate::scc::{point_at, trace_covering, SccBranch, SccError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("L lies on a crossing curve: F(i{beta}, L) ≈ 0")]
    OnScc { beta: f64 },
    #[error("winding number unresolved (raw count {raw})")]
    WindingUnresolved { raw: f64 },
    #[error("invalid window or resolution")]
    InvalidWindow,
    #[error("no cell of a component could be labelled by the contour oracle")]
    NoAnchor,
    #[error(transparent)]
    CharFun(#[from] CharFunError),
    #[error(transparent)]
    Scc(#[from] SccError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

const MAX_DEPTH: u32 = 48;

/// `NU(L)` by the argument principle: the winding of `F(·, L)` around the
/// boundary of the half-disk `Re λ ≥ 0, |λ| ≤ R`, tracked by phase increments.
pub fn nu_contour<T: Real>(f: &CharFun<T>, l: C<T>) -> Result<usize, RegionError> {
    let r = f.radius_bound(l, T::zero()).max(lit(1e-3));
    let q = f.dim() as i32;
    let on_axis = tol::<T>(1e-6);
    let axis = |beta: T| -> Result<C<T>, RegionError> {
        let lambda = Complex::new(T::zero(), beta);
        let v = f.eval(lambda, l)?;
        if v.norm() < on_axis * T::one().max(beta.abs().powi(q)) {
            return Err(RegionError::OnScc { beta: to_f64(beta) });
        }
        Ok(v)
    };
    let half_pi = T::FRAC_PI_2();
    let arc = |phi: T| -> Result<C<T>, RegionError> {
        let lambda = Complex::from_polar(r, phi);
        Ok(f.eval(lambda, l)?)
    };
    let rate = f.kernel().mean().abs() + T::one();
    let n_axis = 64 + (lit::<T>(8.0) * r * rate).ceil().to_usize().unwrap_or(0);
    let mut total = winding(&axis, r, -r, n_axis)?;
    total += winding(&arc, -half_pi, half_pi, 64 + 8 * f.dim())?;
    let raw = total / T::TAU();
    let rounded = raw.round();
    if (raw - rounded).abs() > lit(0.05) || rounded < T::zero() {
        return Err(RegionError::WindingUnresolved { raw: to_f64(raw) });
    }
    Ok(rounded.to_usize().unwrap_or(0))
}

fn winding<T: Real>(
    eval: &impl Fn(T) -> Result<C<T>, RegionError>,
    t0: T,
    t1: T,
    pieces: usize,
) -> Result<T, RegionError> {
    let h = (t1 - t0) / from_usize::<T>(pieces);
    let mut total = T::zero();
    let mut a = t0;
    let mut fa = eval(a)?;
    for m in 1..=pieces {
        let b = if m == pieces { t1 } else { t0 + h * from_usize::<T>(m) };
        let fb = eval(b)?;
        total += phase_change(eval, a, b, fa, fb, MAX_DEPTH)?;
        a = b;
        fa = fb;
    }
    Ok(total)
}

fn phase_change<T: Real>(
    eval: &impl Fn(T) -> Result<C<T>, RegionError>,
    t0: T,
    t1: T,
    f0: C<T>,
    f1: C<T>,
    depth: u32,
) -> Result<T, RegionError> {
    let tm = (t0 + t1) * lit(0.5);
    let fm = eval(tm)?;
    let d1 = arg_step(f0, fm);
    let d2 = arg_step(fm, f1);
    let d = arg_step(f0, f1);
    let limit = T::FRAC_PI_4();
    if d1.abs() <= limit && d2.abs() <= limit && (d1 + d2 - d).abs() <= tol(1e-9) {
        return Ok(d1 + d2);
    }
    if depth == 0 {
        return Err(RegionError::WindingUnresolved { raw: f64::NAN });
    }
    Ok(phase_change(eval, t0, tm, f0, fm, depth - 1)? + phase_change(eval, tm, t1, fm, f1, depth - 1)?)
}

#[inline]
fn arg_step<T: Real>(a: C<T>, b: C<T>) -> T {
    (b * a.conj()).arg()
}

/// `NU(L)` from the roots of the polynomial form of `F` (rational kernels only).
///
/// Returns `Ok(None)` for kernels without a polynomial form.
pub fn nu_polynomial<T: Real>(f: &CharFun<T>, l: C<T>) -> Result<Option<usize>, RegionError> {
    let Some(p) = f.rational_form(l) else {
        return Ok(None);
    };
    let roots = p.roots(tol(1e-14))?;
    let scale = roots.iter().fold(T::one(), |m, z| m.max(z.norm()));
    let mut count = 0;
    for z in roots {
        if z.re.abs() <= tol::<T>(1e-10) * scale {
            return Err(RegionError::OnScc { beta: to_f64(z.im) });
        }
        if z.re > T::zero() {
            count += 1;
        }
    }
    Ok(Some(count))
}

/// Point query result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Stable,
    Unstable(usize),
    OnCurve,
}

impl Membership {
    pub fn is_stable(self) -> bool {
        self == Membership::Stable
    }
}

/// Classifies a single `L`, treating points on (or within rounding of) a curve as marginal.
pub fn membership<T: Real>(
    f: &CharFun<T>,
    l: C<T>,
    branches: &[SccBranch<T>],
) -> Result<Membership, RegionError> {
    let guard = tol::<T>(1e-9) * (T::one() + l.norm());
    let near = branches.iter().any(|b| {
        b.points
            .windows(2)
            .any(|w| point_segment_distance(l, w[0], w[1]) <= guard)
    });
    if near {
        return Ok(Membership::OnCurve);
    }
    match nu_contour(f, l) {
        Ok(0) => Ok(Membership::Stable),
        Ok(n) => Ok(Membership::Unstable(n)),
        Err(RegionError::OnScc { .. }) => Ok(Membership::OnCurve),
        Err(e) => Err(e),
    }
}

/// How the label of a component was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelMethod {
    /// Anchor evaluated by the contour oracle.
    Contour,
    /// Anchor evaluated from the polynomial form.
    Polynomial,
    /// Counted crossings from the anchor.
    Propagated,
    /// Crossing paths disagreed; evaluated by the contour oracle instead.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor<T> {
    pub point: C<T>,
    pub nu: usize,
    pub method: LabelMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component<T> {
    pub cells: Vec<usize>,
    pub representative: C<T>,
    pub nu: usize,
    pub method: LabelMethod,
}

/// `NU` per cell of a rectangular grid. Cells are stored row by row, `index = iy·nx + ix`.
#[derive(Debug, Clone, PartialEq)]
pub struct NuMap<T> {
    pub window: Window<T>,
    pub nx: usize,
    pub ny: usize,
    /// `NU` per cell, −1 on sentinel (curve) cells.
    pub labels: Vec<i32>,
    pub component_of: Vec<Option<usize>>,
    pub components: Vec<Component<T>>,
    pub anchor: Anchor<T>,
    /// Curve polylines near the window, in increasing `β`.
    pub curves: Vec<Vec<C<T>>>,
    /// Contour-oracle label of every cell, when requested.
    pub oracle: Option<Vec<i32>>,
    pub warnings: Vec<String>,
}

impl<T: Real> NuMap<T> {
    pub fn cell_center(&self, ix: usize, iy: usize) -> C<T> {
        cell_center(&self.window, self.nx, self.ny, ix, iy)
    }

    pub fn label(&self, ix: usize, iy: usize) -> i32 {
        self.labels[iy * self.nx + ix]
    }

    /// Cells whose propagated label differs from the oracle label.
    pub fn oracle_mismatches(&self) -> Option<usize> {
        self.oracle.as_ref().map(|o| {
            o.iter()
                .zip(&self.labels)
                .filter(|(a, b)| **b >= 0 && a != b)
                .count()
        })
    }

    pub fn fallback_count(&self) -> usize {
        self.components
            .iter()
            .filter(|c| c.method == LabelMethod::Fallback)
            .count()
    }

    /// Distinct labels present, ascending.
    pub fn label_set(&self) -> Vec<i32> {
        let mut s: Vec<i32> = self.labels.iter().copied().filter(|&x| x >= 0).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

fn cell_center<T: Real>(w: &Window<T>, nx: usize, ny: usize, ix: usize, iy: usize) -> C<T> {
    let half = lit::<T>(0.5);
    let dx = w.width() / from_usize::<T>(nx);
    let dy = w.height() / from_usize::<T>(ny);
    Complex::new(
        w.re_lo + dx * (from_usize::<T>(ix) + half),
        w.im_lo + dy * (from_usize::<T>(iy) + half),
    )
}

/// Labels a window grid: curve cells become sentinels, the rest split into
/// connected components; one component is anchored by the contour oracle and
/// the others by signed counts of curve crossings along paths from the anchor.
pub fn nu_map<T: Real>(
    f: &CharFun<T>,
    window: &Window<T>,
    nx: usize,
    ny: usize,
    branches: &[SccBranch<T>],
    full_oracle: bool,
) -> Result<NuMap<T>, RegionError> {
    if !window.is_valid() || nx == 0 || ny == 0 {
        return Err(RegionError::InvalidWindow);
    }
    let dx = window.width() / from_usize::<T>(nx);
    let dy = window.height() / from_usize::<T>(ny);
    let reach = dx.hypot(dy) * lit(0.5);
    let curves = clip_curves(branches, window, reach);
    let n = nx * ny;
    let mut sentinel = vec![false; n];
    for poly in &curves {
        for w in poly.windows(2) {
            mark_segment(&mut sentinel, window, nx, ny, reach, w[0], w[1]);
        }
    }
    let (component_of, cells_by_comp) = flood_fill(&sentinel, nx, ny);
    let dist = distance_to_sentinel(&sentinel, nx, ny);
    let center = |idx: usize| cell_center(window, nx, ny, idx % nx, idx / nx);
    // candidate cells per component, farthest from the curves first
    let ranked: Vec<Vec<usize>> = cells_by_comp
        .iter()
        .map(|cells| {
            let mut c = cells.clone();
            c.sort_by_key(|&i| (std::cmp::Reverse(dist[i]), i));
            c
        })
        .collect();
    let segments: Vec<(C<T>, C<T>)> = curves
        .iter()
        .flat_map(|p| p.windows(2).map(|w| (w[0], w[1])))
        .collect();

    let mut warnings = Vec::new();
    let mut components: Vec<Component<T>> = Vec::with_capacity(ranked.len());
    let anchor = if ranked.is_empty() {
        None
    } else {
        let anchor_comp = (0..ranked.len())
            .max_by_key(|&c| (ranked[c].len(), std::cmp::Reverse(c)))
            .unwrap_or(0);
        let (point, nu) = contour_label(f, &ranked[anchor_comp], &center)?;
        Some((anchor_comp, Anchor {
            point,
            nu,
            method: LabelMethod::Contour,
        }))
    };
    if let Some((anchor_comp, anchor)) = anchor {
        let labelled: Vec<Result<Component<T>, RegionError>> = ranked
            .par_iter()
            .enumerate()
            .map(|(c, cand)| {
                let rep = center(cand[0]);
                if c == anchor_comp {
                    return Ok(Component {
                        cells: cells_by_comp[c].clone(),
                        representative: anchor.point,
                        nu: anchor.nu,
                        method: LabelMethod::Contour,
                    });
                }
                let propagated = propagate(anchor.point, anchor.nu, rep, window, &segments);
                let (representative, nu, method) = match propagated {
                    Some(nu) => (rep, nu, LabelMethod::Propagated),
                    None => {
                        let (p, nu) = contour_label(f, cand, &center)?;
                        (p, nu, LabelMethod::Fallback)
                    }
                };
                Ok(Component {
                    cells: cells_by_comp[c].clone(),
                    representative,
                    nu,
                    method,
                })
            })
            .collect();
        for c in labelled {
            components.push(c?);
        }
        let fallbacks = components.iter().filter(|c| c.method == LabelMethod::Fallback).count();
        if fallbacks > 0 {
            warnings.push(format!("{fallbacks} component(s) labelled by contour fallback"));
        }
    }
    let mut labels = vec![-1i32; n];
    for (i, c) in component_of.iter().enumerate() {
        if let Some(c) = c {
            labels[i] = components[*c].nu as i32;
        }
    }
    let anchor = anchor.map(|a| a.1).unwrap_or(Anchor {
        point: window.center(),
        nu: 0,
        method: LabelMethod::Contour,
    });
    if ranked.is_empty() {
        warnings.push("every cell lies on a crossing curve".to_string());
    }
    let oracle = if full_oracle {
        let o: Vec<i32> = (0..n)
            .into_par_iter()
            .map(|i| {
                if sentinel[i] {
                    -1
                } else {
                    nu_contour(f, center(i)).map(|v| v as i32).unwrap_or(-2)
                }
            })
            .collect();
        let failed = o.iter().filter(|&&v| v == -2).count();
        if failed > 0 {
            warnings.push(format!("contour oracle failed on {failed} cell(s)"));
        }
        Some(o)
    } else {
        None
    };
    Ok(NuMap {
        window: *window,
        nx,
        ny,
        labels,
        component_of,
        components,
        anchor,
        curves,
        oracle,
        warnings,
    })
}

/// Traces the curves needed for `window` and labels it.
pub fn nu_map_auto<T: Real>(
    f: &CharFun<T>,
    window: &Window<T>,
    nx: usize,
    ny: usize,
    full_oracle: bool,
) -> Result<(NuMap<T>, Vec<SccBranch<T>>), RegionError> {
    let cov = trace_covering(f, window, lit(0.02), lit(1024.0))?;
    let mut map = nu_map(f, window, nx, ny, &cov.branches, full_oracle)?;
    map.warnings.extend(cov.warnings);
    Ok((map, cov.branches))
}

fn contour_label<T: Real>(
    f: &CharFun<T>,
    ranked: &[usize],
    center: &impl Fn(usize) -> C<T>,
) -> Result<(C<T>, usize), RegionError> {
    let mut last = RegionError::NoAnchor;
    for &i in ranked.iter().take(16) {
        let p = center(i);
        match nu_contour(f, p) {
            Ok(nu) => return Ok((p, nu)),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Polyline pieces of the branches within `reach` of the window.
fn clip_curves<T: Real>(branches: &[SccBranch<T>], w: &Window<T>, reach: T) -> Vec<Vec<C<T>>> {
    let grown = Window::new(w.re_lo - reach, w.re_hi + reach, w.im_lo - reach, w.im_hi + reach);
    let mut out = Vec::new();
    for b in branches {
        let mut current: Vec<C<T>> = Vec::new();
        for win in b.points.windows(2) {
            let (p, q) = (win[0], win[1]);
            let hits = p.re.min(q.re) <= grown.re_hi
                && p.re.max(q.re) >= grown.re_lo
                && p.im.min(q.im) <= grown.im_hi
                && p.im.max(q.im) >= grown.im_lo;
            if hits {
                if current.is_empty() {
                    current.push(p);
                }
                current.push(q);
            } else if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out
}

fn mark_segment<T: Real>(
    sentinel: &mut [bool],
    w: &Window<T>,
    nx: usize,
    ny: usize,
    reach: T,
    p: C<T>,
    q: C<T>,
) {
    let dx = w.width() / from_usize::<T>(nx);
    let dy = w.height() / from_usize::<T>(ny);
    let span = |a: T, b: T, lo: T, d: T, n: usize| -> Option<(usize, usize)> {
        let (a, b) = (a.min(b) - reach, a.max(b) + reach);
        let i0 = ((a - lo) / d - lit(0.5)).floor();
        let i1 = ((b - lo) / d - lit(0.5)).ceil();
        let max = from_usize::<T>(n - 1);
        if i1 < T::zero() || i0 > max {
            return None;
        }
        let i0 = i0.max(T::zero()).to_usize()?;
        let i1 = i1.min(max).to_usize()?;
        Some((i0, i1))
    };
    let Some((x0, x1)) = span(p.re, q.re, w.re_lo, dx, nx) else { return };
    let Some((y0, y1)) = span(p.im, q.im, w.im_lo, dy, ny) else { return };
    for iy in y0..=y1 {
        for ix in x0..=x1 {
            let c = cell_center(w, nx, ny, ix, iy);
            if point_segment_distance(c, p, q) <= reach {
                sentinel[iy * nx + ix] = true;
            }
        }
    }
}

fn flood_fill(sentinel: &[bool], nx: usize, ny: usize) -> (Vec<Option<usize>>, Vec<Vec<usize>>) {
    let mut comp = vec![None; sentinel.len()];
    let mut cells = Vec::new();
    for start in 0..sentinel.len() {
        if sentinel[start] || comp[start].is_some() {
            continue;
        }
        let id = cells.len();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        comp[start] = Some(id);
        while let Some(i) = queue.pop_front() {
            members.push(i);
            for j in neighbours(i, nx, ny) {
                if !sentinel[j] && comp[j].is_none() {
                    comp[j] = Some(id);
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        cells.push(members);
    }
    (comp, cells)
}

fn neighbours(i: usize, nx: usize, ny: usize) -> impl Iterator<Item = usize> {
    let (ix, iy) = (i % nx, i / nx);
    let mut out = [usize::MAX; 4];
    if ix > 0 {
        out[0] = i - 1;
    }
    if ix + 1 < nx {
        out[1] = i + 1;
    }
    if iy > 0 {
        out[2] = i - nx;
    }
    if iy + 1 < ny {
        out[3] = i + nx;
    }
    out.into_iter().filter(|&j| j != usize::MAX)
}

/// Grid (4-neighbour) distance from every cell to the nearest sentinel.
fn distance_to_sentinel(sentinel: &[bool], nx: usize, ny: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; sentinel.len()];
    let mut queue = VecDeque::new();
    for (i, &s) in sentinel.iter().enumerate() {
        if s {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        for j in neighbours(i, nx, ny) {
            if dist[j] == usize::MAX {
                dist[j] = dist[i] + 1;
                queue.push_back(j);
            }
        }
    }
    dist
}

/// Net `NU` change along the polygonal path `pts`: crossing a curve segment
/// in the direction of its normal `i·(q − p)` lowers `NU` by one.
/// `None` when the path touches a curve node or runs parallel to a segment.
fn crossing_count<T: Real>(pts: &[C<T>], segments: &[(C<T>, C<T>)]) -> Option<i64> {
    let edge = tol::<T>(1e-9);
    let mut total = 0i64;
    for leg in pts.windows(2) {
        let (a, b) = (leg[0], leg[1]);
        let d = b - a;
        for &(p, q) in segments {
            let t = q - p;
            let lo_re = a.re.min(b.re);
            let hi_re = a.re.max(b.re);
            if p.re.max(q.re) < lo_re || p.re.min(q.re) > hi_re {
                continue;
            }
            if p.im.max(q.im) < a.im.min(b.im) || p.im.min(q.im) > a.im.max(b.im) {
                continue;
            }
            if let Some((_, v)) = segment_intersection(a, b, p, q) {
                if v < edge || v > T::one() - edge {
                    return None;
                }
                let c = cross(d, t);
                if c.abs() <= edge * d.norm() * t.norm() {
                    return None;
                }
                let n = Complex::new(-t.im, t.re);
                total += if dot(d, n) > T::zero() { -1 } else { 1 };
            } else if cross(d, t).abs() <= edge * d.norm() * t.norm()
                && point_segment_distance(p, a, b) <= edge * (T::one() + d.norm())
            {
                return None;
            }
        }
    }
    Some(total)
}

/// Label at `target` from the anchor by counting crossings along two
/// different paths inside the window; `None` unless they agree.
fn propagate<T: Real>(
    from: C<T>,
    nu0: usize,
    target: C<T>,
    window: &Window<T>,
    segments: &[(C<T>, C<T>)],
) -> Option<usize> {
    let mid = (from + target) * lit::<T>(0.5);
    let d = target - from;
    let perp = Complex::new(-d.im, d.re);
    let clamp = |z: C<T>| {
        Complex::new(
            z.re.max(window.re_lo).min(window.re_hi),
            z.im.max(window.im_lo).min(window.im_hi),
        )
    };
    let mut results = Vec::new();
    let offsets: [f64; 8] = [0.0, 0.173, -0.291, 0.377, -0.419, 0.061, -0.137, 0.233];
    for &o in offsets.iter() {
        let path = if o == 0.0 {
            vec![from, target]
        } else {
            vec![from, clamp(mid + perp * lit::<T>(o)), target]
        };
        if let Some(delta) = crossing_count(&path, segments) {
            results.push(delta);
            if results.len() == 2 {
                break;
            }
        }
    }
    if results.len() < 2 || results[0] != results[1] {
        return None;
    }
    let nu = nu0 as i64 + results[0];
    (nu >= 0).then_some(nu as usize)
}

/// A connected set of cells with `NU = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region<T> {
    pub component: usize,
    pub cells: Vec<usize>,
    pub representative: C<T>,
    /// True when the region touches the window edge, so it may continue outside.
    pub clipped: bool,
    /// Curve pieces bordering the region.
    pub boundary: Vec<Vec<C<T>>>,
}

impl<T: Real> Region<T> {
    pub fn bounded(&self) -> bool {
        !self.clipped
    }
}

pub fn stability_region<T: Real>(map: &NuMap<T>) -> Vec<Region<T>> {
    let (nx, ny) = (map.nx, map.ny);
    let w = &map.window;
    let dx = w.width() / from_usize::<T>(nx);
    let dy = w.height() / from_usize::<T>(ny);
    let mut out = Vec::new();
    for (id, comp) in map.components.iter().enumerate() {
        if comp.nu != 0 {
            continue;
        }
        let clipped = comp.cells.iter().any(|&i| {
            let (ix, iy) = (i % nx, i / nx);
            ix == 0 || iy == 0 || ix + 1 == nx || iy + 1 == ny
        });
        let touches = |z: C<T>| -> bool {
            let fx = ((z.re - w.re_lo) / dx).floor();
            let fy = ((z.im - w.im_lo) / dy).floor();
            let (Some(cx), Some(cy)) = (fx.to_i64(), fy.to_i64()) else {
                return false;
            };
            for jy in cy - 2..=cy + 2 {
                for jx in cx - 2..=cx + 2 {
                    if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                        continue;
                    }
                    if map.component_of[jy as usize * nx + jx as usize] == Some(id) {
                        return true;
                    }
                }
            }
            false
        };
        let mut boundary = Vec::new();
        for poly in &map.curves {
            let mut run: Vec<C<T>> = Vec::new();
            for &z in poly {
                if touches(z) {
                    run.push(z);
                } else if run.len() >= 2 {
                    boundary.push(std::mem::take(&mut run));
                } else {
                    run.clear();
                }
            }
            if run.len() >= 2 {
                boundary.push(run);
            }
        }
        out.push(Region {
            component: id,
            cells: comp.cells.clone(),
            representative: comp.representative,
            clipped,
            boundary,
        });
    }
    out
}

/// A point where a curve meets the line `origin + s·direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCrossing<T> {
    pub s: T,
    pub branch: usize,
    pub beta: T,
    pub point: C<T>,
}

/// Crossings of the curves with the segment `origin + s·direction`,
/// `s ∈ [s_lo, s_hi]`, refined on `F` to rounding level. Sorted by `s`.
pub fn line_intersections<T: Real>(
    f: &CharFun<T>,
    branches: &[SccBranch<T>],
    origin: C<T>,
    direction: C<T>,
    s_lo: T,
    s_hi: T,
) -> Result<Vec<LineCrossing<T>>, RegionError> {
    let side = |z: C<T>| cross(direction, z - origin);
    let mut out: Vec<LineCrossing<T>> = Vec::new();
    for (bi, br) in branches.iter().enumerate() {
        for m in 0..br.len().saturating_sub(1) {
            let (p, q) = (br.points[m], br.points[m + 1]);
            let (sp, sq) = (side(p), side(q));
            if sp * sq > T::zero() {
                continue;
            }
            // a node on the line belongs to the segment starting there
            if sq == T::zero() && m + 2 < br.len() {
                continue;
            }
            let (mut lo, mut hi) = (br.beta[m], br.beta[m + 1]);
            let eval = |beta: T| -> Result<(T, C<T>), RegionError> {
                let (l, _) = point_at(f, br, beta)?;
                Ok((side(l), l))
            };
            let (mut flo, _) = eval(lo)?;
            let (fhi, _) = eval(hi)?;
            if flo * fhi > T::zero() {
                continue;
            }
            if flo == T::zero() {
                hi = lo;
            } else if fhi == T::zero() {
                lo = hi;
            }
            for _ in 0..200 {
                let mid = (lo + hi) * lit(0.5);
                if mid <= lo || mid >= hi {
                    break;
                }
                let (fm, _) = eval(mid)?;
                if fm == T::zero() {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < T::zero()) == (flo < T::zero()) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let beta = (lo + hi) * lit(0.5);
            let (_, point) = eval(beta)?;
            let s = dot(point - origin, direction) / direction.norm_sqr();
            if s < s_lo || s > s_hi {
                continue;
            }
            out.push(LineCrossing {
                s,
                branch: bi,
                beta,
                point,
            });
        }
    }
    out.sort_by(|x, y| x.s.partial_cmp(&y.s).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Maximal sub-intervals `[s₀, s₁]` of `[s_lo, s_hi]` on which `NU = 0`,
/// with endpoints at curve crossings (or at the range ends).
pub fn stable_intervals_on_line<T: Real>(
    f: &CharFun<T>,
    branches: &[SccBranch<T>],
    origin: C<T>,
    direction: C<T>,
    s_lo: T,
    s_hi: T,
) -> Result<Vec<(T, T)>, RegionError> {
    let crossings = line_intersections(f, branches, origin, direction, s_lo, s_hi)?;
    let mut cuts = vec![s_lo];
    let merge = tol::<T>(1e-10) * (T::one() + s_hi.abs().max(s_lo.abs()));
    for c in &crossings {
        if c.s - *cuts.last().unwrap() > merge {
            cuts.push(c.s);
        }
    }
    if s_hi - *cuts.last().unwrap() > merge {
        cuts.push(s_hi);
    } else {
        *cuts.last_mut().unwrap() = s_hi;
    }
    let mut out: Vec<(T, T)> = Vec::new();
    for w in cuts.windows(2) {
        let mid = origin + direction * ((w[0] + w[1]) * lit(0.5));
        if nu_contour(f, mid)? == 0 {
            match out.last_mut() {
                Some(last) if (last.1 - w[0]).abs() <= merge => last.1 = w[1],
                _ => out.push((w[0], w[1])),
            }
        }
    }
    Ok(out)
}
