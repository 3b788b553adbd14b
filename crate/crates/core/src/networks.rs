//! Network matrices, their spectra, master-stability decoupling and closed-form critical values.

use num_complex::Complex;
use num_traits::Num;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charfun::{CharFun, CharFunError};
use crate::kernels::DelayKernel;
use crate::linalg::{EigenError, Matrix};
use crate::regions::{membership, nu_contour, Membership, RegionError};
use crate::scalar::{from_usize, lit, to_f64, tol, Real, C};
use crate::systems;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("invalid network: {0}")]
    InvalidSpec(&'static str),
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("anchor unstable at alpha = 0: -R is not in the stability region")]
    AnchorUnstable,
    #[error("eigenvalue {re}{im:+}i lies on a crossing curve: marginal, undecidable at tolerance")]
    Marginal { re: f64, im: f64 },
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    CharFun(#[from] CharFunError),
}

/// Coupling topologies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NetworkSpec<T> {
    /// Each agent follows the next one around a ring with gain `alpha`.
    Ring { n: usize, alpha: T },
    /// Agents in a line; the last one is the uncoupled leader.
    Chain { n: usize, alpha: T },
    /// Weighted adjacency with the diagonal replaced by minus the row sums.
    Laplacian { weights: Vec<Vec<T>> },
    /// `−R·I + α·Ξ`, `Ξ` i.i.d. uniform on `[−1, 1]`.
    Random {
        n: usize,
        #[serde(rename = "R")]
        r: T,
        alpha: T,
        seed: u64,
    },
}

impl<T: Real> NetworkSpec<T> {
    pub fn validate(&self) -> Result<(), NetworkError> {
        match self {
            NetworkSpec::Ring { n, alpha } | NetworkSpec::Chain { n, alpha } => {
                if *n < 2 {
                    return Err(NetworkError::InvalidSpec("need at least two agents"));
                }
                if !(*alpha > T::zero()) || !alpha.is_finite() {
                    return Err(NetworkError::InvalidSpec("alpha must be positive"));
                }
            }
            NetworkSpec::Laplacian { weights } => {
                let n = weights.len();
                if n == 0 || weights.iter().any(|row| row.len() != n) {
                    return Err(NetworkError::InvalidSpec("weights must be a square matrix"));
                }
                for (i, row) in weights.iter().enumerate() {
                    for (j, &w) in row.iter().enumerate() {
                        if !w.is_finite() || w < T::zero() {
                            return Err(NetworkError::InvalidSpec("weights must be finite and nonnegative"));
                        }
                        if i == j && !w.is_zero() {
                            return Err(NetworkError::InvalidSpec("weights must have a zero diagonal"));
                        }
                    }
                }
            }
            NetworkSpec::Random { n, r, alpha, .. } => {
                if *n == 0 {
                    return Err(NetworkError::InvalidSpec("need at least one agent"));
                }
                if !(*r > T::zero()) || !r.is_finite() {
                    return Err(NetworkError::InvalidSpec("R must be positive"));
                }
                if !(*alpha >= T::zero()) || !alpha.is_finite() {
                    return Err(NetworkError::InvalidSpec("alpha must be nonnegative"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            NetworkSpec::Ring { n, .. } | NetworkSpec::Chain { n, .. } | NetworkSpec::Random { n, .. } => *n,
            NetworkSpec::Laplacian { weights } => weights.len(),
        }
    }

    /// The real network matrix `J`, row-major.
    pub fn matrix(&self) -> Result<Vec<Vec<T>>, NetworkError> {
        self.validate()?;
        let n = self.dim();
        let mut j = vec![vec![T::zero(); n]; n];
        match self {
            NetworkSpec::Ring { alpha, .. } => {
                for (i, row) in j.iter_mut().enumerate() {
                    row[i] = -*alpha;
                    row[(i + 1) % n] += *alpha;
                }
            }
            NetworkSpec::Chain { alpha, .. } => {
                for (i, row) in j.iter_mut().enumerate().take(n - 1) {
                    row[i] = -*alpha;
                    row[i + 1] = *alpha;
                }
            }
            NetworkSpec::Laplacian { weights } => {
                for (i, row) in j.iter_mut().enumerate() {
                    let mut sum = T::zero();
                    for (k, &w) in weights[i].iter().enumerate() {
                        if k != i {
                            row[k] = w;
                            sum += w;
                        }
                    }
                    row[i] = -sum;
                }
            }
            NetworkSpec::Random { r, alpha, seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for (i, row) in j.iter_mut().enumerate() {
                    for (k, x) in row.iter_mut().enumerate() {
                        let xi: f64 = rng.gen_range(-1.0..=1.0);
                        *x = *alpha * lit::<T>(xi);
                        if i == k {
                            *x -= *r;
                        }
                    }
                }
            }
        }
        Ok(j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    ClosedForm,
    QrIteration,
    CircularLawApprox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<C<T>>,
    pub method: SpectrumMethod,
    /// Center and radius of the predicted eigenvalue disk (circular-law approximation only).
    pub circle: Option<(C<T>, T)>,
}

pub fn spectrum<T: Real>(net: &NetworkSpec<T>) -> Result<Spectrum<T>, NetworkError> {
    net.validate()?;
    let eigenvalues = match net {
        NetworkSpec::Ring { n, alpha } => (0..*n).map(|l| ring_eigenvalue(*n, *alpha, l)).collect(),
        NetworkSpec::Chain { n, alpha } => {
            let mut v = vec![C::new(T::zero(), T::zero())];
            v.extend(std::iter::repeat(C::new(-*alpha, T::zero())).take(n - 1));
            v
        }
        _ => {
            let j = net.matrix()?;
            let n = j.len();
            let m = Matrix::from_fn(n, |r, c| C::new(j[r][c], T::zero()));
            return Ok(Spectrum {
                eigenvalues: m.eigenvalues()?,
                method: SpectrumMethod::QrIteration,
                circle: None,
            });
        }
    };
    Ok(Spectrum {
        eigenvalues,
        method: SpectrumMethod::ClosedForm,
        circle: None,
    })
}

/// `μ_l = α(e^{i2πl/N} − 1)`, with `μ_0 = 0` exactly.
pub fn ring_eigenvalue<T: Real>(n: usize, alpha: T, l: usize) -> C<T> {
    if l % n == 0 {
        return C::new(T::zero(), T::zero());
    }
    let phi = T::TAU() * from_usize::<T>(l) / from_usize::<T>(n);
    (Complex::from_polar(T::one(), phi) - T::one()) * alpha
}

/// Disk predicted for the spectrum of `−R·I + α·Ξ`: center `−R`, radius `α√(N/3)`.
pub fn circular_law_circle<T: Real>(n: usize, r: T, alpha: T) -> (C<T>, T) {
    (C::new(-r, T::zero()), alpha * (from_usize::<T>(n) / lit(3.0)).sqrt())
}

pub fn circular_law_spectrum<T: Real>(n: usize, r: T, alpha: T) -> Spectrum<T> {
    Spectrum {
        eigenvalues: Vec::new(),
        method: SpectrumMethod::CircularLawApprox,
        circle: Some(circular_law_circle(n, r, alpha)),
    }
}

/// Fraction of `points` inside the disk `(center, radius·inflate)`.
pub fn fraction_inside<T: Real>(points: &[C<T>], center: C<T>, radius: T, inflate: T) -> T {
    if points.is_empty() {
        return T::zero();
    }
    let r = radius * inflate;
    let inside = points.iter().filter(|z| (**z - center).norm() <= r).count();
    from_usize::<T>(inside) / from_usize::<T>(points.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusReport<T> {
    pub consensus: bool,
    pub offending: Vec<C<T>>,
    /// Whether a zero eigenvalue (the synchronization mode) was excluded.
    pub zero_excluded: bool,
}

/// Master-stability check: every transverse mode `μ` must be stable.
///
/// One eigenvalue within `1e−9` of zero is treated as the synchronization
/// mode and skipped; without one, every eigenvalue is checked.
pub fn msf_consensus_check<T: Real>(
    spectrum: &Spectrum<T>,
    member: impl Fn(C<T>) -> Result<Membership, RegionError>,
) -> Result<ConsensusReport<T>, NetworkError> {
    let zero_tol = tol::<T>(1e-9);
    let zero = spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() <= zero_tol)
        .min_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i);
    let mut offending = Vec::new();
    for (i, &mu) in spectrum.eigenvalues.iter().enumerate() {
        if Some(i) == zero {
            continue;
        }
        match member(mu)? {
            Membership::Stable => {}
            Membership::Unstable(_) => offending.push(mu),
            Membership::OnCurve => {
                return Err(NetworkError::Marginal {
                    re: to_f64(mu.re),
                    im: to_f64(mu.im),
                })
            }
        }
    }
    Ok(ConsensusReport {
        consensus: offending.is_empty(),
        offending,
        zero_excluded: zero.is_some(),
    })
}

/// Consensus of the car-following network with a Gamma kernel, by point queries.
pub fn carfollowing_consensus<T: Real>(
    net: &NetworkSpec<T>,
    n: u32,
    mean: T,
) -> Result<ConsensusReport<T>, NetworkError> {
    let f = systems::carfollowing(DelayKernel::gamma(n, mean))?;
    let spec = spectrum(net)?;
    msf_consensus_check(&spec, |mu| membership(&f, mu, &[]))
}

/// `T_c` for the ring with mode index `l`:
/// `n·tan(πl/(Nn))·[1+tan²]^{n/2} / (2α·sin(πl/N))`.
pub fn carfollowing_tc_mode<T: Real>(n: u32, agents: usize, alpha: T, l: usize) -> T {
    let nn = lit::<T>(n as f64);
    let phase = T::PI() * from_usize::<T>(l) / from_usize::<T>(agents);
    let t = (phase / nn).tan();
    nn * t * (T::one() + t * t).powf(nn * lit(0.5)) / (lit::<T>(2.0) * alpha * phase.sin())
}

/// Frequency `β_c` at which mode `l` meets the crossing curve at `T_c`.
pub fn carfollowing_beta_mode<T: Real>(n: u32, agents: usize, alpha: T, l: usize) -> T {
    let nn = lit::<T>(n as f64);
    let phase = T::PI() * from_usize::<T>(l) / from_usize::<T>(agents);
    let t = (phase / nn).tan();
    lit::<T>(2.0) * alpha * phase.sin() / (T::one() + t * t).powf(nn * lit(0.5))
}

/// Consensus threshold of the ring: `0 < T < T_c` (mode `l = 1`).
pub fn carfollowing_tc<T: Real>(n: u32, agents: usize, alpha: T) -> T {
    carfollowing_tc_mode(n, agents, alpha, 1)
}

/// Consensus threshold of the chain, `+∞` for `n = 1`.
pub fn chain_tc<T: Real>(n: u32, alpha: T) -> T {
    if n <= 1 {
        return T::infinity();
    }
    let nn = lit::<T>(n as f64);
    let t = (T::PI() / (lit::<T>(2.0) * nn)).tan();
    nn / alpha * t * (T::one() + t * t).powf(nn * lit(0.5))
}

/// Crossing curve of the delayed-PD agents: `(−β²−b−iaβ)(1+iβT)/(k₁+ik₂β)`.
pub fn mas_scc<T: Real>(a: T, b: T, k1: T, k2: T, t: T, beta: T) -> C<T> {
    let num = Complex::new(-beta * beta - b, -a * beta) * Complex::new(T::one(), beta * t);
    num / Complex::new(k1, k2 * beta)
}

/// `θ_T(β) = π + arctan(aβ/(β²+b)) + arctan(βT) − arctan(k₂β/k₁)`.
pub fn mas_theta<T: Real>(a: T, b: T, k1: T, k2: T, t: T, beta: T) -> T {
    T::PI() + (a * beta / (beta * beta + b)).atan() + (beta * t).atan() - (k2 * beta / k1).atan()
}

/// `r_T(β) = √((β²+b)² + a²β²)·√(1+β²T²) / √(k₁² + k₂²β²)`.
pub fn mas_radius<T: Real>(a: T, b: T, k1: T, k2: T, t: T, beta: T) -> T {
    let b2 = beta * beta;
    ((b2 + b) * (b2 + b) + a * a * b2).sqrt() * (T::one() + b2 * t * t).sqrt() / (k1 * k1 + k2 * k2 * b2).sqrt()
}

/// `T_c1 = k₂/k₁ − a/b`, exact in any field (e.g. rationals).
pub fn mas_tc1<N: Num + Copy>(a: N, b: N, k1: N, k2: N) -> Result<N, NetworkError> {
    if k1.is_zero() {
        return Err(NetworkError::DivisionByZero("k1 = 0"));
    }
    if b.is_zero() {
        return Err(NetworkError::DivisionByZero("b = 0"));
    }
    Ok(k2 / k1 - a / b)
}

/// `T_c2 = 1/(a + k₁/k₂)`.
pub fn mas_tc2<T: Real>(a: T, k1: T, k2: T) -> Result<T, NetworkError> {
    if k2.is_zero() {
        return Err(NetworkError::DivisionByZero("k2 = 0"));
    }
    let s = a + k1 / k2;
    if !(s > T::zero()) {
        return Err(NetworkError::Precondition("a + k1/k2 must be positive".into()));
    }
    Ok(T::one() / s)
}

/// Delayed-PD agent parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MasParams<T> {
    pub a: T,
    pub b: T,
    pub k1: T,
    pub k2: T,
}

/// `α_c = √(3/N)·inf_β |L_T(β) + R|`: the noise strength at which the
/// circular-law disk around `−R` first touches the crossing curve.
pub fn alpha_c<T: Real>(p: &MasParams<T>, t: T, r: T, n: usize) -> Result<T, NetworkError> {
    if p.k1.is_zero() {
        return Err(NetworkError::DivisionByZero("k1 = 0"));
    }
    let tc2 = mas_tc2(p.a, p.k1, p.k2)?;
    if t >= tc2 {
        return Err(NetworkError::Precondition(format!(
            "T = {} is not below T_c2 = {}",
            to_f64(t),
            to_f64(tc2)
        )));
    }
    let f = systems::mas(p.a, p.b, p.k1, p.k2, t)?;
    match membership(&f, C::new(-r, T::zero()), &[])? {
        Membership::Stable => {}
        Membership::OnCurve => return Ok(T::zero()),
        Membership::Unstable(_) => return Err(NetworkError::AnchorUnstable),
    }
    let dist = |beta: T| (mas_scc(p.a, p.b, p.k1, p.k2, t, beta) + r).norm();
    let scale = [p.a, p.b, p.k1, p.k2, t, r]
        .iter()
        .fold(T::one(), |m, x| m.max(x.abs()));
    let inf = minimize_1d(dist, -scale * lit(50.0), scale * lit(50.0), 10_000);
    Ok((lit::<T>(3.0) / from_usize::<T>(n)).sqrt() * inf)
}

/// Global minimum of `g` on `[lo, hi]`: grid scan, then golden-section search
/// in the bracket of every grid-local minimum.
pub fn minimize_1d<T: Real>(g: impl Fn(T) -> T, lo: T, hi: T, points: usize) -> T {
    let h = (hi - lo) / from_usize::<T>(points);
    let xs: Vec<T> = (0..=points).map(|m| lo + h * from_usize::<T>(m)).collect();
    let ys: Vec<T> = xs.iter().map(|&x| g(x)).collect();
    let mut best = ys.iter().copied().fold(T::infinity(), T::min);
    for m in 0..=points {
        let left = if m == 0 { T::infinity() } else { ys[m - 1] };
        let right = if m == points { T::infinity() } else { ys[m + 1] };
        if ys[m] <= left && ys[m] <= right {
            let a = xs[m.saturating_sub(1)];
            let b = xs[(m + 1).min(points)];
            best = best.min(golden(&g, a, b));
        }
    }
    best
}

fn golden<T: Real>(g: &impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let ratio = (lit::<T>(5.0).sqrt() - T::one()) * lit(0.5);
    let mut c = b - (b - a) * ratio;
    let mut d = a + (b - a) * ratio;
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if (b - a).abs() <= T::epsilon() * lit(4.0) * (T::one() + a.abs() + b.abs()) {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - (b - a) * ratio;
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + (b - a) * ratio;
            gd = g(d);
        }
    }
    gc.min(gd).min(g((a + b) * lit(0.5)))
}

/// Parameter value `p*` in `(p_stable, p_unstable)` at which the fixed gain
/// `mu` reaches the crossing curve of `build(p)`, with the frequency `β*`.
///
/// Bisection on the contour count at `mu`, then two-dimensional Newton on
/// `F_p(iβ, μ) = 0` in `(β, p)`.
pub fn crossing_parameter<T: Real>(
    build: impl Fn(T) -> Result<CharFun<T>, CharFunError>,
    mu: C<T>,
    p_stable: T,
    p_unstable: T,
) -> Result<(T, T), NetworkError> {
    let stable = |p: T| -> Result<bool, NetworkError> {
        match nu_contour(&build(p)?, mu) {
            Ok(n) => Ok(n == 0),
            Err(RegionError::OnScc { .. }) => Ok(false),
            Err(e) => Err(e.into()),
        }
    };
    if !stable(p_stable)? || stable(p_unstable)? {
        return Err(NetworkError::Precondition("bracket does not straddle the crossing".into()));
    }
    let (mut lo, mut hi) = (p_stable, p_unstable);
    for _ in 0..30 {
        let mid = (lo + hi) * lit(0.5);
        if stable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut p = (lo + hi) * lit(0.5);
    let f = build(p)?;
    let reach = f.radius_bound(mu, T::zero());
    let samples = 20_000;
    let mut beta = T::zero();
    let mut best = T::infinity();
    for m in 0..=samples {
        let b = -reach + reach * lit::<T>(2.0) * from_usize::<T>(m) / from_usize::<T>(samples);
        let v = f.eval(Complex::new(T::zero(), b), mu)?.norm() / T::one().max(b.abs().powi(f.dim() as i32));
        if v < best {
            best = v;
            beta = b;
        }
    }
    let i = Complex::new(T::zero(), T::one());
    for _ in 0..50 {
        let f = build(p)?;
        let lambda = Complex::new(T::zero(), beta);
        let g = f.eval(lambda, mu)?;
        let g_beta = f.d_lambda(lambda, mu)? * i;
        let dp = tol::<T>(1e-7) * (T::one() + p.abs());
        let g_p = (build(p + dp)?.eval(lambda, mu)? - build(p - dp)?.eval(lambda, mu)?) / (dp * lit(2.0));
        // [g_beta g_p] (δβ, δp)ᵀ = −g in real 2×2 form
        let det = g_beta.re * g_p.im - g_beta.im * g_p.re;
        if det.is_zero() {
            break;
        }
        let d_beta = -(g.re * g_p.im - g.im * g_p.re) / det;
        let d_p = -(g_beta.re * g.im - g_beta.im * g.re) / det;
        beta += d_beta;
        p += d_p;
        if d_beta.abs() + d_p.abs() <= tol::<T>(1e-14) * (T::one() + beta.abs() + p.abs()) {
            break;
        }
    }
    Ok((p, beta))
}
