//! Time-domain integration of the delay systems, used to validate the
//! frequency-domain verdicts.
//!
//! Discrete delays use the method of steps with classical RK4 and cubic
//! Hermite interpolation of stored nodes; Gamma and exponential kernels use
//! the linear chain trick, which turns the distributed delay into `n`
//! first-order filter stages.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::DelayKernel;
use crate::scalar::{from_usize, lit, to_f64, Real, C};

/// States larger than this end the integration.
pub const BLOWUP: f64 = 1e12;
/// Order-parameter magnitudes above this are unphysical.
pub const OA_BLOWUP: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("unsupported kernel for this simulation: {0}")]
    UnsupportedKernel(&'static str),
    #[error("rate fit needs at least 100 samples in the window, found {0}")]
    TooFewSamples(usize),
}

/// Initial function on `t ≤ 0`; constant in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HistorySpec<T> {
    Constant { re: T, im: T },
    /// Each component drawn once from `U[−amplitude, amplitude]`.
    RandomUniform { seed: u64, amplitude: T },
}

impl<T: Real> HistorySpec<T> {
    /// Real components (networks).
    pub fn real_values(&self, dim: usize) -> Vec<T> {
        match *self {
            HistorySpec::Constant { re, .. } => vec![re; dim],
            HistorySpec::RandomUniform { seed, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..dim)
                    .map(|_| amplitude * lit::<T>(rng.gen_range(-1.0..=1.0)))
                    .collect()
            }
        }
    }

    /// Complex components (scalar systems).
    pub fn complex_values(&self, dim: usize) -> Vec<C<T>> {
        match *self {
            HistorySpec::Constant { re, im } => vec![Complex::new(re, im); dim],
            HistorySpec::RandomUniform { seed, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..dim)
                    .map(|_| {
                        let re: f64 = rng.gen_range(-1.0..=1.0);
                        let im: f64 = rng.gen_range(-1.0..=1.0);
                        Complex::new(lit::<T>(re), lit::<T>(im)) * amplitude
                    })
                    .collect()
            }
        }
    }
}

fn default_fraction<T: Real>() -> T {
    lit(0.5)
}

fn default_rate_tol<T: Real>() -> T {
    lit(0.01)
}

fn default_sample_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct SimConfig<T> {
    pub dt: T,
    pub horizon: T,
    /// `None` selects the per-system default.
    #[serde(default)]
    pub history: Option<HistorySpec<T>>,
    #[serde(default = "default_fraction")]
    pub rate_window_fraction: T,
    #[serde(default = "default_rate_tol")]
    pub rate_tol: T,
    /// Record every k-th step.
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

impl<T: Real> SimConfig<T> {
    pub fn new(dt: T, horizon: T) -> Self {
        SimConfig {
            dt,
            horizon,
            history: None,
            rate_window_fraction: default_fraction(),
            rate_tol: default_rate_tol(),
            sample_every: 1,
        }
    }

    pub fn with_history(mut self, history: HistorySpec<T>) -> Self {
        self.history = Some(history);
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.into()));
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return bad("dt must be positive");
        }
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return bad("horizon must be positive");
        }
        if self.dt > self.horizon {
            return bad("dt exceeds the horizon");
        }
        if !(self.rate_window_fraction > T::zero() && self.rate_window_fraction < T::one()) {
            return bad("rate_window_fraction must lie in (0, 1)");
        }
        if !(self.rate_tol >= T::zero()) {
            return bad("rate_tol must be nonnegative");
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1");
        }
        if let Some(HistorySpec::RandomUniform { amplitude, .. }) = self.history {
            if !(amplitude >= T::zero()) {
                return bad("history amplitude must be nonnegative");
            }
        }
        Ok(())
    }

    fn steps(&self, dt: T) -> usize {
        (self.horizon / dt - lit(1e-9)).ceil().to_usize().unwrap_or(0).max(1)
    }
}

/// Largest step `≤ dt` that divides `tau`, and the delay in steps.
pub fn aligned_step<T: Real>(dt: T, tau: T) -> (T, usize) {
    let m = (tau / dt - lit(1e-9)).ceil().to_usize().unwrap_or(1).max(1);
    (tau / from_usize::<T>(m), m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<C<T>>>,
    /// Time at which the blow-up guard fired.
    pub blowup: Option<T>,
}

impl<T: Real> Trajectory<T> {
    fn new() -> Self {
        Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            blowup: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn norms(&self) -> Vec<T> {
        self.states.iter().map(|s| norm(s)).collect()
    }

    pub fn last(&self) -> Option<&[C<T>]> {
        self.states.last().map(|s| s.as_slice())
    }
}

fn norm<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converging,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate<T> {
    /// Growth rate in 1/time; `±∞` for an all-zero tail or a blow-up.
    pub rate: T,
    pub r_squared: T,
    pub verdict: Verdict,
}

/// Exponential rate of `‖state‖`.
pub fn estimate_rate<T: Real>(traj: &Trajectory<T>, cfg: &SimConfig<T>) -> Result<RateEstimate<T>, SimError> {
    estimate_rate_series(&traj.times, &traj.norms(), traj.blowup, cfg)
}

/// Least-squares slope of `log v(t)` over the trailing window.
pub fn estimate_rate_series<T: Real>(
    times: &[T],
    values: &[T],
    blowup: Option<T>,
    cfg: &SimConfig<T>,
) -> Result<RateEstimate<T>, SimError> {
    if blowup.is_some() {
        return Ok(RateEstimate {
            rate: T::infinity(),
            r_squared: T::one(),
            verdict: Verdict::Diverging,
        });
    }
    let (Some(&t0), Some(&t1)) = (times.first(), times.last()) else {
        return Err(SimError::TooFewSamples(0));
    };
    let start = t1 - (t1 - t0) * cfg.rate_window_fraction;
    let window: Vec<(T, T)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= start)
        .map(|(t, v)| (*t, *v))
        .collect();
    if window.len() < 100 {
        return Err(SimError::TooFewSamples(window.len()));
    }
    let points: Vec<(T, T)> = window
        .iter()
        .filter(|(_, v)| *v > T::zero())
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if points.len() < 2 {
        return Ok(RateEstimate {
            rate: T::neg_infinity(),
            r_squared: T::one(),
            verdict: Verdict::Converging,
        });
    }
    let n = from_usize::<T>(points.len());
    let mt = points.iter().map(|p| p.0).sum::<T>() / n;
    let my = points.iter().map(|p| p.1).sum::<T>() / n;
    let stt = points.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum::<T>();
    let sty = points.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum::<T>();
    let syy = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum::<T>();
    let rate = sty / stt;
    let r_squared = if syy > T::zero() {
        (sty * sty / (stt * syy)).min(T::one())
    } else {
        T::one()
    };
    let verdict = if rate < -cfg.rate_tol {
        Verdict::Converging
    } else if rate > cfg.rate_tol {
        Verdict::Diverging
    } else {
        Verdict::Inconclusive
    };
    Ok(RateEstimate { rate, r_squared, verdict })
}

fn axpy<T: Real>(y: &[C<T>], h: T, k: &[C<T>]) -> Vec<C<T>> {
    y.iter().zip(k).map(|(a, b)| *a + *b * h).collect()
}

fn blown<T: Real>(y: &[C<T>], limit: T) -> bool {
    y.iter().any(|z| !(z.norm() <= limit))
}

/// Classical RK4 for `y' = f(t, y)`; `observe` sees every accepted state.
fn integrate_ode<T: Real>(
    y0: Vec<C<T>>,
    dt: T,
    steps: usize,
    limit: T,
    mut rhs: impl FnMut(T, &[C<T>]) -> Vec<C<T>>,
    mut observe: impl FnMut(usize, T, &[C<T>]),
) -> Option<T> {
    let half = dt * lit(0.5);
    let sixth = dt / lit(6.0);
    let mut y = y0;
    observe(0, T::zero(), &y);
    for n in 0..steps {
        let t = from_usize::<T>(n) * dt;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + half, &axpy(&y, half, &k1));
        let k3 = rhs(t + half, &axpy(&y, half, &k2));
        let k4 = rhs(t + dt, &axpy(&y, dt, &k3));
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * lit::<T>(2.0) + k4[i]) * sixth;
        }
        let t1 = from_usize::<T>(n + 1) * dt;
        if blown(&y, limit) {
            return Some(t1);
        }
        observe(n + 1, t1, &y);
    }
    None
}

/// RK4 with one discrete delay of `m` steps; the history is constant `y0`.
///
/// Stage values at `t − τ + dt/2` come from the cubic Hermite interpolant of
/// the two neighbouring nodes, using the stored node derivatives.
fn integrate_dde<T: Real>(
    y0: Vec<C<T>>,
    dt: T,
    m: usize,
    steps: usize,
    limit: T,
    rhs: impl Fn(T, &[C<T>], &[C<T>]) -> Vec<C<T>>,
    mut observe: impl FnMut(usize, T, &[C<T>]),
) -> Option<T> {
    let cap = m + 2;
    let dim = y0.len();
    let mut nodes: Vec<Vec<C<T>>> = vec![y0.clone(); cap];
    let mut slopes: Vec<Vec<C<T>>> = vec![vec![C::new(T::zero(), T::zero()); dim]; cap];
    let half = dt * lit(0.5);
    let sixth = dt / lit(6.0);
    let eighth = dt / lit(8.0);
    // node index may be negative: the constant history
    let node = |nodes: &Vec<Vec<C<T>>>, idx: isize| -> Vec<C<T>> {
        if idx < 0 {
            y0.clone()
        } else {
            nodes[idx as usize % cap].clone()
        }
    };
    let mut y = y0.clone();
    observe(0, T::zero(), &y);
    for n in 0..steps {
        let t = from_usize::<T>(n) * dt;
        let lag = n as isize - m as isize;
        let d0 = node(&nodes, lag);
        let k1 = rhs(t, &y, &d0);
        nodes[n % cap] = y.clone();
        slopes[n % cap] = k1.clone();
        let d1 = node(&nodes, lag + 1);
        let dh: Vec<C<T>> = if lag < 0 {
            y0.clone()
        } else {
            let (a, b) = (lag as usize % cap, (lag + 1) as usize % cap);
            (0..dim)
                .map(|i| {
                    (nodes[a][i] + nodes[b][i]) * lit::<T>(0.5) + (slopes[a][i] - slopes[b][i]) * eighth
                })
                .collect()
        };
        let k2 = rhs(t + half, &axpy(&y, half, &k1), &dh);
        let k3 = rhs(t + half, &axpy(&y, half, &k2), &dh);
        let k4 = rhs(t + dt, &axpy(&y, dt, &k3), &d1);
        for i in 0..dim {
            y[i] += (k1[i] + (k2[i] + k3[i]) * lit::<T>(2.0) + k4[i]) * sixth;
        }
        let t1 = from_usize::<T>(n + 1) * dt;
        if blown(&y, limit) {
            return Some(t1);
        }
        observe(n + 1, t1, &y);
    }
    None
}

fn recorder<T: Real>(traj: &mut Trajectory<T>, every: usize) -> impl FnMut(usize, T, &[C<T>]) + '_ {
    move |n, t, y| {
        if n % every == 0 {
            traj.times.push(t);
            traj.states.push(y.to_vec());
        }
    }
}

fn scalar_history<T: Real>(cfg: &SimConfig<T>) -> C<T> {
    cfg.history
        .unwrap_or(HistorySpec::Constant {
            re: lit(0.1),
            im: T::zero(),
        })
        .complex_values(1)[0]
}

/// `ż = (a + id) z + L z(t − τ)`. The step is shrunk to divide `τ`.
pub fn simulate_scalar_discrete<T: Real>(
    a: T,
    d: T,
    l: C<T>,
    tau: T,
    cfg: &SimConfig<T>,
) -> Result<Trajectory<T>, SimError> {
    cfg.validate()?;
    if !(tau > T::zero()) {
        return Err(SimError::InvalidConfig("tau must be positive".into()));
    }
    let (dt, m) = aligned_step(cfg.dt, tau);
    let ad = Complex::new(a, d);
    let mut traj = Trajectory::new();
    let blowup = integrate_dde(
        vec![scalar_history(cfg)],
        dt,
        m,
        cfg.steps(dt),
        lit(BLOWUP),
        |_, y, yd| vec![ad * y[0] + l * yd[0]],
        recorder(&mut traj, cfg.sample_every),
    );
    traj.blowup = blowup;
    Ok(traj)
}

/// Chain-trick rate `n/T` and stage count of a Gamma or exponential kernel.
fn chain_of<T: Real>(kernel: &DelayKernel<T>) -> Result<(usize, T), SimError> {
    match *kernel {
        DelayKernel::Gamma { n, mean } if n >= 1 && mean > T::zero() => {
            Ok((n as usize, lit::<T>(n as f64) / mean))
        }
        DelayKernel::Exponential { mean } if mean > T::zero() => Ok((1, T::one() / mean)),
        DelayKernel::Gamma { .. } | DelayKernel::Exponential { .. } => {
            Err(SimError::InvalidConfig("kernel mean and order must be positive".into()))
        }
        _ => Err(SimError::UnsupportedKernel("expected a Gamma or exponential kernel")),
    }
}

/// `ż = a z + L ∫ z(t−τ) h(τ) dτ` with a Gamma kernel, state `[z, y₁..y_n]`.
pub fn simulate_scalar_gamma<T: Real>(
    a: T,
    l: C<T>,
    kernel: DelayKernel<T>,
    cfg: &SimConfig<T>,
) -> Result<Trajectory<T>, SimError> {
    cfg.validate()?;
    let (n, rate) = chain_of(&kernel)?;
    let z0 = scalar_history(cfg);
    let mut traj = Trajectory::new();
    let mut full = Vec::new();
    let blowup = integrate_ode(
        vec![z0; n + 1],
        cfg.dt,
        cfg.steps(cfg.dt),
        lit(BLOWUP),
        |_, y| {
            let mut dy = Vec::with_capacity(n + 1);
            dy.push(y[0] * a + l * y[n]);
            for m in 1..=n {
                dy.push((y[m - 1] - y[m]) * rate);
            }
            dy
        },
        |k, t, y| {
            if k % cfg.sample_every == 0 {
                full.push((t, y[0]));
            }
        },
    );
    for (t, z) in full {
        traj.times.push(t);
        traj.states.push(vec![z]);
    }
    traj.blowup = blowup;
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncRun<T> {
    /// Agent states `x₁..x_N`.
    pub trajectory: Trajectory<T>,
    /// `max_{i<j} |x_i − x_j|` at each recorded time.
    pub gap: Vec<T>,
    pub rate: RateEstimate<T>,
    /// Initial states already agree; the gap is identically zero.
    pub already_consensus: bool,
}

/// Car-following network `ẋ = ∫ h(τ) J x(t−τ) dτ` for a ring or chain `J`.
///
/// The filter stages act on the neighbour-difference signal `J x`.
pub fn simulate_carfollowing<T: Real>(
    net: &crate::networks::NetworkSpec<T>,
    kernel: DelayKernel<T>,
    cfg: &SimConfig<T>,
) -> Result<SyncRun<T>, SimError> {
    use crate::networks::NetworkSpec;
    cfg.validate()?;
    if !matches!(net, NetworkSpec::Ring { .. } | NetworkSpec::Chain { .. }) {
        return Err(SimError::InvalidConfig("car-following needs a ring or chain network".into()));
    }
    let j = net.matrix().map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let (n, rate) = chain_of(&kernel)?;
    let agents = j.len();
    let x0 = cfg
        .history
        .unwrap_or(HistorySpec::RandomUniform {
            seed: 0,
            amplitude: T::one(),
        })
        .real_values(agents);
    let jx = |x: &[C<T>]| -> Vec<C<T>> {
        j.iter()
            .map(|row| row.iter().zip(x).fold(C::new(T::zero(), T::zero()), |s, (a, v)| s + *v * *a))
            .collect()
    };
    let x0c: Vec<C<T>> = x0.iter().map(|&v| C::new(v, T::zero())).collect();
    let d0 = jx(&x0c);
    // layout: x (agents), then stage m of agent i at agents·m + i
    let mut y0 = x0c.clone();
    for _ in 0..n {
        y0.extend_from_slice(&d0);
    }
    let mut traj = Trajectory::new();
    let mut gap = Vec::new();
    let spread = |x: &[C<T>]| -> T {
        let (lo, hi) = x
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)));
        hi - lo
    };
    let blowup = integrate_ode(
        y0,
        cfg.dt,
        cfg.steps(cfg.dt),
        lit(BLOWUP),
        |_, y| {
            let x = &y[..agents];
            let d = jx(x);
            let mut dy = Vec::with_capacity(y.len());
            dy.extend_from_slice(&y[agents * n..agents * (n + 1)]);
            for m in 1..=n {
                for i in 0..agents {
                    let input = if m == 1 { d[i] } else { y[agents * (m - 1) + i] };
                    dy.push((input - y[agents * m + i]) * rate);
                }
            }
            dy
        },
        |k, t, y| {
            if k % cfg.sample_every == 0 {
                traj.times.push(t);
                traj.states.push(y[..agents].to_vec());
                gap.push(spread(&y[..agents]));
            }
        },
    );
    traj.blowup = blowup;
    let already_consensus = d0.iter().all(|z| z.norm().is_zero());
    let rate = if already_consensus {
        RateEstimate {
            rate: T::zero(),
            r_squared: T::one(),
            verdict: Verdict::Inconclusive,
        }
    } else {
        estimate_rate_series(&traj.times, &gap, blowup, cfg)?
    };
    Ok(SyncRun {
        trajectory: traj,
        gap,
        rate,
        already_consensus,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasRun<T> {
    pub stabilized: bool,
    /// Positions `x₁..x_N`.
    pub trajectory: Trajectory<T>,
    pub initial_norm: T,
    pub tail_norm: T,
}

fn dot4<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail = ra.iter().zip(rb).fold(T::zero(), |s, (&x, &y)| s + x * y);
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Delayed-PD agents `ẋ = v`, `v̇ = a v + b x + J(k₁ x̃ + k₂ ṽ)`, where `x̃, ṽ`
/// are filtered by the exponential kernel of mean `T` (`T = 0`: unfiltered).
///
/// Stabilized when the largest state norm over the last 10% of the horizon
/// is below `10⁻³` times the initial norm.
#[allow(clippy::too_many_arguments)]
pub fn simulate_mas<T: Real>(
    a: T,
    b: T,
    k1: T,
    k2: T,
    mean: T,
    j: &[Vec<T>],
    cfg: &SimConfig<T>,
) -> Result<MasRun<T>, SimError> {
    cfg.validate()?;
    if !(mean >= T::zero()) {
        return Err(SimError::InvalidConfig("kernel mean must be nonnegative".into()));
    }
    let n = j.len();
    if j.iter().any(|row| row.len() != n) || n == 0 {
        return Err(SimError::InvalidConfig("J must be a nonempty square matrix".into()));
    }
    let h = cfg
        .history
        .unwrap_or(HistorySpec::RandomUniform {
            seed: 0,
            amplitude: T::one(),
        })
        .real_values(2 * n);
    let filtered = mean > T::zero();
    let inv_t = if filtered { T::one() / mean } else { T::zero() };
    // real state: x, v, then filtered x̃, ṽ
    let mut y: Vec<T> = h.clone();
    if filtered {
        y.extend_from_slice(&h);
    }
    let initial_norm = h.iter().map(|v| *v * *v).sum::<T>().sqrt();
    let rhs = |y: &[T], out: &mut [T], g: &mut [T]| {
        let (xs, vs) = (&y[..n], &y[n..2 * n]);
        let (fx, fv) = if filtered { (&y[2 * n..3 * n], &y[3 * n..4 * n]) } else { (xs, vs) };
        for k in 0..n {
            g[k] = k1 * fx[k] + k2 * fv[k];
        }
        for i in 0..n {
            let c = dot4(&j[i], g);
            out[i] = vs[i];
            out[n + i] = a * vs[i] + b * xs[i] + c;
            if filtered {
                out[2 * n + i] = (xs[i] - fx[i]) * inv_t;
                out[3 * n + i] = (vs[i] - fv[i]) * inv_t;
            }
        }
    };
    let mut g = vec![T::zero(); n];
    let dim = y.len();
    let (mut k1s, mut k2s, mut k3s, mut k4s) = (vec![T::zero(); dim], vec![T::zero(); dim], vec![T::zero(); dim], vec![T::zero(); dim]);
    let mut tmp = vec![T::zero(); dim];
    let dt = cfg.dt;
    let steps = cfg.steps(dt);
    let tail_from = steps - steps / 10;
    let mut tail_norm = T::zero();
    let mut traj = Trajectory::new();
    let record = |traj: &mut Trajectory<T>, t: T, y: &[T]| {
        traj.times.push(t);
        traj.states.push(y[..n].iter().map(|&v| C::new(v, T::zero())).collect());
    };
    record(&mut traj, T::zero(), &y);
    let (half, sixth) = (dt * lit(0.5), dt / lit(6.0));
    let limit = lit::<T>(BLOWUP);
    for s in 0..steps {
        rhs(&y, &mut k1s, &mut g);
        for i in 0..dim {
            tmp[i] = y[i] + half * k1s[i];
        }
        rhs(&tmp, &mut k2s, &mut g);
        for i in 0..dim {
            tmp[i] = y[i] + half * k2s[i];
        }
        rhs(&tmp, &mut k3s, &mut g);
        for i in 0..dim {
            tmp[i] = y[i] + dt * k3s[i];
        }
        rhs(&tmp, &mut k4s, &mut g);
        for i in 0..dim {
            y[i] += sixth * (k1s[i] + lit::<T>(2.0) * (k2s[i] + k3s[i]) + k4s[i]);
        }
        let t = from_usize::<T>(s + 1) * dt;
        let state_norm = y[..2 * n].iter().map(|v| *v * *v).sum::<T>().sqrt();
        if !(state_norm <= limit) {
            traj.blowup = Some(t);
            return Ok(MasRun {
                stabilized: false,
                trajectory: traj,
                initial_norm,
                tail_norm: T::infinity(),
            });
        }
        if s + 1 >= tail_from {
            tail_norm = tail_norm.max(state_norm);
        }
        if (s + 1) % cfg.sample_every == 0 {
            record(&mut traj, t, &y);
        }
    }
    Ok(MasRun {
        stabilized: tail_norm < initial_norm * lit(1e-3),
        trajectory: traj,
        initial_norm,
        tail_norm,
    })
}

/// Sampler for the pairwise delays `τ_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelaySampler<T> {
    Constant { tau: T },
    Exponential { mean: T },
}

fn default_switch_on<T: Real>() -> T {
    lit(10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct KuramotoParams<T> {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: T,
    #[serde(rename = "C")]
    pub c: T,
    #[serde(rename = "S")]
    pub s: T,
    pub d: T,
    pub delays: DelaySampler<T>,
    #[serde(default = "default_switch_on")]
    pub switch_on: T,
    pub seed: u64,
    /// Added to every initial phase.
    #[serde(default)]
    pub phase_shift: T,
    /// Keep the phases every k-th recorded sample; 0 disables snapshots.
    #[serde(default)]
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KuramotoRun<T> {
    pub times: Vec<T>,
    /// Order parameter `r(t) = (1/N) Σ e^{iθ_j}`.
    pub r: Vec<C<T>>,
    pub snapshots: Vec<(T, Vec<T>)>,
    /// Natural frequencies redrawn because `|ω − d| > 50`.
    pub truncated_frequencies: usize,
    /// Delays redrawn because they exceeded the buffer cap.
    pub resampled_delays: usize,
}

impl<T: Real> KuramotoRun<T> {
    /// Mean of `|r|` over `[t0, t1]`.
    pub fn mean_abs_r(&self, t0: T, t1: T) -> T {
        let vals: Vec<T> = self
            .times
            .iter()
            .zip(&self.r)
            .filter(|(t, _)| **t >= t0 && **t <= t1)
            .map(|(_, r)| r.norm())
            .collect();
        vals.iter().copied().sum::<T>() / from_usize::<T>(vals.len().max(1))
    }
}

/// Microscopic Kuramoto population with delayed feedback
/// `u_i = (C/N) Σ_{j≠i} sin(θ_j(t−τ_ij) − θ_i) + (S/N) Σ_{j≠i} cos(θ_j(t−τ_ij) − θ_i)`,
/// switched on at `switch_on`.
///
/// Delays are rounded to whole steps (at least one). Phases are held at
/// `θ_i(0)` for lookups before `t = 0`.
pub fn simulate_kuramoto<T: Real>(p: &KuramotoParams<T>, cfg: &SimConfig<T>) -> Result<KuramotoRun<T>, SimError> {
    cfg.validate()?;
    if p.n < 2 {
        return Err(SimError::InvalidConfig("need at least two oscillators".into()));
    }
    let n = p.n;
    let dt = cfg.dt;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let shift = p.phase_shift;
    let theta0: Vec<T> = (0..n)
        .map(|_| lit::<T>(rng.gen_range(0.0..std::f64::consts::TAU)) + shift)
        .collect();
    let cauchy = Cauchy::new(to_f64(p.d), 1.0).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let mut truncated_frequencies = 0;
    let omega: Vec<T> = (0..n)
        .map(|_| loop {
            let w: f64 = cauchy.sample(&mut rng);
            if (w - to_f64(p.d)).abs() <= 50.0 {
                break lit::<T>(w);
            }
            truncated_frequencies += 1;
        })
        .collect();
    let steps_of = |tau: f64| -> usize { ((tau / to_f64(dt)).round() as usize).max(1) };
    let mut resampled_delays = 0;
    let lags: Option<Vec<u32>> = match p.delays {
        DelaySampler::Constant { tau } => {
            if !(tau >= T::zero()) {
                return Err(SimError::InvalidConfig("delay must be nonnegative".into()));
            }
            None
        }
        DelaySampler::Exponential { mean } => {
            if !(mean > T::zero()) {
                return Err(SimError::InvalidConfig("delay mean must be positive".into()));
            }
            let mean = to_f64(mean);
            let cap = mean * 1000f64.ln();
            let exp = Exp::new(1.0 / mean).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
            let mut v = Vec::with_capacity(n * n);
            for _ in 0..n * n {
                let tau = loop {
                    let x: f64 = exp.sample(&mut rng);
                    if x <= cap {
                        break x;
                    }
                    resampled_delays += 1;
                };
                v.push(steps_of(tau) as u32);
            }
            Some(v)
        }
    };
    let const_lag = match p.delays {
        DelaySampler::Constant { tau } => steps_of(to_f64(tau)),
        DelaySampler::Exponential { .. } => 0,
    };
    let max_lag = lags.as_ref().map_or(const_lag, |v| v.iter().copied().max().unwrap_or(1) as usize);
    let cap = max_lag + 2;
    let zero = C::new(T::zero(), T::zero());
    let phasor = |th: T| Complex::from_polar(T::one(), th);
    let init: Vec<C<T>> = theta0.iter().map(|&t| phasor(t)).collect();
    // e^{iθ} at nodes and at interval midpoints (interval [m, m+1] stored at m)
    let mut nodes: Vec<Vec<C<T>>> = vec![init.clone(); cap];
    let mut mids: Vec<Vec<C<T>>> = vec![init.clone(); cap];
    let mut prev_theta = theta0.clone();
    let mut prev_slope = vec![T::zero(); n];
    let inv_n = T::one() / from_usize::<T>(n);
    let gain = Complex::new(p.c, p.s);
    let steps = cfg.steps(dt);

    // delayed field η_i for stage offset c ∈ {0, ½, 1} at step s
    let eta = |nodes: &Vec<Vec<C<T>>>, mids: &Vec<Vec<C<T>>>, s: usize, stage: u8| -> Vec<C<T>> {
        let fetch = |lag: usize, j: usize| -> C<T> {
            let base = s as isize - lag as isize;
            match stage {
                0 => if base < 0 { init[j] } else { nodes[base as usize % cap][j] },
                1 => if base < 0 { init[j] } else { mids[base as usize % cap][j] },
                _ => if base + 1 < 0 { init[j] } else { nodes[(base + 1) as usize % cap][j] },
            }
        };
        match &lags {
            None => {
                let all: C<T> = (0..n).map(|j| fetch(const_lag, j)).fold(zero, |a, b| a + b);
                (0..n).map(|i| (all - fetch(const_lag, i)) * inv_n).collect()
            }
            Some(lags) => (0..n)
                .map(|i| {
                    let row = &lags[i * n..(i + 1) * n];
                    let mut acc = zero;
                    for (j, &lag) in row.iter().enumerate() {
                        if j != i {
                            acc += fetch(lag as usize, j);
                        }
                    }
                    acc * inv_n
                })
                .collect(),
        }
    };
    let field = |theta: &[T], eta: Option<&[C<T>]>| -> Vec<T> {
        let r = theta.iter().fold(zero, |a, &t| a + phasor(t)) * inv_n;
        theta
            .iter()
            .enumerate()
            .map(|(i, &th)| {
                let back = phasor(-th);
                let mut v = omega[i] + p.k * (r * back).im;
                if let Some(e) = eta {
                    v += (gain * e[i] * back).im;
                }
                v
            })
            .collect()
    };

    let mut run = KuramotoRun {
        times: Vec::new(),
        r: Vec::new(),
        snapshots: Vec::new(),
        truncated_frequencies,
        resampled_delays,
    };
    let mut theta = theta0;
    let record = |run: &mut KuramotoRun<T>, k: usize, t: T, theta: &[T]| {
        if k % cfg.sample_every != 0 {
            return;
        }
        run.times.push(t);
        run.r.push(theta.iter().fold(zero, |a, &x| a + phasor(x)) * inv_n);
        let sample = k / cfg.sample_every;
        if p.snapshot_every > 0 && sample % p.snapshot_every == 0 {
            run.snapshots.push((t, theta.to_vec()));
        }
    };
    record(&mut run, 0, T::zero(), &theta);
    let (half, sixth) = (dt * lit(0.5), dt / lit(6.0));
    let step = |y: &[T], h: T, k: &[T]| -> Vec<T> { y.iter().zip(k).map(|(a, b)| *a + *b * h).collect() };
    for s in 0..steps {
        let t = from_usize::<T>(s) * dt;
        let on = |c: T| t + c >= p.switch_on;
        let e0 = on(T::zero()).then(|| eta(&nodes, &mids, s, 0));
        let k1 = field(&theta, e0.as_deref());
        nodes[s % cap] = theta.iter().map(|&x| phasor(x)).collect();
        if s > 0 {
            let eighth = dt / lit(8.0);
            mids[(s - 1) % cap] = (0..n)
                .map(|j| phasor((prev_theta[j] + theta[j]) * lit(0.5) + (prev_slope[j] - k1[j]) * eighth))
                .collect();
        }
        let eh = on(half).then(|| eta(&nodes, &mids, s, 1));
        let k2 = field(&step(&theta, half, &k1), eh.as_deref());
        let k3 = field(&step(&theta, half, &k2), eh.as_deref());
        let e1 = on(dt).then(|| eta(&nodes, &mids, s, 2));
        let k4 = field(&step(&theta, dt, &k3), e1.as_deref());
        prev_theta.clone_from(&theta);
        prev_slope.clone_from(&k1);
        for i in 0..n {
            theta[i] += (k1[i] + (k2[i] + k3[i]) * lit::<T>(2.0) + k4[i]) * sixth;
        }
        record(&mut run, s + 1, from_usize::<T>(s + 1) * dt, &theta);
    }
    Ok(run)
}

/// Ott–Antonsen order-parameter equation
/// `ṙ = (K/2 − 1 + id) r + L η − (K/2)|r|² r − conj(L) r² conj(η)`,
/// `η = ∫ r(t−τ) h(τ) dτ`, with the feedback switched on at `switch_on`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct OaParams<T> {
    #[serde(rename = "K")]
    pub k: T,
    pub d: T,
    pub l: C<T>,
    #[serde(default)]
    pub switch_on: T,
}

/// Integrates the order-parameter equation from the constant history
/// `r(t) = r0` (`cfg.history`, default `0.1`). Dirac kernels use the method
/// of steps, exponential kernels one filter stage.
pub fn simulate_oa<T: Real>(p: &OaParams<T>, kernel: DelayKernel<T>, cfg: &SimConfig<T>) -> Result<Trajectory<T>, SimError> {
    cfg.validate()?;
    let r0 = scalar_history(cfg);
    let lin = Complex::new(p.k * lit(0.5) - T::one(), p.d);
    let k2 = p.k * lit(0.5);
    let (l, switch) = (p.l, p.switch_on);
    let oa = move |t: T, r: C<T>, eta: C<T>| -> C<T> {
        let mut v = lin * r - r * r.norm_sqr() * k2;
        if t >= switch {
            v += l * eta - l.conj() * r * r * eta.conj();
        }
        v
    };
    let mut traj = Trajectory::new();
    let blowup = match kernel {
        DelayKernel::Dirac { tau } if tau > T::zero() => {
            let (dt, m) = aligned_step(cfg.dt, tau);
            integrate_dde(
                vec![r0],
                dt,
                m,
                cfg.steps(dt),
                lit(OA_BLOWUP),
                |t, y, yd| vec![oa(t, y[0], yd[0])],
                recorder(&mut traj, cfg.sample_every),
            )
        }
        DelayKernel::Dirac { .. } => {
            integrate_ode(vec![r0], cfg.dt, cfg.steps(cfg.dt), lit(OA_BLOWUP), |t, y| vec![oa(t, y[0], y[0])], recorder(&mut traj, cfg.sample_every))
        }
        DelayKernel::Exponential { mean } | DelayKernel::Gamma { n: 1, mean } if mean > T::zero() => {
            let rate = T::one() / mean;
            let mut out = Trajectory::new();
            let b = integrate_ode(
                vec![r0, r0],
                cfg.dt,
                cfg.steps(cfg.dt),
                lit(OA_BLOWUP),
                |t, y| vec![oa(t, y[0], y[1]), (y[0] - y[1]) * rate],
                |k, t, y| {
                    if k % cfg.sample_every == 0 {
                        out.times.push(t);
                        out.states.push(vec![y[0]]);
                    }
                },
            );
            traj = out;
            b
        }
        _ => return Err(SimError::UnsupportedKernel("order-parameter equation takes Dirac or exponential kernels")),
    };
    traj.blowup = blowup;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::networks::{carfollowing_tc, NetworkSpec};

    fn cfg(dt: f64, horizon: f64) -> SimConfig<f64> {
        SimConfig::new(dt, horizon)
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.01, 0.0).validate().is_err());
        assert!(cfg(-0.01, 1.0).validate().is_err());
        let mut c = cfg(0.01, 1.0);
        c.rate_window_fraction = 1.0;
        assert!(c.validate().is_err());
        let c: SimConfig<f64> = serde_json::from_str(r#"{"dt":0.01,"horizon":5}"#).unwrap();
        assert_eq!(c.rate_window_fraction, 0.5);
        assert!(serde_json::from_str::<SimConfig<f64>>(r#"{"dt":0.01,"horizon":5,"x":1}"#).is_err());
    }

    #[test]
    fn step_aligns_with_delay() {
        let (dt, m) = aligned_step(0.03, 0.5);
        assert_eq!(m, 17);
        assert!((dt * 17.0 - 0.5f64).abs() < 1e-15);
        let (dt, m) = aligned_step(0.01, 0.5);
        assert_eq!(m, 50);
        assert!((dt - 0.01f64).abs() < 1e-15);
    }

    #[test]
    fn delay_free_decay() {
        let c = cfg(0.01, 10.0).with_history(HistorySpec::Constant { re: 1.0, im: 0.0 });
        let traj = simulate_scalar_discrete(-1.0, 0.0, C::new(0.0, 0.0), 0.5, &c).unwrap();
        let last = traj.last().unwrap()[0];
        assert!((last.re - (-10.0f64).exp()).abs() < 1e-10);
        let est = estimate_rate(&traj, &c).unwrap();
        assert!((est.rate + 1.0).abs() < 0.01);
        assert_eq!(est.verdict, Verdict::Converging);
    }

    #[test]
    fn leaf_interior_converges() {
        let c = cfg(0.01, 60.0);
        let traj = simulate_scalar_discrete(1.0, 0.0, C::new(-1.5, 0.0), 0.5, &c).unwrap();
        assert_eq!(estimate_rate(&traj, &c).unwrap().verdict, Verdict::Converging);
        let traj = simulate_scalar_discrete(1.0, 0.0, C::new(-3.0, 0.0), 0.5, &c).unwrap();
        assert_eq!(estimate_rate(&traj, &c).unwrap().verdict, Verdict::Diverging);
    }

    #[test]
    fn gamma_kernel_examples() {
        let c = cfg(0.01, 40.0);
        let k = DelayKernel::gamma(1, 0.5);
        let conv = simulate_scalar_gamma(1.0, C::new(-3.0, 0.0), k, &c).unwrap();
        assert_eq!(estimate_rate(&conv, &c).unwrap().verdict, Verdict::Converging);
        let div = simulate_scalar_gamma(1.0, C::new(1.0, 0.0), k, &c).unwrap();
        assert_eq!(estimate_rate(&div, &c).unwrap().verdict, Verdict::Diverging);
        let c = cfg(0.01, 10.0);
        let free = simulate_scalar_gamma(1.0, C::new(0.0, 0.0), k, &c).unwrap();
        assert!((estimate_rate(&free, &c).unwrap().rate - 1.0).abs() < 0.01);
    }

    /// Heun's method with the convolution integral evaluated by the
    /// trapezoid rule over the stored trajectory.
    fn direct_exponential(a: f64, l: C<f64>, mean: f64, z0: C<f64>, dt: f64, steps: usize) -> Vec<C<f64>> {
        let mut z = vec![z0];
        let w = |age: f64| (-age / mean).exp() / mean;
        let conv = |z: &[C<f64>], n: usize, extra: Option<C<f64>>| -> C<f64> {
            // ∫_{−∞}^{t_n} z(s) h(t_n − s) ds with z ≡ z0 before 0
            let t = n as f64 * dt;
            let mut acc = z0 * (-t / mean).exp();
            for k in 0..n {
                let zk1 = match extra {
                    Some(p) if k + 1 == n => p,
                    _ => z[k + 1],
                };
                acc += (z[k] * w(t - k as f64 * dt) + zk1 * w(t - (k + 1) as f64 * dt)) * (dt / 2.0);
            }
            acc
        };
        for n in 0..steps {
            let f0 = z[n] * a + l * conv(&z, n, None);
            let pred = z[n] + f0 * dt;
            let f1 = pred * a + l * conv(&z, n + 1, Some(pred));
            z.push(z[n] + (f0 + f1) * (dt / 2.0));
        }
        z
    }

    #[test]
    fn chain_trick_matches_direct_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let a: f64 = rng.gen_range(-1.0..0.3);
            let mean: f64 = rng.gen_range(0.2..1.0);
            let l = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let z0 = C::new(1.0, 0.0);
            // Richardson extrapolation of the second-order oracle
            let coarse = direct_exponential(a, l, mean, z0, 0.004, 5_000);
            let fine = direct_exponential(a, l, mean, z0, 0.002, 10_000);
            let c = cfg(0.004, 20.0).with_history(HistorySpec::Constant { re: 1.0, im: 0.0 });
            let chain = simulate_scalar_gamma(a, l, DelayKernel::gamma(1, mean), &c).unwrap();
            let dev = chain
                .states
                .iter()
                .zip(&coarse)
                .enumerate()
                .map(|(k, (s, zc))| (s[0] - (fine[2 * k] * 4.0 - zc) / 3.0).norm())
                .fold(0.0f64, f64::max);
            assert!(dev < 1e-4, "a={a} T={mean} L={l} dev={dev}");
        }
    }

    fn final_state_error(dt: f64) -> f64 {
        let c = cfg(dt, 10.0);
        let coarse = simulate_scalar_discrete(1.0, 2.5, C::new(-1.2, 0.4), 0.5, &c).unwrap();
        let fine = simulate_scalar_discrete(1.0, 2.5, C::new(-1.2, 0.4), 0.5, &cfg(dt / 64.0, 10.0)).unwrap();
        (coarse.last().unwrap()[0] - fine.last().unwrap()[0]).norm()
    }

    #[test]
    fn rk4_order_with_delay() {
        // smooth once the history kink has propagated: compare against a much finer run
        let e1 = final_state_error(0.1);
        let e2 = final_state_error(0.05);
        let ratio = e1 / e2;
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rate_of_exact_exponential() {
        let c = cfg(0.01, 10.0);
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.01).collect();
        let v: Vec<f64> = times.iter().map(|t| (-2.0 * t).exp()).collect();
        let est = estimate_rate_series(&times, &v, None, &c).unwrap();
        assert!((est.rate + 2.0).abs() < 1e-3 && est.r_squared > 0.999);
        let v: Vec<f64> = times.iter().map(|t| (0.5 * t).exp() * (5.0 * t).cos().abs()).collect();
        let est = estimate_rate_series(&times, &v, None, &c).unwrap();
        assert!((est.rate - 0.5).abs() < 0.05, "{}", est.rate);
        let est = estimate_rate_series(&times, &vec![3.0; 1001], None, &c).unwrap();
        assert!(est.rate.abs() < 1e-12);
        assert_eq!(est.verdict, Verdict::Inconclusive);
        let est = estimate_rate_series(&times, &vec![0.0; 1001], None, &c).unwrap();
        assert_eq!(est.verdict, Verdict::Converging);
        assert!(est.rate.is_infinite());
        assert!(estimate_rate_series(&times[..150], &v[..150], None, &c).is_err());
    }

    #[test]
    fn ring_consensus_by_simulation() {
        let net = NetworkSpec::Ring { n: 10, alpha: 1.0 };
        let tc = carfollowing_tc(1, 10, 1.0);
        let c = cfg(0.02, 200.0);
        let run = simulate_carfollowing(&net, DelayKernel::gamma(1, 0.9 * tc), &c).unwrap();
        assert_eq!(run.rate.verdict, Verdict::Converging, "{:?}", run.rate);
        let run = simulate_carfollowing(&net, DelayKernel::gamma(1, 1.1 * tc), &c).unwrap();
        assert_eq!(run.rate.verdict, Verdict::Diverging, "{:?}", run.rate);
        let same = c.clone().with_history(HistorySpec::Constant { re: 0.3, im: 0.0 });
        let run = simulate_carfollowing(&net, DelayKernel::gamma(1, tc), &same).unwrap();
        assert!(run.already_consensus && run.gap.iter().all(|g| *g == 0.0));
        assert_eq!(run.rate.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn decoupled_mas() {
        let n = 5;
        let j: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|k| if i == k { -2.0 } else { 0.0 }).collect()).collect();
        let run = simulate_mas(1.0, 1.0, 1.0, 1.1, 0.05, &j, &cfg(0.01, 60.0)).unwrap();
        assert!(run.stabilized);
        let j: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|k| if i == k { -0.5 } else { 0.0 }).collect()).collect();
        let run = simulate_mas(1.0, 1.0, 1.0, 1.1, 0.05, &j, &cfg(0.01, 60.0)).unwrap();
        assert!(!run.stabilized);
    }

    fn kuramoto(k: f64, c: f64, s: f64, shift: f64) -> KuramotoParams<f64> {
        KuramotoParams {
            n: 200,
            k,
            c,
            s,
            d: 0.0,
            delays: DelaySampler::Exponential { mean: 0.5 },
            switch_on: 10.0,
            seed: 5,
            phase_shift: shift,
            snapshot_every: 0,
        }
    }

    #[test]
    fn kuramoto_rotational_invariance() {
        let c = cfg(0.01, 12.0);
        let a = simulate_kuramoto(&kuramoto(4.0, -16.0, 2.0, 0.0), &c).unwrap();
        let b = simulate_kuramoto(&kuramoto(4.0, -16.0, 2.0, 0.7), &c).unwrap();
        let rot = Complex::from_polar(1.0, 0.7);
        for (ra, rb) in a.r.iter().zip(&b.r) {
            assert!((ra * rot - rb).norm() < 1e-9);
        }
    }

    #[test]
    fn kuramoto_free_and_locked() {
        let c = cfg(0.01, 20.0);
        let free = simulate_kuramoto(&kuramoto(0.0, 0.0, 0.0, 0.0), &c).unwrap();
        assert!(free.mean_abs_r(15.0, 20.0) < 0.2);
        let mut locked = kuramoto(4.0, 0.0, 0.0, 0.0);
        locked.n = 400;
        let run = simulate_kuramoto(&locked, &c).unwrap();
        assert!((run.mean_abs_r(15.0, 20.0) - 0.5f64.sqrt()).abs() < 0.1);
    }

    #[test]
    fn oa_fixed_point() {
        let c = cfg(0.01, 30.0).with_history(HistorySpec::Constant { re: 0.3, im: 0.0 });
        let p = OaParams { k: 4.0, d: 0.0, l: C::new(0.0, 0.0), switch_on: 0.0 };
        let traj = simulate_oa(&p, DelayKernel::dirac(0.5), &c).unwrap();
        assert!((traj.last().unwrap()[0].norm() - 0.5f64.sqrt()).abs() < 1e-6);
        let traj = simulate_oa(&p, DelayKernel::exponential(0.5), &c).unwrap();
        assert!((traj.last().unwrap()[0].norm() - 0.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn oa_controlled_decays() {
        // (K/2 − 1)T = 0.5 < 1 and L = (C + iS)/2 chosen inside the region
        let c = cfg(0.01, 30.0).with_history(HistorySpec::Constant { re: 0.3, im: 0.0 });
        let p = OaParams { k: 4.0, d: 0.0, l: C::new(-8.0, 1.0), switch_on: 0.0 };
        let traj = simulate_oa(&p, DelayKernel::exponential(0.5), &c).unwrap();
        assert!(traj.last().unwrap()[0].norm() < 1e-3);
        let p = OaParams { k: 4.0, d: 2.5, l: C::new(-0.5, -1.5), switch_on: 0.0 };
        let traj = simulate_oa(&p, DelayKernel::dirac(0.5), &c).unwrap();
        assert!(traj.last().unwrap()[0].norm() < 1e-3);
    }
}
