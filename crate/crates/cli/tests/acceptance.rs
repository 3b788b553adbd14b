//! Acceptance criteria 1–9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use delaygeo::charfun::CharFunError;
use delaygeo::geometry::point_segment_distance;
use delaygeo::networks::{
    alpha_c, carfollowing_tc, circular_law_circle, crossing_parameter, fraction_inside, mas_tc1, mas_tc2,
    ring_eigenvalue, spectrum,
};
use delaygeo::regions::{membership, nu_map_auto, stability_region, stable_intervals_on_line, Membership};
use delaygeo::scc::{point_at, polar_profile, self_intersections_exact, trace, trace_covering};
use delaygeo::simulate::{
    estimate_rate, simulate_carfollowing, simulate_kuramoto, simulate_mas, simulate_oa, simulate_scalar_gamma,
    DelaySampler, HistorySpec, Verdict,
};
use delaygeo::{
    systems, CharFun, Complex64, DelayKernel, KuramotoParams, MasParams, NetworkSpec, OaParams, SccBranch, SimConfig,
    Window,
};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn distance_to_curves(l: Complex64, branches: &[SccBranch]) -> f64 {
    branches
        .iter()
        .flat_map(|b| b.points.windows(2).map(move |w| point_segment_distance(l, w[0], w[1])))
        .fold(f64::INFINITY, f64::min)
}

fn criterion_1() -> Outcome {
    let maps: Vec<(&str, CharFun, Window)> = vec![
        ("example 1", systems::example1(), Window::square(4.0)),
        ("example 2", systems::example2(), Window::new(-6.0, 2.0, -2.0, 4.5)),
        ("example 5, a*tau<1", systems::scalar_discrete(1.0, 0.0, 0.5).unwrap(), Window::square(4.0)),
        ("example 5, a*tau>1", systems::scalar_discrete(3.0, 0.0, 0.5).unwrap(), Window::square(4.0)),
        ("gamma n=1 aT<1", systems::scalar_gamma(1.0, 1, 0.5).unwrap(), Window::new(-6.0, 2.0, -4.0, 4.0)),
        ("gamma n=1 aT>1", systems::scalar_gamma(1.0, 1, 2.0).unwrap(), Window::new(-6.0, 2.0, -4.0, 4.0)),
        ("gamma n=3 aT<1", systems::scalar_gamma(1.0, 3, 0.5).unwrap(), Window::new(-6.0, 2.0, -4.0, 4.0)),
        ("gamma n=3 aT>1", systems::scalar_gamma(1.0, 3, 2.0).unwrap(), Window::new(-6.0, 2.0, -4.0, 4.0)),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    let mut slowest = 0.0f64;
    for (name, f, w) in maps {
        let start = Instant::now();
        match nu_map_auto(&f, &w, 41, 41, true) {
            Ok((map, _)) => {
                let secs = start.elapsed().as_secs_f64();
                slowest = slowest.max(secs);
                let m = map.oracle_mismatches().unwrap_or(usize::MAX);
                if m != 0 || secs > 300.0 {
                    ok = false;
                    notes.push(format!("{name}: {m} mismatches in {secs:.1}s"));
                }
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{name}: {e}"));
            }
        }
    }
    let detail = if notes.is_empty() {
        format!("8 maps at 41x41, 0 oracle mismatches, slowest map {slowest:.2}s")
    } else {
        notes.join("; ")
    };
    (ok, detail)
}

fn criterion_2() -> Outcome {
    let tau = 0.5;
    let f0 = systems::scalar_discrete(1.0, 0.0, tau).unwrap();
    let w = Window::square(4.0);
    let cov = trace_covering(&f0, &w, 0.02, 1024.0).unwrap();
    let intervals = stable_intervals_on_line(&f0, &cov.branches, c(0.0, 0.0), c(1.0, 0.0), -4.0, 4.0).unwrap();
    let beta_star = bisect(|b| 0.5 * b - b.atan(), 1.0, 3.0);
    let left = -(1.0 + beta_star * beta_star).sqrt();
    let endpoints_ok = intervals.len() == 1
        && (intervals[0].0 - left).abs() <= 1e-6
        && (intervals[0].1 + 1.0).abs() <= 1e-6;

    let d = 2.5;
    let f1 = systems::scalar_discrete(1.0, d, tau).unwrap();
    let (map, _) = nu_map_auto(&f1, &w, 81, 81, false).unwrap();
    let regions = stability_region(&map);
    let boundary: Vec<Complex64> = regions.iter().flat_map(|r| r.boundary.iter().flatten().copied()).collect();
    let rot = Complex64::from_polar(1.0, -d * tau);
    let l0 = |beta: f64| -Complex64::from_polar(1.0, beta * tau) * c(1.0, -beta);
    let mut worst = 0.0f64;
    let samples = 50;
    if boundary.len() >= samples {
        for k in 0..samples {
            let z = boundary[k * (boundary.len() - 1) / (samples - 1)];
            let wz = z * rot;
            let b = (wz.norm_sqr() - 1.0).max(0.0).sqrt();
            let err = (l0(b) - wz).norm().min((l0(-b) - wz).norm());
            worst = worst.max(err);
        }
    } else {
        worst = f64::INFINITY;
    }
    let ok = endpoints_ok && regions.len() == 1 && worst <= 1e-8;
    (
        ok,
        format!(
            "Omega on the real axis {:?} vs [{left:.9}, -1]; rotation residual {worst:.2e} over {samples} boundary samples",
            intervals
        ),
    )
}

fn criterion_3() -> Outcome {
    let w = Window::new(-6.0, 2.0, -4.0, 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sim = SimConfig::new(0.01, 40.0);
    sim.history = Some(HistorySpec::Constant { re: 0.1, im: 0.0 });
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, a, t) in [(1u32, 1.0, 0.5), (1, 1.0, 2.0), (3, 1.0, 0.5), (3, 1.0, 2.0)] {
        let f = systems::scalar_gamma(a, n, t).unwrap();
        let (map, branches) = nu_map_auto(&f, &w, 81, 81, false).unwrap();
        let regions = stability_region(&map);
        let expect_region = a * t < 1.0;
        let mut shape_ok = regions.is_empty() != expect_region;
        if expect_region {
            if n == 1 {
                shape_ok &= regions.iter().all(|r| !r.bounded());
            } else {
                shape_ok &= regions.iter().all(|r| r.bounded());
                let beta_star = bisect(|b| n as f64 * (b * t / n as f64).atan() - (b / a).atan(), 1e-3, 50.0);
                let l_star = c(-a, beta_star) * c(1.0, beta_star * t / n as f64).powu(n);
                let xs = self_intersections_exact(&f, &branches, 1e-9).unwrap();
                let hit = xs.iter().any(|x| (x.point - l_star).norm() <= 1e-6);
                shape_ok &= hit && l_star.im.abs() <= 1e-9 * l_star.norm();
            }
        }
        let mut agree = 0;
        let mut probes = 0;
        while probes < 20 {
            let l = c(rng.gen_range(w.re_lo..w.re_hi), rng.gen_range(w.im_lo..w.im_hi));
            if distance_to_curves(l, &branches) < 0.1 {
                continue;
            }
            probes += 1;
            let m = membership(&f, l, &branches).unwrap();
            let rate = estimate_rate(&simulate_scalar_gamma(a, l, DelayKernel::gamma(n, t), &sim).unwrap(), &sim).unwrap();
            let expected = if m == Membership::Stable { Verdict::Converging } else { Verdict::Diverging };
            if rate.verdict == expected {
                agree += 1;
            } else {
                notes.push(format!("n={n} aT={} L={l:.3}: {m:?} but rate {:.4}", a * t, rate.rate));
            }
        }
        if !shape_ok || agree < probes {
            ok = false;
        }
        if !shape_ok {
            notes.push(format!("n={n} aT={}: region shape wrong ({} regions)", a * t, regions.len()));
        }
    }
    let detail = if notes.is_empty() {
        "four quadrants: shapes as expected, 80/80 probe verdicts agree with simulation".to_string()
    } else {
        notes.join("; ")
    };
    (ok, detail)
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let mut worst_rel = 0.0f64;
    let mut sim = SimConfig::new(0.02, 200.0);
    sim.history = Some(HistorySpec::RandomUniform { seed: 4, amplitude: 1.0 });
    for n in [1u32, 2] {
        for agents in [5usize, 10] {
            for alpha in [0.5, 1.0, 2.0] {
                let tc = carfollowing_tc(n, agents, alpha);
                let mut tangency = f64::INFINITY;
                for l in 1..agents {
                    let mu = ring_eigenvalue(agents, alpha, l);
                    let build = |t: f64| -> Result<CharFun, CharFunError> {
                        systems::carfollowing(DelayKernel::gamma(n, t))
                    };
                    if let Ok((t, _)) = crossing_parameter(build, mu, 1e-3 * tc, 20.0 * tc) {
                        tangency = tangency.min(t);
                    }
                }
                let rel = (tangency - tc).abs() / tc;
                worst_rel = worst_rel.max(rel);
                if rel > 1e-6 {
                    ok = false;
                    notes.push(format!("n={n} N={agents} a={alpha}: Tc {tc} vs tangency {tangency}"));
                }
                let net = NetworkSpec::Ring { n: agents, alpha };
                for (factor, want) in [(0.9, Verdict::Converging), (1.1, Verdict::Diverging)] {
                    let run = simulate_carfollowing(&net, DelayKernel::gamma(n, factor * tc), &sim).unwrap();
                    if run.rate.verdict != want {
                        ok = false;
                        notes.push(format!(
                            "n={n} N={agents} a={alpha} T={factor}Tc: rate {:.4} ({:?})",
                            run.rate.rate, run.rate.verdict
                        ));
                    }
                }
            }
        }
    }
    // heat map: cells on the wrong side must lie within one cell of the curve
    let res = 21;
    let h = 2.0 / res as f64;
    let centers: Vec<f64> = (0..res).map(|k| (k as f64 + 0.5) * h).collect();
    let mut far = 0;
    for &alpha in &centers {
        for &t in &centers {
            let tc = carfollowing_tc(1, 10, alpha);
            let run = simulate_carfollowing(&NetworkSpec::Ring { n: 10, alpha }, DelayKernel::gamma(1, t), &sim).unwrap();
            if (run.rate.rate < 0.0) != (t < tc) && (t - tc).abs() > h {
                far += 1;
            }
        }
    }
    if far > 0 {
        ok = false;
        notes.push(format!("heat map: {far} cells more than one cell from the analytic curve"));
    }
    let detail = if notes.is_empty() {
        format!("12 settings, worst Tc relative gap {worst_rel:.1e}; 24 simulations as predicted; 21x21 heat map boundary within one cell")
    } else {
        notes.join("; ")
    };
    (ok, detail)
}

fn criterion_5() -> Outcome {
    let r = |n: i64, d: i64| Ratio::new(n, d);
    let tc1 = mas_tc1(r(1, 1), r(1, 1), r(1, 1), r(11, 10)).unwrap();
    let tc2: f64 = mas_tc2(1.0, 1.0, 1.1).unwrap();
    let mut ok = tc1 == r(1, 10) && (tc2 - 1.1 / 2.1).abs() <= 1e-9;
    let w = Window::new(-6.0, 1.0, -3.0, 3.0);
    let count = |t: f64| {
        let f = systems::mas(1.0, 1.0, 1.0, 1.1, t).unwrap();
        let (map, _) = nu_map_auto(&f, &w, 281, 241, false).unwrap();
        (map.components.len(), map.label_set().contains(&0))
    };
    let below: Vec<_> = [0.02, 0.05, 0.08].iter().map(|&t| count(t)).collect();
    let above: Vec<_> = [0.3, 0.4, 0.45].iter().map(|&t| count(t)).collect();
    let beyond: Vec<_> = [0.55, 0.7, 1.0].iter().map(|&t| count(t)).collect();
    ok &= below.iter().all(|&(n, s)| n == 2 && s);
    ok &= above.iter().all(|&(n, s)| n == 3 && s);
    ok &= beyond.iter().all(|&(_, s)| !s);
    (
        ok,
        format!(
            "Tc1 = {tc1} (exact), Tc2 = {tc2:.12}; components (count, has Omega) below Tc1 {below:?}, between {above:?}, above Tc2 {beyond:?}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let p = MasParams { a: 1.0, b: 1.0, k1: 1.0, k2: 1.1 };
    let agents = 100;
    let seeds = 100u64;
    let mut sim = SimConfig::new(0.02, 100.0);
    sim.sample_every = 1000;
    let mut ok = true;
    let mut rows = Vec::new();
    for r in [1.0, 2.0, 3.0, 4.0] {
        for t in [0.05, 0.15] {
            let ac = match alpha_c(&p, t, r, agents) {
                Ok(v) => v,
                Err(e) => {
                    ok = false;
                    rows.push(format!("R={r} T={t}: {e}"));
                    continue;
                }
            };
            let freq = |alpha: f64| {
                let mut hits = 0;
                for seed in 0..seeds {
                    let j = NetworkSpec::Random { n: agents, r, alpha, seed }.matrix().unwrap();
                    let mut c = sim.clone();
                    c.history = Some(HistorySpec::RandomUniform { seed: 1000 + seed, amplitude: 1.0 });
                    if simulate_mas(p.a, p.b, p.k1, p.k2, t, &j, &c).unwrap().stabilized {
                        hits += 1;
                    }
                }
                hits as f64 / seeds as f64
            };
            let (lo, hi) = (freq(0.8 * ac), freq(1.25 * ac));
            let pass = lo >= 0.9 && hi <= 0.1;
            ok &= pass;
            rows.push(format!("R={r} T={t} alpha_c={ac:.4}: {lo:.2}/{hi:.2}{}", if pass { "" } else { " (fail)" }));
        }
    }
    (ok, format!("stabilized fraction at 0.8/1.25 alpha_c: {}", rows.join(", ")))
}

fn criterion_7() -> Outcome {
    let mut worst = 1.0f64;
    for (r, alpha) in [(1.0, 0.5), (2.0, 1.0), (4.0, 1.5)] {
        for seed in 0..20 {
            let s = spectrum(&NetworkSpec::Random { n: 100, r, alpha, seed }).unwrap();
            let (center, radius) = circular_law_circle(100, r, alpha);
            worst = worst.min(fraction_inside(&s.eigenvalues, center, radius, 1.05));
        }
    }
    (worst >= 0.95, format!("smallest fraction inside the 5%-inflated circle over 60 spectra: {worst:.2}"))
}

fn criterion_8() -> Outcome {
    let cfg = SimConfig::new(0.01, 20.0);
    let cases = [
        ("a", 0.0, -16.0, 2.0, DelaySampler::Exponential { mean: 0.5 }),
        ("b", 2.5, -1.0, -3.0, DelaySampler::Constant { tau: 0.5 }),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (tag, d, cc, s, delays) in cases {
        let params = |switch_on: f64, n: usize| KuramotoParams {
            n,
            k: 4.0,
            c: cc,
            s,
            d,
            delays,
            switch_on,
            seed: 0,
            phase_shift: 0.0,
            snapshot_every: 0,
        };
        let free = simulate_kuramoto(&params(f64::INFINITY, 200), &cfg).unwrap().mean_abs_r(15.0, 20.0);
        let ctrl = simulate_kuramoto(&params(10.0, 200), &cfg).unwrap().mean_abs_r(15.0, 20.0);
        ok &= free >= 0.6 && ctrl <= 0.15;
        parts.push(format!("({tag}) mean |r| on [15,20]: {free:.3} free, {ctrl:.3} controlled"));
    }
    // micro/macro spot check on set (b)
    let micro = simulate_kuramoto(
        &KuramotoParams {
            n: 2000,
            k: 4.0,
            c: -1.0,
            s: -3.0,
            d: 2.5,
            delays: DelaySampler::Constant { tau: 0.5 },
            switch_on: 10.0,
            seed: 0,
            phase_shift: 0.0,
            snapshot_every: 0,
        },
        &cfg,
    )
    .unwrap();
    let r0 = micro.r[0];
    let mut oc = cfg.clone();
    oc.history = Some(HistorySpec::Constant { re: r0.re, im: r0.im });
    let oa = OaParams { k: 4.0, d: 2.5, l: c(-0.5, -1.5), switch_on: 10.0 };
    let macro_run = simulate_oa(&oa, DelayKernel::dirac(0.5), &oc).unwrap();
    let sup = micro
        .times
        .iter()
        .zip(&micro.r)
        .zip(&macro_run.states)
        .filter(|((t, _), _)| **t >= 5.0)
        .map(|((_, r), m)| (r.norm() - m[0].norm()).abs())
        .fold(0.0f64, f64::max);
    ok &= sup <= 0.05;
    parts.push(format!("(b) N=2000 micro vs OA sup |r| gap on [5,20]: {sup:.3}"));
    (ok, parts.join("; "))
}

fn fd_ok(analytic: Complex64, fd: Complex64) -> bool {
    (analytic - fd).norm() <= 1e-6 * analytic.norm().max(1.0)
}

fn rk4_ratio(run: impl Fn(f64) -> Complex64) -> f64 {
    let (a, b, c) = (run(0.04), run(0.02), run(0.01));
    (a - b).norm() / (b - c).norm()
}

fn run_cli(args: &[&str], cfg: &str, out: &Path) -> bool {
    let cfg_path = out.with_extension("json");
    std::fs::write(&cfg_path, cfg).unwrap();
    Command::new(env!("CARGO_BIN_EXE_delaygeo"))
        .args(args)
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn output_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    v.sort();
    v
}

fn criterion_9() -> Outcome {
    let h = 1e-5;
    let mut fd_fail = Vec::new();
    let systems: Vec<(&str, CharFun)> = vec![
        ("example 1", systems::example1()),
        ("example 2", systems::example2()),
        ("gamma", systems::scalar_gamma(1.0, 3, 0.5).unwrap()),
        ("mas", systems::mas(1.0, 1.0, 1.0, 1.1, 0.3).unwrap()),
        ("uniform", systems::carfollowing(DelayKernel::uniform(0.2, 0.6)).unwrap()),
    ];
    let probes = [(c(0.3, 1.1), c(-0.7, 0.4)), (c(0.05, -2.0), c(1.2, -0.3)), (c(1.0, 0.0), c(-2.0, 1.0))];
    for (name, f) in &systems {
        for &(lam, l) in &probes {
            let dl = f.d_lambda(lam, l).unwrap();
            let fd = (f.eval(lam + h, l).unwrap() - f.eval(lam - h, l).unwrap()) / (2.0 * h);
            if !fd_ok(dl, fd) {
                fd_fail.push(format!("{name} dF/dlambda"));
            }
            let dl = f.d_l(lam, l).unwrap();
            let fd = (f.eval(lam, l + h).unwrap() - f.eval(lam, l - h).unwrap()) / (2.0 * h);
            if !fd_ok(dl, fd) {
                fd_fail.push(format!("{name} dF/dL"));
            }
            let k = f.kernel();
            let dk = k.laplace_derivative(lam).unwrap();
            let fd = (k.laplace(lam + h).unwrap() - k.laplace(lam - h).unwrap()) / (2.0 * h);
            if !fd_ok(dk, fd) {
                fd_fail.push(format!("{name} kernel transform"));
            }
        }
        for b in trace(f, -6.0, 6.0, 0.01).unwrap() {
            let (lo, hi) = b.beta_range();
            if hi - lo < 0.1 {
                continue;
            }
            let polar = polar_profile(&b);
            for k in [b.len() / 4, b.len() / 2, 3 * b.len() / 4] {
                let beta = b.beta[k];
                let (p, tangent) = point_at(f, &b, beta).unwrap();
                if !tangent.is_finite() {
                    continue;
                }
                let at = |x: f64| point_at(f, &b, x).ok().map(|(l, _)| l);
                // central differences with the step cut by 4 until consecutive estimates settle
                let mut settled = None;
                let mut prev: Option<(Complex64, f64)> = None;
                let mut hb = h;
                for _ in 0..8 {
                    if beta - hb < lo || beta + hb > hi {
                        break;
                    }
                    let (Some(pm), Some(pp)) = (at(beta - hb), at(beta + hb)) else { break };
                    let d = (pp - pm) / (2.0 * hb);
                    let dtheta = (pp / pm).arg() / (2.0 * hb);
                    if let Some((d0, _)) = prev {
                        if (d - d0).norm() <= 1e-8 * d.norm().max(1.0) {
                            settled = Some((d, dtheta));
                            break;
                        }
                    }
                    prev = Some((d, dtheta));
                    hb *= 0.25;
                }
                let Some((d, dtheta)) = settled else { continue };
                if !fd_ok(tangent, d) {
                    fd_fail.push(format!("{name} curve tangent at beta={beta:.3}"));
                }
                if p.norm() > 1e-3 && !fd_ok(c(polar[k].theta_prime, 0.0), c(dtheta, 0.0)) {
                    fd_fail.push(format!("{name} theta' at beta={beta:.3}"));
                }
            }
        }
    }
    fd_fail.dedup();

    let oa_ratio = rk4_ratio(|dt| {
        let mut cfg = SimConfig::new(dt, 4.0);
        cfg.history = Some(HistorySpec::Constant { re: 0.3, im: 0.1 });
        let p = OaParams { k: 4.0, d: 1.0, l: c(-0.5, 0.8), switch_on: 0.0 };
        simulate_oa(&p, DelayKernel::dirac(0.0), &cfg).unwrap().last().unwrap()[0]
    });
    let gamma_ratio = rk4_ratio(|dt| {
        let mut cfg = SimConfig::new(dt, 4.0);
        cfg.history = Some(HistorySpec::Constant { re: 1.0, im: 0.0 });
        simulate_scalar_gamma(0.5, c(-2.0, 1.0), DelayKernel::gamma(2, 0.5), &cfg).unwrap().last().unwrap()[0]
    });
    let rk_ok = [oa_ratio, gamma_ratio].iter().all(|r| (8.0..=32.0).contains(r));

    let dir = tempfile::tempdir().unwrap();
    let jobs: [(&[&str], &str); 4] = [
        (&["scc"], r#"{"system":{"preset":"example1"},"beta":[-10,10]}"#),
        (&["numap"], r#"{"system":{"preset":"example2"}}"#),
        (
            &["simulate"],
            r#"{"system":{"kind":"kuramoto","n":50,"K":4,"C":-1,"S":-3,"d":2.5,"delays":{"kind":"constant","tau":0.5},"seed":1,"snapshot_every":50},"sim":{"dt":0.01,"horizon":5}}"#,
        ),
        (&["reproduce", "fig12-heat"], r#"{"resolution":4,"horizon":50}"#),
    ];
    let mut det_ok = true;
    for (k, (args, cfg)) in jobs.iter().enumerate() {
        let a = dir.path().join(format!("run{k}a"));
        let b = dir.path().join(format!("run{k}b"));
        let ran = run_cli(args, cfg, &a) && run_cli(args, cfg, &b);
        det_ok &= ran && output_files(&a) == output_files(&b);
    }

    let ok = fd_fail.is_empty() && rk_ok && det_ok;
    (
        ok,
        format!(
            "finite-difference failures: {}; RK4 halving ratios {oa_ratio:.1}, {gamma_ratio:.1}; CLI outputs byte-identical: {det_ok}",
            if fd_fail.is_empty() { "none".to_string() } else { fd_fail.join(", ") }
        ),
    )
}

fn main() {
    // libtest-style filters are accepted and ignored; `--list` prints nothing
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    // ACCEPTANCE_ONLY=4,9 runs a subset
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    let mut ran = 0;
    for (k, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&k)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {k}: {} ({:.1}s) {detail}",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
