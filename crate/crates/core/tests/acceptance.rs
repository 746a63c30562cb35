//! Acceptance run: one pass/fail line per criterion, then a nonzero exit if
//! any criterion failed.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use ydde::coefficients::{composition_difference, composition_holder, make_builtin, CoefficientSpec};
use ydde::driver::{generate, DriverKind, DriverSpec};
use ydde::path::{
    counterexample_growth, holder_norm, holder_seminorm, pvar_seminorm, segment_path_holder, segment_path_norm,
};
use ydde::scenario::{Built, Scenario, BUILTIN_NAMES};
use ydde::sensitivity::{continuity_check, differentiability_check, quadrature_error, DEFAULT_EPS_LADDER};
use ydde::solver::{
    greedy_partition_with, growth_bound_check, nt_bound, picard_solve, uniqueness_probe, ContractionConstants,
};
use ydde::young::{rounding_slack, young_integral, young_loeve_gap, YoungConstants};
use ydde::{GridPath, Result, Segment};

const SEEDS: u64 = 20;

struct Line {
    passed: bool,
    detail: String,
}

fn line(passed: bool, detail: impl Into<String>) -> Line {
    Line { passed, detail: detail.into() }
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fbm_scenarios() -> Vec<Scenario> {
    BUILTIN_NAMES.iter().map(|n| Scenario::builtin(n).unwrap()).filter(Scenario::is_fbm).collect()
}

fn all_seeds(s: &Scenario, count: u64) -> Vec<Built> {
    if s.is_fbm() {
        (0..count).map(|k| s.clone().with_seed(k).build().unwrap()).collect()
    } else {
        vec![s.build().unwrap()]
    }
}

fn criterion_1() -> Result<Line> {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let (mut windows, mut bad) = (0, 0);
    for s in fbm_scenarios() {
        let b = s.build()?;
        let c = &b.config;
        let x = picard_solve(&b.coefficients, &b.eta, &b.omega, c)?.solution;
        let x = x.slice(c.delay_cells(), c.delay_cells() + c.steps());
        let k = YoungConstants::new(c.beta, c.nu, b.coefficients.delta)?;
        for _ in 0..100 {
            let a = rng.random_range(0..c.steps());
            let e = rng.random_range(a + 1..=c.steps());
            let w = (a as f64 * c.mesh, e as f64 * c.mesh);
            let (gap, bound) = young_loeve_gap(&x, &b.omega, w, &k)?;
            if gap > bound + rounding_slack(&x, &b.omega, w)? {
                bad += 1;
            }
            windows += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(line(bad == 0 && secs < 30.0, format!("{windows} windows, {bad} violations, {secs:.1} s (limit 30 s)")))
}

fn criterion_2() -> Result<Line> {
    // ω(t) = sin(πt/2), so ½(ω(1)² − ω(0)²) = ½.
    let mut sums = Vec::new();
    for n in [128usize, 256, 512, 1024] {
        let w = generate(&DriverSpec::new(DriverKind::Sine { amplitude: 1.0, frequency: 0.25 }, 1.0, 1.0 / n as f64))?;
        sums.push(young_integral(&w, &w, (0.0, 1.0))?[0]);
    }
    let errs: Vec<f64> = sums.iter().map(|s| (s - 0.5).abs()).collect();
    let decreasing = errs.windows(2).all(|e| e[1] < e[0]);
    // First-order extrapolation of the last two rungs.
    let extrapolated = 2.0 * sums[3] - sums[2];
    let rel = (extrapolated - 0.5).abs() / 0.5;
    Ok(line(
        decreasing && rel <= 1e-3,
        format!("errors {}; extrapolated relative error {rel:.3e} (limit 1e-3)", sci(&errs)),
    ))
}

fn criterion_3() -> Result<Line> {
    let c = ydde::solver::SolverConfig { mesh: 1.0 / 1024.0, horizon: 1.0, ..Default::default() };
    let decay = make_builtin(&CoefficientSpec::scalar_linear(-1.0, 0.0, 0.0, 0.0))?;
    let zero = generate(&DriverSpec::new(DriverKind::Zero, 1.0, c.mesh))?;
    let one = Segment::constant(c.delay, c.mesh, &[1.0])?;
    let x = picard_solve(&decay, &one, &zero, &c)?.solution;
    let lag = c.delay_cells();
    let e1 = (0..=c.steps()).map(|k| (x.node(lag + k)[0] - (-(k as f64) * c.mesh).exp()).abs()).fold(0.0, f64::max);
    let sigma = 0.3;
    let add = make_builtin(&CoefficientSpec::scalar_linear(0.0, 0.0, 0.0, sigma))?;
    let w = generate(&DriverSpec::new(DriverKind::Fbm { hurst: 0.75, amplitude: 0.25 }, 1.0, c.mesh).with_seed(11))?;
    let y = picard_solve(&add, &one, &w, &c)?.solution;
    let e2 = (0..=c.steps())
        .map(|k| (y.node(lag + k)[0] - (1.0 + sigma * (w.node(k)[0] - w.node(0)[0]))).abs())
        .fold(0.0, f64::max);
    Ok(line(e1 <= 1e-3 && e2 <= 1e-12, format!("decay error {e1:.3e} (limit 1e-3); additive error {e2:.3e} (limit 1e-12)")))
}

fn criterion_4() -> Result<Line> {
    let s = Scenario::builtin("sin")?;
    let mut worst = 0.0_f64;
    let mut ok = true;
    for seed in 0..10 {
        let b = s.clone().with_seed(seed).build()?;
        let u = uniqueness_probe(&b.coefficients, &b.eta, &b.omega, &b.config, 3)?;
        ok &= u.max_distance <= 10.0 * b.config.picard_tol;
        worst = worst.max(u.max_distance);
    }
    Ok(line(ok, format!("10 seeds, 3 inits, max distance {worst:.3e} (limit 10 tol = {:.0e})", 10.0 * s.config.picard_tol)))
}

fn criterion_5() -> Result<Line> {
    let mut consistent = true;
    let mut worst = 0.0_f64;
    let mut runs = 0;
    for s in fbm_scenarios() {
        for b in all_seeds(&s, SEEDS) {
            let c = &b.config;
            let k = ContractionConstants::evaluate(&b.coefficients, c.beta, c.nu)?;
            if k.c == 0.0 {
                continue;
            }
            let p = greedy_partition_with(&b.omega, c.beta, c.nu, c.mu, k.c, c.steps())?;
            consistent &= p.residuals_consistent();
            let sem = holder_seminorm(&b.omega, c.nu, (0.0, c.horizon))?.seminorm;
            worst = worst.max(p.count() as f64 / nt_bound(k.c, c.mu, c.beta, c.nu, c.horizon, sem));
            runs += 1;
        }
    }
    let n = 1usize << 16;
    let h = 1.0 / n as f64;
    let p = greedy_partition_with(&GridPath::scalar(0.0, h, vec![0.0; n + 1])?, 0.4, 0.7, 0.25, 8.0, n)?;
    let len = (0.25_f64 / 8.0).powf(1.0 / 0.6);
    let dev = p.times.windows(2).take(p.windows() - 1).map(|t| (t[1] - t[0] - len).abs()).fold(0.0, f64::max);
    Ok(line(
        consistent && worst <= 1.0 && dev <= h,
        format!(
            "{runs} fBm partitions, residuals consistent={consistent}, max N/bound {worst:.3e}; zero driver N={} window deviation {dev:.2e} (mesh {h:.2e})",
            p.count()
        ),
    ))
}

fn criterion_6() -> Result<Line> {
    let mut min_margin = f64::INFINITY;
    let mut ok = true;
    let mut runs = 0;
    for name in BUILTIN_NAMES {
        for b in all_seeds(&Scenario::builtin(name)?, SEEDS) {
            let rep = picard_solve(&b.coefficients, &b.eta, &b.omega, &b.config)?;
            let g = growth_bound_check(&rep, &b.eta)?;
            ok &= g.holds;
            min_margin = min_margin.min(g.min_margin);
            runs += 1;
        }
    }
    Ok(line(ok, format!("{runs} solves, minimum margin {min_margin:.6e}")))
}

fn criterion_7() -> Result<Line> {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for name in BUILTIN_NAMES {
        let b = Scenario::builtin(name)?.build()?;
        let c = &b.config;
        let raw = Segment::from_fn(c.delay, c.mesh, 1, |u| vec![1.0 + 0.5 * (std::f64::consts::PI * u / c.delay).cos()])?;
        for size in [1e-1, 1e-2] {
            let d = raw.scale(size / raw.holder_norm(c.beta));
            let r = continuity_check(&b.coefficients, &b.eta, &b.eta.combine(1.0, &d, 1.0)?, &b.omega, c)?;
            ok &= r.pointwise_holds && r.full_holds;
            worst = worst.min(r.min_margin);
        }
    }
    Ok(line(ok, format!("6 scenarios x 2 sizes, pointwise and full-interval forms; min pointwise margin {worst:.3e}")))
}

fn criterion_8() -> Result<Line> {
    let dir_of = |b: &Built| Segment::from_fn(b.config.delay, b.config.mesh, 1, |u| vec![1.0 + u]);
    let s = Scenario::builtin("sin")?.build()?;
    let r = differentiability_check(&s.coefficients, &s.eta, &dir_of(&s)?, &s.omega, &s.config, &DEFAULT_EPS_LADDER)?;
    let ratio = r.rows[2].rho / r.rows[0].rho;
    let sin_ok = r.decreasing && ratio <= 0.5;
    let l = Scenario::builtin("linear")?.build()?;
    let q = quadrature_error(&l.coefficients, &l.eta, &l.omega, &l.config)?;
    let rl = differentiability_check(&l.coefficients, &l.eta, &dir_of(&l)?, &l.omega, &l.config, &DEFAULT_EPS_LADDER)?;
    let max_rho = rl.rows.iter().map(|row| row.rho).fold(0.0, f64::max);
    let lin_ok = max_rho <= 10.0 * q;
    Ok(line(
        sin_ok && lin_ok,
        format!(
            "sin rho {} ratio {ratio:.3e} (limit 0.5); linear max rho {max_rho:.3e} <= 10 x quadrature {q:.3e}",
            sci(&r.rows.iter().map(|row| row.rho).collect::<Vec<_>>())
        ),
    ))
}

fn brute_pvar(v: &[f64], p: f64) -> f64 {
    let inner = v.len() - 2;
    let mut best = 0.0_f64;
    for mask in 0u32..(1 << inner) {
        let (mut last, mut sum) = (0, 0.0);
        for k in 1..v.len() {
            if k == v.len() - 1 || mask & (1 << (k - 1)) != 0 {
                sum += (v[k] - v[last]).abs().powf(p);
                last = k;
            }
        }
        best = best.max(sum);
    }
    best.powf(1.0 / p)
}

fn criterion_9() -> Result<Line> {
    const DRAWS: usize = 200;
    let (r, h, beta) = (0.25, 1.0 / 256.0, 0.4);
    let lag = 64;
    let n = 320;
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let fams = [
        make_builtin(&CoefficientSpec::scalar_linear(-0.5, 0.2, 0.4, 0.1))?,
        make_builtin(&CoefficientSpec::SinDelay { a: Some(vec![vec![-0.3]]), b: None, sigma: 0.4, dim: None })?,
        make_builtin(&CoefficientSpec::ScalarLogisticBounded { a: 0.3, sigma: 0.4, bound: 3.0 })?,
    ];
    let path = |rng: &mut ChaCha20Rng| -> Result<GridPath> {
        let w = generate(
            &DriverSpec::new(DriverKind::Fbm { hurst: 0.75, amplitude: 1.0 }, 1.25, h).with_seed(rng.random()),
        )?;
        let shift = rng.random_range(-1.0..1.0);
        Ok(GridPath::scalar(-r, h, w.values().iter().map(|v| v + shift).collect())?)
    };
    let (mut l1, mut l2, mut l3) = (0, 0, 0);
    for i in 0..DRAWS {
        let x = path(&mut rng)?;
        let y = path(&mut rng)?;
        let a = rng.random_range(lag..n);
        let b = rng.random_range(a + 1..=n);
        let (ta, tb) = (x.time(a), x.time(b));
        let seg = segment_path_holder(&x, beta, r, (ta, tb))?.seminorm;
        let wide = holder_seminorm(&x, beta, (ta - r, tb))?.seminorm;
        let segn = segment_path_norm(&x, beta, r, (ta, tb))?;
        let widen = holder_norm(&x, beta, (ta - r, tb))?;
        if seg > wide * (1.0 + 1e-12) || segn > widen * (1.0 + 1e-12) {
            l1 += 1;
        }
        let co = &fams[i % fams.len()];
        let (rep, bound) = composition_holder(co, &x, beta, r, (ta, tb))?;
        if rep.seminorm > bound * (1.0 + 1e-12) {
            l2 += 1;
        }
        let (lhs, rhs) = composition_difference(co, &x, &y, beta, r, (ta, tb))?;
        if lhs > rhs * (1.0 + 1e-12) {
            l3 += 1;
        }
    }
    let mut gap = 0.0_f64;
    let mut windows = 0;
    for _ in 0..20 {
        let mut v = vec![0.0; 12];
        for k in 1..12 {
            v[k] = v[k - 1] + rng.random_range(-1.0..1.0);
        }
        let p = rng.random_range(1.0..3.5);
        let g = GridPath::scalar(0.0, 1.0 / 16.0, v.clone())?;
        for lo in 0..12 {
            for hi in lo + 1..12 {
                let got = pvar_seminorm(&g, p, (g.time(lo), g.time(hi)))?.seminorm;
                let want = brute_pvar(&v[lo..=hi], p);
                gap = gap.max((got - want).abs() / want.max(1e-300));
                windows += 1;
            }
        }
    }
    Ok(line(
        l1 + l2 + l3 == 0 && gap <= 1e-12,
        format!(
            "{DRAWS} draws each: segment-norm violations {l1}, composition {l2}, difference {l3}; p-variation vs enumeration on {windows} windows, worst gap {gap:.1e}"
        ),
    ))
}

fn criterion_10() -> Result<Line> {
    let ns = [100usize, 1000, 10000];
    let sums: Vec<f64> = ns.iter().map(|&n| counterexample_growth(0.4, 2.0, n)).collect::<Result<_>>()?;
    // The sums equal n^{0.1} up to rounding.
    let exceeds = sums.iter().zip(ns).all(|(s, n)| *s >= (n as f64).powf(0.1) * (1.0 - 1e-12));
    let grows = sums.windows(2).all(|w| w[1] > w[0]);
    Ok(line(exceeds && grows, format!("sums {sums:.6?} vs n^0.1")))
}

fn run_verify(out: &Path) -> (bool, Duration) {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_ydde"))
        .args(["verify", "--quiet", "--out"])
        .arg(out)
        .env_remove("YDDE_OUT")
        .status()
        .expect("ydde runs");
    (status.success(), start.elapsed())
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_11() -> Result<Line> {
    let (a, b) = (tempfile::tempdir()?, tempfile::tempdir()?);
    let (ok_a, t_a) = run_verify(a.path());
    let (ok_b, t_b) = run_verify(b.path());
    let (fa, fb) = (read_dir(a.path()), read_dir(b.path()));
    let identical = !fa.is_empty() && fa == fb;
    let secs = t_a.max(t_b).as_secs_f64();
    Ok(line(
        ok_a && ok_b && identical && secs <= 300.0,
        format!("exit 0 twice={}, {} artifacts byte-identical={identical}, slowest run {secs:.1} s (limit 300 s)", ok_a && ok_b, fa.len()),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Line>); 11] = [
        ("Young-Loeve certificate", criterion_1),
        ("quadrature convergence", criterion_2),
        ("solver oracles", criterion_3),
        ("uniqueness probe", criterion_4),
        ("greedy partition", criterion_5),
        ("growth bound", criterion_6),
        ("continuity", criterion_7),
        ("differentiability", criterion_8),
        ("lemma suite", criterion_9),
        ("counterexample", criterion_10),
        ("end-to-end determinism", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let l = f().unwrap_or_else(|e| line(false, format!("error: {e}")));
        let tag = if l.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, l.detail);
        if !l.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
