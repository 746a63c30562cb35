//! The property suite behind `ydde verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::coefficients::{
    composition_difference, composition_holder, verify_regularity, SegmentSampler,
};
use crate::driver::{generate, DriverKind, DriverSpec};
use crate::emit::{Cell, Table};
use crate::error::Result;
use crate::path::{
    counterexample_growth, holder_seminorm, pvar_seminorm, segment_path_holder, segment_path_norm, GridPath, Segment,
};
use crate::scenario::{Built, Check, Scenario, BUILTIN_NAMES};
use crate::sensitivity::{continuity_check, differentiability_check, DEFAULT_EPS_LADDER};
use crate::solver::{
    euler_solve, gronwall_check, greedy_partition_with, nt_bound, picard_solve, uniqueness_probe, ContractionConstants,
    GronwallOptions, SolverConfig,
};
use crate::young::{
    richardson, rounding_slack, young_integral, young_integral_bound, young_loeve_gap, YoungConstants,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    /// Acceptance criterion number, or 0 for supporting checks.
    pub criterion: u8,
    pub scenario: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Seeds per scenario for the seed sweeps.
    pub seeds: usize,
    /// Random draws per sampled property.
    pub draws: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 0, seeds: 20, draws: 200 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub outcomes: Vec<CheckOutcome>,
    #[serde(skip)]
    pub tables: Vec<(String, Table)>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }

    pub fn outcome_table(&self) -> Table {
        let mut t = Table::new(["criterion", "scenario", "check", "passed", "detail"]);
        for o in &self.outcomes {
            t.push(vec![
                Cell::Int(o.criterion as i64),
                o.scenario.clone().into(),
                o.check.clone().into(),
                o.passed.into(),
                o.detail.clone().into(),
            ]);
        }
        t
    }
}

struct Sink {
    outcomes: Vec<CheckOutcome>,
    tables: Vec<(String, Table)>,
}

impl Sink {
    fn record(&mut self, criterion: u8, scenario: &str, check: &str, passed: bool, detail: String) {
        self.outcomes.push(CheckOutcome {
            criterion,
            scenario: scenario.to_string(),
            check: check.to_string(),
            passed,
            detail,
        });
    }

    fn result(&mut self, criterion: u8, scenario: &str, check: &str, r: Result<(bool, String)>) {
        match r {
            Ok((p, d)) => self.record(criterion, scenario, check, p, d),
            Err(e) => self.record(criterion, scenario, check, false, format!("error: {e}")),
        }
    }
}

/// Runs the scenario-independent checks and every enabled check of every
/// scenario.
pub fn run_suite(scenarios: &[Scenario], include_global: bool, opts: SuiteOptions) -> SuiteReport {
    let mut sink = Sink { outcomes: Vec::new(), tables: Vec::new() };
    if include_global {
        global_checks(&mut sink, opts);
    }
    for s in scenarios {
        scenario_checks(&mut sink, s, opts);
    }
    SuiteReport { outcomes: sink.outcomes, tables: sink.tables }
}

/// The built-in scenarios plus the global checks.
pub fn run_builtin_suite(opts: SuiteOptions) -> Result<SuiteReport> {
    let scenarios = BUILTIN_NAMES
        .iter()
        .map(|n| Scenario::builtin(n).map(|s| s.with_seed(opts.seed)))
        .collect::<Result<Vec<_>>>()?;
    Ok(run_suite(&scenarios, true, opts))
}

fn global_checks(sink: &mut Sink, opts: SuiteOptions) {
    let (rows, r) = quadrature_ladder();
    let mut t = Table::new(["mesh", "sum", "abs_error"]);
    for (h, s, e) in &rows {
        t.push(vec![(*h).into(), (*s).into(), (*e).into()]);
    }
    sink.tables.push(("quadrature_ladder".into(), t));
    sink.result(2, "-", "quadrature_ladder", r);
    sink.result(3, "-", "decay_oracle", decay_oracle());
    sink.result(3, "-", "additive_oracle", additive_oracle());
    sink.result(0, "-", "euler_refinement_order", euler_order());
    sink.result(5, "-", "zero_driver_window_length", zero_driver_windows());
    sink.result(9, "-", "pvar_dp_vs_enumeration", pvar_enumeration(opts.seed));
    let (rows, r) = counterexample_ladder();
    let mut t = Table::new(["n", "sum", "lower_bound"]);
    for (n, v, b) in &rows {
        t.push(vec![Cell::Int(*n as i64), (*v).into(), (*b).into()]);
    }
    sink.tables.push(("counterexample".into(), t));
    sink.result(10, "-", "counterexample_growth", r);
}

/// Observed Picard ratios may exceed `μ` by this factor before a window is
/// flagged.
pub const CONTRACTION_MARGIN: f64 = 1.5;

/// `∫_0^1 ω dω` for `ω(t) = sin(πt/2)` against `½ω(1)² = ½`.
pub fn quadrature_ladder() -> (Vec<(f64, f64, f64)>, Result<(bool, String)>) {
    let mut rows = Vec::new();
    let r = (|| {
        let mut sums = Vec::new();
        for n in [128usize, 256, 512, 1024] {
            let h = 1.0 / n as f64;
            let w = generate(&DriverSpec::new(DriverKind::Sine { amplitude: 1.0, frequency: 0.25 }, 1.0, h))?;
            let s = young_integral(&w, &w, (0.0, 1.0))?[0];
            let exact = 0.5 * (w.node(n)[0].powi(2) - w.node(0)[0].powi(2));
            rows.push((h, s, (s - exact).abs()));
            sums.push((s, exact));
        }
        let decreasing = rows.windows(2).all(|p| p[1].2 < p[0].2);
        let (coarse, exact) = sums[2];
        let fine = sums[3].0;
        let rel = (richardson(coarse, fine) - exact).abs() / exact.abs();
        Ok((
            decreasing && rel <= 1e-3,
            format!("errors decreasing={decreasing}; extrapolated relative error {rel:.3e} (limit 1e-3)"),
        ))
    })();
    (rows, r)
}

fn decay_oracle() -> Result<(bool, String)> {
    let b = Scenario::builtin("decay")?.build()?;
    let rep = picard_solve(&b.coefficients, &b.eta, &b.omega, &b.config)?;
    let lag = b.config.delay_cells();
    let err = (0..=b.config.steps())
        .map(|k| (rep.solution.node(lag + k)[0] - (-(k as f64) * b.config.mesh).exp()).abs())
        .fold(0.0, f64::max);
    Ok((err <= 1e-3, format!("max |x - e^-t| = {err:.3e} (limit 1e-3)")))
}

fn additive_oracle() -> Result<(bool, String)> {
    let b = Scenario::builtin("additive")?.build()?;
    let rep = picard_solve(&b.coefficients, &b.eta, &b.omega, &b.config)?;
    let lag = b.config.delay_cells();
    let w = &b.omega;
    let err = (0..=b.config.steps())
        .map(|k| (rep.solution.node(lag + k)[0] - (1.0 + 0.2 * (w.node(k)[0] - w.node(0)[0]))).abs())
        .fold(0.0, f64::max);
    Ok((err <= 1e-12, format!("max deviation from eta(0) + c(w(t) - w(0)) = {err:.3e} (limit 1e-12)")))
}

/// Explicit scheme on a smooth driver against a fine reference.
fn euler_order() -> Result<(bool, String)> {
    let base = Scenario::builtin("linear")?;
    let mut s = base.clone();
    s.driver.kind = DriverKind::Sine { amplitude: 0.5, frequency: 1.0 };
    let fine_h = 1.0 / 8192.0;
    let reference = solve_euler_at(&s, fine_h)?;
    let mut errs = Vec::new();
    for n in [256usize, 512, 1024, 2048] {
        let h = 1.0 / n as f64;
        let sol = solve_euler_at(&s, h)?;
        let stride = (h / fine_h).round() as usize;
        let r = reference.subsample(stride)?;
        errs.push(sol.max_distance(&r)?);
    }
    let orders: Vec<f64> = errs.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let cfg = &s.config;
    let need = 1f64.min(cfg.beta + cfg.nu - 1.0);
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min_order >= need, format!("orders {orders:.3?} (need >= {need:.2})")))
}

fn solve_euler_at(s: &Scenario, h: f64) -> Result<GridPath> {
    let b = s.clone().with_mesh(h)?.build()?;
    euler_solve(&b.coefficients, &b.eta, &b.omega, &b.config)
}

fn zero_driver_windows() -> Result<(bool, String)> {
    let n = 1usize << 16;
    let h = 1.0 / n as f64;
    let w = GridPath::scalar(0.0, h, vec![0.0; n + 1])?;
    let p = greedy_partition_with(&w, 0.4, 0.7, 0.25, 8.0, n)?;
    let len = (0.25f64 / 8.0).powf(1.0 / 0.6);
    let worst = p.times.windows(2).take(p.windows() - 1).map(|t| (t[1] - t[0] - len).abs()).fold(0.0, f64::max);
    let ok = worst <= h && p.count().abs_diff(322) <= 2;
    Ok((ok, format!("N = {}, worst window-length deviation {worst:.3e} (mesh {h:.3e})", p.count())))
}

/// Exhaustive partition enumeration on windows of at most 12 nodes.
pub fn pvar_enumeration(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x9e37);
    let mut worst = 0.0_f64;
    let mut windows = 0;
    for trial in 0..20 {
        let n = 12;
        let mut v = vec![0.0; n];
        for k in 1..n {
            v[k] = v[k - 1] + rng.random_range(-1.0..1.0);
        }
        let path = GridPath::scalar(0.0, 1.0 / 16.0, v.clone())?;
        let p = [1.0, 1.5, 2.0, 3.0][trial % 4];
        for lo in 0..n {
            for hi in lo + 1..n {
                let got = pvar_seminorm(&path, p, (path.time(lo), path.time(hi)))?.seminorm;
                let want = enumerate_pvar(&v[lo..=hi], p);
                worst = worst.max((got - want).abs() / want.max(1e-300));
                windows += 1;
            }
        }
    }
    Ok((worst <= 1e-12, format!("{windows} windows, worst relative gap {worst:.3e}")))
}

fn enumerate_pvar(v: &[f64], p: f64) -> f64 {
    let inner = v.len() - 2;
    let mut best = 0.0_f64;
    for mask in 0u32..(1 << inner) {
        let mut last = 0;
        let mut sum = 0.0;
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

pub fn counterexample_ladder() -> (Vec<(usize, f64, f64)>, Result<(bool, String)>) {
    let mut rows = Vec::new();
    let r = (|| {
        for n in [100usize, 1000, 10000] {
            let v = counterexample_growth(0.4, 2.0, n)?;
            rows.push((n, v, (n as f64).powf(0.1)));
        }
        // The sum equals the bound up to rounding, hence the relative slack.
        let exceeds = rows.iter().all(|&(_, v, b)| v >= b * (1.0 - 1e-12));
        let grows = rows.windows(2).all(|p| p[1].1 > p[0].1);
        Ok((exceeds && grows, format!("sums {:?}", rows.iter().map(|r| r.1).collect::<Vec<_>>())))
    })();
    (rows, r)
}

fn scenario_checks(sink: &mut Sink, s: &Scenario, opts: SuiteOptions) {
    let built = match s.build() {
        Ok(b) => b,
        Err(e) => {
            sink.record(0, &s.name, "build", false, format!("error: {e}"));
            return;
        }
    };
    let name = s.name.as_str();
    if s.enabled(Check::Regularity) {
        sink.result(0, name, "regularity", regularity(&built, opts.seed));
    }
    if s.enabled(Check::Partition) {
        sink.result(5, name, "partition", partition_sweep(s, opts));
    }
    if s.enabled(Check::Growth) {
        let (t, r) = growth_sweep(s, opts);
        sink.tables.push((format!("growth_{name}"), t));
        sink.result(6, name, "growth_bound", r);
    }
    if s.enabled(Check::YoungLoeve) {
        sink.result(1, name, "young_loeve", young_loeve(&built, opts));
    }
    if s.enabled(Check::Uniqueness) {
        sink.result(4, name, "uniqueness", uniqueness_sweep(s, opts));
    }
    if s.enabled(Check::Gronwall) {
        sink.result(0, name, "gronwall", gronwall(&built, opts));
    }
    if s.enabled(Check::Continuity) {
        sink.result(7, name, "continuity", continuity(&built));
    }
    if s.enabled(Check::Differentiability) {
        let (t, r) = differentiability(&built);
        sink.tables.push((format!("rho_{name}"), t));
        sink.result(8, name, "differentiability", r);
    }
    if s.enabled(Check::Lemmas) {
        sink.result(9, name, "lemma_suite", lemmas(&built, opts));
    }
}

fn seeds(s: &Scenario, opts: SuiteOptions, count: usize) -> Vec<Scenario> {
    if s.is_fbm() {
        (0..count as u64).map(|k| s.clone().with_seed(opts.seed.wrapping_add(k))).collect()
    } else {
        vec![s.clone()]
    }
}

fn regularity(b: &Built, seed: u64) -> Result<(bool, String)> {
    let c = &b.config;
    let sampler = SegmentSampler::new(c.delay, c.mesh, b.coefficients.dim(), seed)?;
    let r = verify_regularity(&b.coefficients, &sampler, 10.0, 1000)?;
    Ok((
        r.valid,
        format!(
            "worst ratios f {:.3} g {:.3} Dg {:.3} Dg-holder {:.3}",
            r.f_lipschitz, r.g_lipschitz, r.dg_bound, r.dg_holder
        ),
    ))
}

fn partition_sweep(s: &Scenario, opts: SuiteOptions) -> Result<(bool, String)> {
    let mut worst_ratio = 0.0_f64;
    let mut consistent = true;
    let mut runs = 0;
    for sc in seeds(s, opts, opts.seeds) {
        let b = sc.build()?;
        let c = &b.config;
        let k = ContractionConstants::evaluate(&b.coefficients, c.beta, c.nu)?;
        let p = greedy_partition_with(&b.omega, c.beta, c.nu, c.mu, k.c, c.steps())?;
        consistent &= p.residuals_consistent();
        if k.c > 0.0 {
            let sem = holder_seminorm(&b.omega, c.nu, (0.0, c.horizon))?.seminorm;
            let bound = nt_bound(k.c, c.mu, c.beta, c.nu, c.horizon, sem);
            worst_ratio = worst_ratio.max(p.count() as f64 / bound);
        }
        runs += 1;
    }
    Ok((
        consistent && worst_ratio <= 1.0,
        format!("{runs} drivers; residuals consistent={consistent}; max N/bound {worst_ratio:.3e}"),
    ))
}

fn growth_sweep(s: &Scenario, opts: SuiteOptions) -> (Table, Result<(bool, String)>) {
    let mut t = Table::new(["seed", "windows", "stopping_times", "min_margin", "max_fixed_point_residual", "ball_ok"]);
    let r = (|| {
        let mut min_margin = f64::INFINITY;
        let mut ok = true;
        let mut fpr = 0.0_f64;
        for sc in seeds(s, opts, opts.seeds) {
            let b = sc.build()?;
            let rep = picard_solve(&b.coefficients, &b.eta, &b.omega, &b.config)?;
            let g = rep.growth.clone().expect("growth computed");
            let ratio_ok = rep
                .windows
                .iter()
                .filter_map(|w| w.contraction_ratio)
                .all(|q| q <= CONTRACTION_MARGIN * b.config.mu);
            ok &= g.holds && ratio_ok && rep.ball_ok() && rep.max_fixed_point_residual() <= b.config.picard_tol;
            min_margin = min_margin.min(g.min_margin);
            fpr = fpr.max(rep.max_fixed_point_residual());
            t.push(vec![
                Cell::Int(sc.driver.seed as i64),
                Cell::Int(rep.partition.windows() as i64),
                Cell::Int(rep.partition.count() as i64),
                g.min_margin.into(),
                rep.max_fixed_point_residual().into(),
                rep.ball_ok().into(),
            ]);
        }
        Ok((ok, format!("min margin {min_margin:.6e}; max fixed-point residual {fpr:.3e}")))
    })();
    (t, r)
}

fn young_loeve(b: &Built, opts: SuiteOptions) -> Result<(bool, String)> {
    let c = &b.config;
    let rep = picard_solve(&b.coefficients, &b.eta, &b.omega, c)?;
    let x = rep.solution.slice(c.delay_cells(), c.delay_cells() + c.steps());
    let consts = YoungConstants::new(c.beta, c.nu, b.coefficients.delta)?;
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed ^ 0x51);
    let (mut bad, mut bad_display) = (0, 0);
    let mut worst = 0.0_f64;
    let n = c.steps();
    for _ in 0..100 {
        let s = rng.random_range(0..n);
        let t = rng.random_range(s + 1..=n);
        let w = (s as f64 * c.mesh, t as f64 * c.mesh);
        let (gap, bound) = young_loeve_gap(&x, &b.omega, w, &consts)?;
        let slack = rounding_slack(&x, &b.omega, w)?;
        if gap > bound + slack {
            bad += 1;
        }
        if bound > 0.0 {
            worst = worst.max(gap / bound);
        }
        let (lhs, rhs) = young_integral_bound(&x, &b.omega, w, &consts)?;
        if lhs > rhs * (1.0 + 1e-12) + slack {
            bad_display += 1;
        }
    }
    Ok((
        bad == 0 && bad_display == 0,
        format!("100 windows: {bad} certificate violations, {bad_display} integral-bound violations, max gap/bound {worst:.3e}"),
    ))
}

fn uniqueness_sweep(s: &Scenario, opts: SuiteOptions) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    let mut ok = true;
    let mut runs = 0;
    for sc in seeds(s, opts, 10) {
        let b = sc.build()?;
        let u = uniqueness_probe(&b.coefficients, &b.eta, &b.omega, &b.config, 3)?;
        ok &= u.agree;
        worst = worst.max(u.max_distance);
        runs += 1;
    }
    Ok((ok, format!("{runs} drivers, 3 inits; max distance {worst:.3e} (limit {:.1e})", 10.0 * s.config.picard_tol)))
}

fn unit_direction(c: &SolverConfig, dim: usize, size: f64) -> Result<Segment> {
    let r = c.delay;
    let raw = Segment::from_fn(r, c.mesh, dim, |u| vec![1.0 + 0.5 * (std::f64::consts::PI * u / r).cos(); dim])?;
    Ok(raw.scale(size / raw.holder_norm(c.beta)))
}

fn gronwall(b: &Built, opts: SuiteOptions) -> Result<(bool, String)> {
    let c = &b.config;
    let d = unit_direction(c, b.coefficients.dim(), 0.01)?;
    let eta2 = b.eta.combine(1.0, &d, 1.0)?;
    let s1 = picard_solve(&b.coefficients, &b.eta, &b.omega, c)?.solution;
    let s2 = picard_solve(&b.coefficients, &eta2, &b.omega, c)?.solution;
    let full = (-c.delay, c.horizon);
    let m = crate::path::holder_norm(&s1, c.beta, full)?.max(crate::path::holder_norm(&s2, c.beta, full)?);
    let k = ContractionConstants::evaluate(&b.coefficients, c.beta, c.nu)?;
    let cc = k.l(c.horizon, m);
    if cc == 0.0 {
        return Ok((true, "L(T, M) = 0; nothing to check".into()));
    }
    let cfg = SolverConfig { mu: c.mu.min(cc / 2.0), ..c.clone() };
    let z = s2.sub(&s1)?;
    let r = gronwall_check(&z, 0.0, cc, &b.omega, &cfg, GronwallOptions { samples: opts.draws, seed: opts.seed })?;
    Ok((r.conclusion_holds != Some(false), format!("{}; hypothesis worst {:.3e}", r.message, r.hypothesis_worst)))
}

fn continuity(b: &Built) -> Result<(bool, String)> {
    let c = &b.config;
    let mut ok = true;
    let mut parts = Vec::new();
    for size in [1e-1, 1e-2] {
        let d = unit_direction(c, b.coefficients.dim(), size)?;
        let eta2 = b.eta.combine(1.0, &d, 1.0)?;
        let r = continuity_check(&b.coefficients, &b.eta, &eta2, &b.omega, c)?;
        ok &= r.holds;
        parts.push(format!(
            "size {size:.0e}: pointwise={} min margin {:.3e}, full {:.3e} <= {:.3e}",
            r.pointwise_holds, r.min_margin, r.full_lhs, r.full_rhs
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn differentiability(b: &Built) -> (Table, Result<(bool, String)>) {
    let mut t = Table::new(["eps", "rho"]);
    let r = (|| {
        let c = &b.config;
        let dir = Segment::from_fn(c.delay, c.mesh, b.coefficients.dim(), |u| vec![1.0 + u; b.coefficients.dim()])?;
        let r = differentiability_check(&b.coefficients, &b.eta, &dir, &b.omega, c, &DEFAULT_EPS_LADDER)?;
        for row in &r.rows {
            t.push(vec![row.eps.into(), row.rho.into()]);
        }
        let rhos: Vec<String> = r.rows.iter().map(|x| format!("{:.3e}", x.rho)).collect();
        Ok((
            r.passes,
            format!(
                "rho [{}]; decreasing={} ratio {} floor {:.3e}",
                rhos.join(", "),
                r.decreasing,
                r.ratio.map_or("n/a".into(), |x| format!("{x:.3e}")),
                r.floor
            ),
        ))
    })();
    (t, r)
}

fn lemmas(b: &Built, opts: SuiteOptions) -> Result<(bool, String)> {
    let c = &b.config;
    let x = picard_solve(&b.coefficients, &b.eta, &b.omega, c)?.solution;
    let eta2 = b.eta.combine(1.0, &unit_direction(c, b.coefficients.dim(), 0.05)?, 1.0)?;
    let y = picard_solve(&b.coefficients, &eta2, &b.omega, c)?.solution;
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed ^ 0x1e33);
    let n = c.steps();
    let (mut l1, mut l1n, mut l2, mut l3) = (0, 0, 0, 0);
    let slack = 1.0 + 1e-12;
    for _ in 0..opts.draws {
        let s = rng.random_range(0..n);
        let t = rng.random_range(s + 1..=n);
        let w = (s as f64 * c.mesh, t as f64 * c.mesh);
        let wide = (w.0 - c.delay, w.1);
        let seg = segment_path_holder(&x, c.beta, c.delay, w)?.seminorm;
        if seg > holder_seminorm(&x, c.beta, wide)?.seminorm * slack {
            l1 += 1;
        }
        if segment_path_norm(&x, c.beta, c.delay, w)? > crate::path::holder_norm(&x, c.beta, wide)? * slack {
            l1n += 1;
        }
        let (rep, bound) = composition_holder(&b.coefficients, &x, c.beta, c.delay, w)?;
        if rep.seminorm > bound * slack {
            l2 += 1;
        }
        let (lhs, rhs) = composition_difference(&b.coefficients, &x, &y, c.beta, c.delay, w)?;
        if lhs > rhs * slack {
            l3 += 1;
        }
    }
    Ok((
        l1 + l1n + l2 + l3 == 0,
        format!("{} draws: violations segment-seminorm {l1}, segment-norm {l1n}, composition {l2}, difference {l3}", opts.draws),
    ))
}

