use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::{greedy_partition_with, SolveReport, SolverConfig};
use crate::error::{domain, Result};
use crate::path::{holder_scan, segment_norms, sup_scan, GridPath, Segment};

/// `(1 − q)^{−(n+1)}` written as `e^{−(n+1) log(1−q)}`.
pub fn window_factor(q: f64, n: usize) -> f64 {
    (-((n + 1) as f64) * (1.0 - q).ln()).exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub t: f64,
    pub n: usize,
    /// `‖x_t‖_{∞,β,[−r,0]}`.
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowMargin {
    pub start: f64,
    pub end: f64,
    pub min_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    #[serde(skip)]
    pub rows: Vec<GrowthRow>,
    pub windows: Vec<WindowMargin>,
    pub min_margin: f64,
    pub holds: bool,
}

/// Checks `‖x_t‖_{∞,β} ≤ (1−μ)^{−(N(t)+1)}(‖η‖_{∞,β} + 1)` at every grid `t`.
pub fn growth_bound_check(report: &SolveReport, eta: &Segment) -> Result<GrowthReport> {
    let p = &report.partition;
    let sol = &report.solution;
    let (beta, mu) = (p.beta, p.mu);
    let r = eta.delay();
    let norms = segment_norms(sol, beta, r)?;
    let base = eta.holder_norm(beta) + 1.0;
    let h = sol.mesh();
    let rows: Vec<GrowthRow> = norms
        .iter()
        .enumerate()
        .map(|(k, &lhs)| {
            let t = k as f64 * h;
            let n = p.stopping_count(t);
            let rhs = window_factor(mu, n) * base;
            GrowthRow { t, n, lhs, rhs, margin: rhs - lhs }
        })
        .collect();
    let windows = p
        .nodes
        .windows(2)
        .map(|w| WindowMargin {
            start: p.times[0] + w[0] as f64 * h,
            end: p.times[0] + w[1] as f64 * h,
            min_margin: rows[w[0]..=w[1]].iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
        })
        .collect();
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(GrowthReport { rows, windows, min_margin, holds: min_margin >= 0.0 })
}

#[derive(Debug, Clone, Copy)]
pub struct GronwallOptions {
    /// Random windows on which the hypothesis is sampled.
    pub samples: usize,
    pub seed: u64,
}

impl Default for GronwallOptions {
    fn default() -> Self {
        GronwallOptions { samples: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GronwallReport {
    pub windows_checked: usize,
    pub hypothesis_holds: bool,
    /// Largest `lhs − rhs` of the hypothesis over sampled windows.
    pub hypothesis_worst: f64,
    /// `None` when the hypothesis failed and the conclusion was not assessed.
    pub conclusion_holds: Option<bool>,
    pub min_margin: f64,
    pub stopping_times: usize,
    pub message: String,
}

/// Samples the hypothesis
/// `|||z|||_{β,[s,t]} ≤ A + C((t−s)^{1−β} + (t−s)^{ν−β}|||ω|||_{ν,[s,t]})‖z‖_{∞,β,[s−r,t]}`
/// and, where it holds, checks
/// `‖z_t‖_{∞,β} ≤ (1−2μ)^{−(N(t)+1)}(A/μ + ‖z_0‖_{∞,β})` at every grid `t`.
pub fn gronwall_check(
    z: &GridPath,
    a: f64,
    c: f64,
    omega: &GridPath,
    cfg: &SolverConfig,
    opts: GronwallOptions,
) -> Result<GronwallReport> {
    if !(a >= 0.0) || !(c > 0.0) {
        return Err(domain("Gronwall check needs A >= 0 and C > 0"));
    }
    if !(cfg.mu < 0.5f64.min(c)) {
        return Err(domain(format!("mu = {} must be below min(1/2, C) = {}", cfg.mu, 0.5f64.min(c))));
    }
    let h = cfg.mesh;
    let lag = cfg.delay_cells();
    let steps = cfg.steps();
    if (z.mesh() - h).abs() > 1e-9 * h || (z.t0() + cfg.delay).abs() > 1e-9 * h || z.len() < lag + steps + 1 {
        return Err(domain("z must cover [-r, T] on the solver grid"));
    }
    let (beta, nu) = (cfg.beta, cfg.nu);
    let (zv, d) = (z.values(), z.dim());
    let w = omega.values();
    let hypothesis = |s: usize, t: usize| -> f64 {
        let dt = (t - s) as f64 * h;
        let lhs = holder_scan(zv, d, h, beta, lag + s, lag + t).0;
        let full = sup_scan(zv, d, s, lag + t) + holder_scan(zv, d, h, beta, s, lag + t).0;
        let om = holder_scan(w, 1, h, nu, s, t).0;
        let rhs = a + c * (dt.powf(1.0 - beta) + dt.powf(nu - beta) * om) * full;
        lhs - rhs * (1.0 + 1e-9) - 1e-300
    };
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut pairs = vec![(0, steps), (0, 1), (steps - 1, steps)];
    while pairs.len() < opts.samples.max(3) {
        let s = rng.random_range(0..steps);
        let t = rng.random_range(s + 1..=steps);
        pairs.push((s, t));
    }
    let worst = pairs.iter().map(|&(s, t)| hypothesis(s, t)).fold(f64::NEG_INFINITY, f64::max);
    let hypothesis_holds = worst <= 0.0;
    let part = greedy_partition_with(omega, beta, nu, cfg.mu, c, steps)?;
    if !hypothesis_holds {
        return Ok(GronwallReport {
            windows_checked: pairs.len(),
            hypothesis_holds,
            hypothesis_worst: worst,
            conclusion_holds: None,
            min_margin: f64::NAN,
            stopping_times: part.count(),
            message: "hypothesis not satisfied".into(),
        });
    }
    let norms = segment_norms(&z.slice(0, lag + steps), beta, cfg.delay)?;
    let base = a / cfg.mu + norms[0];
    let min_margin = norms
        .iter()
        .enumerate()
        .map(|(k, &lhs)| window_factor(2.0 * cfg.mu, part.stopping_count(k as f64 * h)) * base - lhs)
        .fold(f64::INFINITY, f64::min);
    let ok = min_margin >= -1e-12 * base.max(1.0);
    Ok(GronwallReport {
        windows_checked: pairs.len(),
        hypothesis_holds,
        hypothesis_worst: worst,
        conclusion_holds: Some(ok),
        min_margin,
        stopping_times: part.count(),
        message: if ok { "conclusion holds".into() } else { "conclusion violated".into() },
    })
}
