use serde::Serialize;

use super::SolverConfig;
use crate::error::{domain, Error, Result};
use crate::path::{holder_scan, GridPath};

/// Greedy stopping times `0 = t_0 < t_1 < …` snapped to grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyPartition {
    pub times: Vec<f64>,
    /// Driver node index of each time.
    pub nodes: Vec<usize>,
    pub c: f64,
    pub mu: f64,
    pub beta: f64,
    pub nu: f64,
    /// `μ / C`; infinite when `C = 0`.
    pub threshold: f64,
    /// `Δ^{1−β} + Δ^{ν−β} |||ω|||_{ν,[t_i,t_{i+1}]}` per window.
    pub residuals: Vec<f64>,
    /// The same quantity with the window extended by one cell; `None` for a
    /// window clamped at `T`.
    pub next_residuals: Vec<Option<f64>>,
    /// Whether the last window ends at `T` without reaching the threshold.
    pub clamped_final: bool,
}

impl GreedyPartition {
    pub fn windows(&self) -> usize {
        self.times.len() - 1
    }

    /// `N(t, ω)`: the number of genuine stopping times in `(0, t]`.
    pub fn stopping_count(&self, t: f64) -> usize {
        let last = self.times.len() - 1;
        let eps = 1e-9 * (self.times[last] - self.times[0]).max(1.0);
        self.times[1..]
            .iter()
            .enumerate()
            .filter(|&(i, &ti)| ti <= t + eps && !(self.clamped_final && i + 1 == last))
            .count()
    }

    /// `N(T, ω)` over the whole horizon.
    pub fn count(&self) -> usize {
        self.stopping_count(*self.times.last().expect("nonempty"))
    }

    /// Index of the window containing `t` (right-continuous at interior
    /// stopping times).
    pub fn window_of(&self, t: f64) -> usize {
        let n = self.windows();
        (0..n).find(|&i| t < self.times[i + 1]).unwrap_or(n - 1)
    }

    /// Whether every window's residual satisfies `residual ≤ μ/C`, and every
    /// unclamped window stops at the last node doing so.
    pub fn residuals_consistent(&self) -> bool {
        let thr = self.threshold;
        self.residuals.iter().all(|&r| r <= thr)
            && self
                .next_residuals
                .iter()
                .enumerate()
                .all(|(i, n)| match n {
                    Some(v) => *v > thr,
                    None => i + 1 == self.windows() && self.clamped_final,
                })
    }
}

/// `2^{k−1}(C/μ)^k (T^{k(1−β)} + T^{k(ν−β)} |||ω|||^k)` with `k = ⌈1/(ν−β)⌉`.
pub fn nt_bound(c: f64, mu: f64, beta: f64, nu: f64, horizon: f64, omega_seminorm: f64) -> f64 {
    let k = (1.0 / (nu - beta)).ceil();
    2f64.powf(k - 1.0)
        * (c / mu).powf(k)
        * (horizon.powf(k * (1.0 - beta)) + horizon.powf(k * (nu - beta)) * omega_seminorm.powf(k))
}

/// Greedy partition of `[0, T]` for the configuration's `β, ν, μ`.
pub fn greedy_partition(omega: &GridPath, cfg: &SolverConfig, c: f64) -> Result<GreedyPartition> {
    greedy_partition_with(omega, cfg.beta, cfg.nu, cfg.mu, c, cfg.steps())
}

/// From each `t_i`, extends the window one node at a time, keeping the
/// running `ν`-seminorm of `ω` on `[t_i, t]` up to date, and stops at the
/// last node where the residual is still `≤ μ/C`. `C = 0` yields a single
/// window.
pub fn greedy_partition_with(
    omega: &GridPath,
    beta: f64,
    nu: f64,
    mu: f64,
    c: f64,
    steps: usize,
) -> Result<GreedyPartition> {
    if !(c >= 0.0) || !(mu > 0.0) {
        return Err(domain("partition needs C >= 0 and mu > 0"));
    }
    if c > 0.0 && !(mu < 1f64.min(c)) {
        return Err(domain(format!("mu = {mu} must be below min(1, C) = {}", 1f64.min(c))));
    }
    if omega.dim() != 1 || omega.len() < steps + 1 || steps == 0 {
        return Err(domain("driver must be scalar and cover [0, T]"));
    }
    let h = omega.mesh();
    let w = omega.values();
    let threshold = if c == 0.0 { f64::INFINITY } else { mu / c };
    let resid = |cells: usize, sem: f64| -> f64 {
        let dt = cells as f64 * h;
        dt.powf(1.0 - beta) + dt.powf(nu - beta) * sem
    };
    let mut nodes = vec![0usize];
    let mut residuals = Vec::new();
    let mut next_residuals = Vec::new();
    let mut start = 0usize;
    let mut clamped_final = false;
    while start < steps {
        let mut sem = 0.0_f64;
        let mut j = start;
        let mut last_ok: Option<f64> = None;
        let mut over: Option<f64> = None;
        while j < steps {
            let nj = j + 1;
            // New pairs all end at nj.
            let wj = w[nj];
            for s in start..nj {
                let q = (wj - w[s]).abs() * ((nj - s) as f64 * h).powf(-nu);
                if q > sem {
                    sem = q;
                }
            }
            let r = resid(nj - start, sem);
            if r <= threshold {
                last_ok = Some(r);
                j = nj;
            } else {
                over = Some(r);
                break;
            }
        }
        let Some(r) = last_ok else {
            return Err(Error::TooRough {
                at: omega.time(start),
                residual: over.unwrap_or(f64::NAN),
                threshold,
            });
        };
        nodes.push(j);
        residuals.push(r);
        next_residuals.push(over);
        if over.is_none() {
            clamped_final = true;
        }
        start = j;
    }
    debug_assert!({
        let (i, k) = (nodes[nodes.len() - 2], nodes[nodes.len() - 1]);
        let sem = holder_scan(w, 1, h, nu, i, k).0;
        (resid(k - i, sem) - residuals[residuals.len() - 1]).abs() <= 1e-12 * residuals[residuals.len() - 1].max(1.0)
    });
    Ok(GreedyPartition {
        times: nodes.iter().map(|&k| omega.time(k)).collect(),
        nodes,
        c,
        mu,
        beta,
        nu,
        threshold,
        residuals,
        next_residuals,
        clamped_final,
    })
}
