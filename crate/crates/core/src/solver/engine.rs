//! Window-by-window Picard iteration shared by the nonlinear and linearized
//! solvers.
//!
//! Storage is one flat buffer over the grid of `[−r, T]`: global node
//! `L + k` holds time `k·h`, where `L = r/h`. A window `[t_i, t_{i+1}]`
//! works on the slice of global nodes `i ..= L + i_{+1}`, whose first
//! `L + 1` nodes are the frozen history.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::{holder_scan, holder_scan_tail, sup_scan, SegmentView};

/// One explicit step of an integral map: the increment over the cell that
/// starts at global node `g`, given the iterate's segment ending at `g`.
pub(crate) trait StepMap: Sync {
    fn dim(&self) -> usize;
    fn increment(&self, g: usize, seg: SegmentView<'_>, dw: f64, h: f64, out: &mut [f64], scratch: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EngineParams {
    /// Exponent of the convergence metric `‖·‖_{∞,β}`.
    pub beta: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// `μ` for the ball check; `None` skips it.
    pub ball_mu: Option<f64>,
    pub lag: usize,
    pub delay: f64,
    pub mesh: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Init<'a> {
    Constant,
    Linear,
    /// Global buffer whose window nodes seed the iteration.
    Guess(&'a [f64]),
}

/// Diagnostics of one solved window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRecord {
    pub start: f64,
    pub end: f64,
    pub cells: usize,
    pub iterations: usize,
    /// Last successive difference `‖x^{m+1} − x^m‖_{∞,β}`.
    pub residual: f64,
    /// `‖F(x*) − x*‖_{∞,β}` for the returned iterate.
    pub fixed_point_residual: f64,
    /// Largest ratio of successive differences while above the noise floor.
    pub contraction_ratio: Option<f64>,
    /// `R_i = (‖x‖_{∞,β,[t_i−r,t_i]} + μ)/(1 − μ)`.
    pub ball_radius: Option<f64>,
    /// Largest `‖x^m‖_{∞,β,[t_i−r,t_{i+1}]}` over all iterates.
    pub max_ball_norm: Option<f64>,
    pub ball_ok: bool,
    pub bisected: bool,
}

/// Applies the map to `x` (window slice layout), writing into `out`.
pub(crate) fn apply_map<M: StepMap + ?Sized>(
    map: &M,
    x: &[f64],
    out: &mut [f64],
    first_global: usize,
    p: &EngineParams,
    dw: &[f64],
) {
    let d = map.dim();
    let l = p.lag;
    let mut inc = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    out[..(l + 1) * d].copy_from_slice(&x[..(l + 1) * d]);
    for (j, &w) in dw.iter().enumerate() {
        let seg = SegmentView::from_raw(p.delay, p.mesh, d, &x[j * d..(l + j + 1) * d]);
        map.increment(first_global + l + j, seg, w, p.mesh, &mut inc, &mut scratch);
        let (head, tail) = out.split_at_mut((l + j + 1) * d);
        let prev = &head[(l + j) * d..];
        for i in 0..d {
            tail[i] = prev[i] + inc[i];
        }
    }
}

/// `‖a − b‖_{∞,β}` over the window nodes `L..` of two window slices.
fn window_distance(a: &[f64], b: &[f64], d: usize, p: &EngineParams, scratch: &mut Vec<f64>) -> f64 {
    let start = p.lag * d;
    scratch.clear();
    scratch.extend(a[start..].iter().zip(&b[start..]).map(|(x, y)| x - y));
    let n = scratch.len() / d;
    sup_scan(scratch, d, 0, n - 1) + holder_scan(scratch, d, p.mesh, p.beta, 0, n - 1).0
}

enum Attempt {
    Done(WindowRecord, Vec<f64>),
    Stalled { iterations: usize, history: Vec<f64> },
}

fn run_window<M: StepMap + ?Sized>(
    map: &M,
    buf: &[f64],
    omega: &[f64],
    i0: usize,
    i1: usize,
    p: &EngineParams,
    init: Init<'_>,
) -> Attempt {
    let d = map.dim();
    let l = p.lag;
    let w = i1 - i0;
    let lo = i0 * d;
    let hi = (l + i1 + 1) * d;
    let mut x = buf[lo..hi].to_vec();
    let anchor = x[l * d..(l + 1) * d].to_vec();
    match init {
        Init::Constant => {
            for j in 1..=w {
                x[(l + j) * d..(l + j + 1) * d].copy_from_slice(&anchor);
            }
        }
        Init::Linear => {
            let prev = x[(l - 1) * d..l * d].to_vec();
            for j in 1..=w {
                for i in 0..d {
                    x[(l + j) * d + i] = anchor[i] + j as f64 * (anchor[i] - prev[i]);
                }
            }
        }
        Init::Guess(g) => {
            x[(l + 1) * d..].copy_from_slice(&g[lo + (l + 1) * d..hi]);
        }
    }
    let dw: Vec<f64> = (i0..i1).map(|k| omega[k + 1] - omega[k]).collect();
    let nodes = l + w + 1;

    let (hist_sem, ball_radius) = match p.ball_mu {
        Some(mu) => {
            let s = holder_scan(&x, d, p.mesh, p.beta, 0, l).0;
            let n = sup_scan(&x, d, 0, l) + s;
            (s, Some((n + mu) / (1.0 - mu)))
        }
        None => (0.0, None),
    };
    let ball_norm = |v: &[f64]| -> f64 {
        sup_scan(v, d, 0, nodes - 1) + hist_sem.max(holder_scan_tail(v, d, p.mesh, p.beta, 0, nodes - 1, l + 1).0)
    };
    let mut max_ball = ball_radius.map(|_| ball_norm(&x));

    let mut next = vec![0.0; x.len()];
    let mut scratch = Vec::with_capacity((w + 1) * d);
    let mut diffs: Vec<f64> = Vec::new();
    let mut ratio: Option<f64> = None;
    let floor = 100.0 * p.tol;
    for it in 1..=p.max_iters {
        apply_map(map, &x, &mut next, i0, p, &dw);
        let diff = window_distance(&next, &x, d, p, &mut scratch);
        std::mem::swap(&mut x, &mut next);
        if let Some(m) = max_ball.as_mut() {
            *m = m.max(ball_norm(&x));
        }
        if let Some(&prev) = diffs.last() {
            if prev > floor && diff.is_finite() {
                let q = diff / prev;
                ratio = Some(ratio.map_or(q, |r: f64| r.max(q)));
            }
        }
        diffs.push(diff);
        if diff <= p.tol {
            apply_map(map, &x, &mut next, i0, p, &dw);
            let fpr = window_distance(&next, &x, d, p, &mut scratch);
            let ball_ok = match (max_ball, ball_radius) {
                (Some(m), Some(r)) => m <= r * (1.0 + 1e-12),
                _ => true,
            };
            let rec = WindowRecord {
                start: i0 as f64 * p.mesh,
                end: i1 as f64 * p.mesh,
                cells: w,
                iterations: it,
                residual: diff,
                fixed_point_residual: fpr,
                contraction_ratio: ratio,
                ball_radius,
                max_ball_norm: max_ball,
                ball_ok,
                bisected: false,
            };
            return Attempt::Done(rec, x);
        }
        let plateau = it > 4 && diff >= 0.99 * diffs[it - 5];
        if !diff.is_finite() || plateau {
            return Attempt::Stalled { iterations: it, history: diffs };
        }
    }
    Attempt::Stalled { iterations: p.max_iters, history: diffs }
}

/// Result of solving every window in turn.
pub(crate) struct EngineOutput {
    pub values: Vec<f64>,
    pub records: Vec<WindowRecord>,
    pub warnings: Vec<String>,
}

/// Solves window after window, writing each fixed point into the global
/// buffer before moving on. A window that stalls is bisected once.
pub(crate) fn solve_windows<M: StepMap + ?Sized>(
    map: &M,
    history: &[f64],
    omega: &[f64],
    stops: &[usize],
    p: &EngineParams,
    init: Init<'_>,
) -> Result<EngineOutput> {
    let d = map.dim();
    let l = p.lag;
    let steps = *stops.last().expect("at least one stop");
    let mut buf = vec![0.0; (l + steps + 1) * d];
    buf[..(l + 1) * d].copy_from_slice(history);
    let mut records = Vec::new();
    let mut warnings = Vec::new();

    let commit = |buf: &mut Vec<f64>, i0: usize, local: Vec<f64>| {
        let lo = (l + i0 + 1) * d;
        buf[lo..lo + local.len() - (l + 1) * d].copy_from_slice(&local[(l + 1) * d..]);
    };

    for pair in stops.windows(2) {
        let (i0, i1) = (pair[0], pair[1]);
        match run_window(map, &buf, omega, i0, i1, p, init) {
            Attempt::Done(rec, local) => {
                commit(&mut buf, i0, local);
                records.push(rec);
            }
            Attempt::Stalled { iterations, history } => {
                if i1 - i0 < 2 {
                    return Err(non_convergence(i0, i1, p, iterations, history));
                }
                warnings.push(format!(
                    "picard stalled on [{}, {}]; bisecting once",
                    i0 as f64 * p.mesh,
                    i1 as f64 * p.mesh
                ));
                let mid = i0 + (i1 - i0) / 2;
                for (a, b) in [(i0, mid), (mid, i1)] {
                    match run_window(map, &buf, omega, a, b, p, init) {
                        Attempt::Done(mut rec, local) => {
                            rec.bisected = true;
                            commit(&mut buf, a, local);
                            records.push(rec);
                        }
                        Attempt::Stalled { iterations, history } => {
                            return Err(non_convergence(a, b, p, iterations, history));
                        }
                    }
                }
            }
        }
        let last = records.last().expect("window recorded");
        if !last.ball_ok {
            warnings.push(format!(
                "iterate left the ball on [{}, {}]: norm {:.6e} > radius {:.6e}; discretization may be too coarse",
                last.start,
                last.end,
                last.max_ball_norm.unwrap_or(f64::NAN),
                last.ball_radius.unwrap_or(f64::NAN)
            ));
        }
    }
    Ok(EngineOutput { values: buf, records, warnings })
}

fn non_convergence(i0: usize, i1: usize, p: &EngineParams, iterations: usize, history: Vec<f64>) -> Error {
    Error::NonConvergence {
        start: i0 as f64 * p.mesh,
        end: i1 as f64 * p.mesh,
        iterations,
        last: history.last().copied().unwrap_or(f64::NAN),
        history,
    }
}

/// One explicit left-point pass over `[0, T]`.
pub(crate) fn explicit_pass<M: StepMap + ?Sized>(map: &M, history: &[f64], omega: &[f64], steps: usize, p: &EngineParams) -> Vec<f64> {
    let d = map.dim();
    let l = p.lag;
    let mut buf = vec![0.0; (l + steps + 1) * d];
    buf[..(l + 1) * d].copy_from_slice(history);
    let mut inc = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    for k in 0..steps {
        let g = l + k;
        let (head, tail) = buf.split_at_mut((g + 1) * d);
        let seg = SegmentView::from_raw(p.delay, p.mesh, d, &head[k * d..]);
        map.increment(g, seg, omega[k + 1] - omega[k], p.mesh, &mut inc, &mut scratch);
        let prev = &head[g * d..];
        for i in 0..d {
            tail[i] = prev[i] + inc[i];
        }
    }
    buf
}
