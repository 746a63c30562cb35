use std::collections::VecDeque;

use serde::Serialize;

use super::{cells, euclid, norm, GridPath};
use crate::error::{domain, Result};

/// Which node pair or partition realises a reported seminorm.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Node indices `s < t` of a point pair.
    Pair { s: usize, t: usize },
    /// Node indices `s < t` of two segment end times; `lag` is the delay in cells.
    SegmentPair { s: usize, t: usize, lag: usize },
    /// Node indices of a partition, both endpoints included.
    Partition { nodes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub seminorm: f64,
    pub witness: Witness,
    /// Hölder exponent β, or the variation index p for partitions.
    pub exponent: f64,
}

impl NormReport {
    /// Recomputes the seminorm from the witness alone.
    pub fn reevaluate(&self, path: &GridPath) -> f64 {
        let (d, h) = (path.dim(), path.mesh());
        let v = path.values();
        match &self.witness {
            Witness::Pair { s, t } => {
                euclid(path.node(*t), path.node(*s)) * pow_lag(*t - *s, h, self.exponent)
            }
            Witness::SegmentPair { s, t, lag } => {
                let w = (0..=*lag)
                    .map(|j| increment(v, d, *s - *lag + j, *t - *s))
                    .fold(0.0, f64::max);
                w * pow_lag(*t - *s, h, self.exponent)
            }
            Witness::Partition { nodes } => nodes
                .windows(2)
                .map(|w| euclid(path.node(w[1]), path.node(w[0])).powf(self.exponent))
                .sum::<f64>()
                .powf(1.0 / self.exponent),
        }
    }
}

/// `(lag * h)^(-beta)`, the weight every Hölder routine applies to a lag.
#[inline]
fn pow_lag(lag: usize, h: f64, beta: f64) -> f64 {
    (lag as f64 * h).powf(-beta)
}

#[inline]
fn increment(v: &[f64], d: usize, k: usize, lag: usize) -> f64 {
    euclid(&v[(k + lag) * d..(k + lag + 1) * d], &v[k * d..(k + 1) * d])
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(domain(format!("Hölder exponent must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

/// Max Euclidean norm over nodes `lo..=hi` of a row-major buffer.
pub(crate) fn sup_scan(v: &[f64], d: usize, lo: usize, hi: usize) -> f64 {
    (lo..=hi).map(|k| norm(&v[k * d..(k + 1) * d])).fold(0.0, f64::max)
}

/// Upper bound on every increment inside `lo..=hi`.
fn diameter_bound(v: &[f64], d: usize, lo: usize, hi: usize) -> f64 {
    let base = &v[lo * d..(lo + 1) * d];
    2.0 * (lo..=hi)
        .map(|k| euclid(&v[k * d..(k + 1) * d], base))
        .fold(0.0, f64::max)
}

/// Exact grid Hölder seminorm on nodes `lo..=hi` by pair scan.
///
/// Lags are visited in increasing order; the scan stops once the diameter
/// bound times the lag weight can no longer beat the running maximum, which
/// leaves the result unchanged. Returns `(seminorm, s, t)`.
pub(crate) fn holder_scan(
    v: &[f64],
    d: usize,
    h: f64,
    beta: f64,
    lo: usize,
    hi: usize,
) -> (f64, usize, usize) {
    holder_scan_tail(v, d, h, beta, lo, hi, lo + 1)
}

/// As [`holder_scan`], restricted to pairs whose right node is `>= from`.
pub(crate) fn holder_scan_tail(
    v: &[f64],
    d: usize,
    h: f64,
    beta: f64,
    lo: usize,
    hi: usize,
    from: usize,
) -> (f64, usize, usize) {
    let from = from.max(lo + 1);
    if hi <= lo || from > hi {
        return (0.0, lo, hi);
    }
    let diam = diameter_bound(v, d, lo, hi);
    let (mut best, mut ws, mut wt) = (-1.0_f64, lo, lo + 1);
    for lag in 1..=hi - lo {
        let w = pow_lag(lag, h, beta);
        if best >= 0.0 && diam * w <= best {
            break;
        }
        let s_lo = lo.max(from.saturating_sub(lag));
        for s in s_lo..=hi - lag {
            let q = increment(v, d, s, lag) * w;
            if q > best {
                best = q;
                ws = s;
                wt = s + lag;
            }
        }
    }
    (best.max(0.0), ws, wt)
}

/// Sliding-window maxima of `vals` over windows of length `w`.
fn sliding_max(vals: &[f64], w: usize) -> Vec<f64> {
    debug_assert!(w >= 1 && w <= vals.len());
    let mut out = Vec::with_capacity(vals.len() + 1 - w);
    let mut dq: VecDeque<usize> = VecDeque::with_capacity(w);
    for (i, &x) in vals.iter().enumerate() {
        while dq.back().is_some_and(|&j| vals[j] <= x) {
            dq.pop_back();
        }
        dq.push_back(i);
        if dq[0] + w <= i {
            dq.pop_front();
        }
        if i + 1 >= w {
            out.push(vals[dq[0]]);
        }
    }
    out
}

/// Sliding-window argmax (first maximiser) for witness recovery.
fn sliding_argmax(vals: &[f64], w: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(vals.len() + 1 - w);
    let mut dq: VecDeque<usize> = VecDeque::with_capacity(w);
    for (i, &x) in vals.iter().enumerate() {
        while dq.back().is_some_and(|&j| vals[j] < x) {
            dq.pop_back();
        }
        dq.push_back(i);
        if dq[0] + w <= i {
            dq.pop_front();
        }
        if i + 1 >= w {
            out.push(dq[0]);
        }
    }
    out
}

/// `‖x‖_{∞,[a,b]}` over grid nodes.
pub fn sup_norm(path: &GridPath, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = path.window(window.0, window.1)?;
    Ok(sup_scan(path.values(), path.dim(), lo, hi))
}

/// Grid `β`-Hölder seminorm on `[a, b]` with its witness pair.
pub fn holder_seminorm(path: &GridPath, beta: f64, window: (f64, f64)) -> Result<NormReport> {
    check_beta(beta)?;
    let (lo, hi) = path.window(window.0, window.1)?;
    let (seminorm, s, t) = holder_scan(path.values(), path.dim(), path.mesh(), beta, lo, hi);
    Ok(NormReport {
        seminorm,
        witness: Witness::Pair { s, t },
        exponent: beta,
    })
}

/// `‖x‖_{∞,β,[a,b]}`: sup norm plus Hölder seminorm.
pub fn holder_norm(path: &GridPath, beta: f64, window: (f64, f64)) -> Result<f64> {
    Ok(sup_norm(path, window)? + holder_seminorm(path, beta, window)?.seminorm)
}

/// Grid `p`-variation seminorm on `[a, b]` by dynamic programming over nodes.
///
/// `best[j]` is the largest sum of `p`-th powers over partitions of
/// `[a, node j]`; the optimum over all grid partitions is `best[hi]`.
pub fn pvar_seminorm(path: &GridPath, p: f64, window: (f64, f64)) -> Result<NormReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(domain(format!("p-variation index must be >= 1, got {p}")));
    }
    let (lo, hi) = path.window(window.0, window.1)?;
    let n = hi - lo;
    let mut best = vec![0.0_f64; n + 1];
    let mut parent = vec![0usize; n + 1];
    for j in 1..=n {
        let xj = path.node(lo + j);
        let (mut bj, mut pj) = (f64::NEG_INFINITY, 0);
        for i in 0..j {
            let c = best[i] + euclid(xj, path.node(lo + i)).powf(p);
            if c > bj {
                bj = c;
                pj = i;
            }
        }
        best[j] = bj;
        parent[j] = pj;
    }
    let mut nodes = vec![hi];
    let mut j = n;
    while j > 0 {
        j = parent[j];
        nodes.push(lo + j);
    }
    nodes.reverse();
    Ok(NormReport {
        seminorm: best[n].powf(1.0 / p),
        witness: Witness::Partition { nodes },
        exponent: p,
    })
}

/// Hölder seminorm of the segment-valued map `t ↦ x_t` on `[a, b]`, with
/// `‖x_t − x_s‖` measured as the sup over grid nodes of `[-r, 0]`.
pub fn segment_path_holder(
    path: &GridPath,
    beta: f64,
    r: f64,
    window: (f64, f64),
) -> Result<NormReport> {
    check_beta(beta)?;
    let big_l = cells(r, path.mesh())?;
    let (lo, hi) = path.window(window.0, window.1)?;
    if lo < big_l {
        return Err(domain("segment precedes history"));
    }
    let (v, d, h) = (path.values(), path.dim(), path.mesh());
    let (mut best, mut ws, mut wt) = (-1.0_f64, lo, lo + 1);
    let diam = diameter_bound(v, d, lo - big_l, hi);
    for lag in 1..=hi - lo {
        let w = pow_lag(lag, h, beta);
        if best >= 0.0 && diam * w <= best {
            break;
        }
        // e[k] = ‖x(k+lag) − x(k)‖ for k from lo−L to hi−lag; the segment
        // pair (s, s+lag) sees the block k ∈ [s−L, s].
        let base = lo - big_l;
        let e: Vec<f64> = (base..=hi - lag).map(|k| increment(v, d, k, lag)).collect();
        let arg = sliding_argmax(&e, big_l + 1);
        for (off, &a) in arg.iter().enumerate() {
            let q = e[a] * w;
            if q > best {
                best = q;
                ws = lo + off;
                wt = ws + lag;
            }
        }
    }
    Ok(NormReport {
        seminorm: best.max(0.0),
        witness: Witness::SegmentPair { s: ws, t: wt, lag: big_l },
        exponent: beta,
    })
}

/// `‖x_·‖_{∞,β,[a,b]}` for the segment-valued map: `sup_t ‖x_t‖_∞` plus
/// [`segment_path_holder`].
pub fn segment_path_norm(path: &GridPath, beta: f64, r: f64, window: (f64, f64)) -> Result<f64> {
    let sup = sup_norm(path, (window.0 - r, window.1))?;
    Ok(sup + segment_path_holder(path, beta, r, window)?.seminorm)
}

/// `‖x_t‖_{∞,β,[-r,0]}` for every node `t` with `t − r` inside the path.
///
/// Entry `i` belongs to node `i + r/mesh`. Each lag contributes a sliding
/// maximum of its increments, so the cost is `O(len · r/mesh)`.
pub fn segment_norms(path: &GridPath, beta: f64, r: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    let big_l = cells(r, path.mesh())?;
    let n = path.len();
    if big_l == 0 || n <= big_l {
        return Err(domain("path is shorter than one delay segment"));
    }
    let (v, d, h) = (path.values(), path.dim(), path.mesh());
    let norms: Vec<f64> = (0..n).map(|k| norm(&v[k * d..(k + 1) * d])).collect();
    let mut out = sliding_max(&norms, big_l + 1);
    let mut semi = vec![0.0_f64; n - big_l];
    for lag in 1..=big_l {
        let w = pow_lag(lag, h, beta);
        let e: Vec<f64> = (0..n - lag).map(|k| increment(v, d, k, lag)).collect();
        for (acc, m) in semi.iter_mut().zip(sliding_max(&e, big_l - lag + 1)) {
            *acc = acc.max(m * w);
        }
    }
    for (o, s) in out.iter_mut().zip(semi) {
        *o += s;
    }
    Ok(out)
}

/// Partition sum `(Σ_i ‖x_{(i+1)/n} − x_{i/n}‖^p_{∞,[-1,0]})^{1/p}` for
/// `x(t) = |t|^β` on the uniform `n`-partition of `[0, 1]`.
///
/// Segment sup norms are taken over the mesh-`1/n` grid of `[-1, 0]`.
pub fn counterexample_growth(beta: f64, p: f64, n: usize) -> Result<f64> {
    check_beta(beta)?;
    if !(p >= 1.0) {
        return Err(domain(format!("p-variation index must be >= 1, got {p}")));
    }
    if beta * p >= 1.0 {
        return Err(domain(format!(
            "counterexample needs beta*p < 1, got {}",
            beta * p
        )));
    }
    if n == 0 {
        return Err(domain("partition size must be positive"));
    }
    let nf = n as f64;
    let x: Vec<f64> = (0..=2 * n)
        .map(|k| ((k as f64 - nf) / nf).abs().powf(beta))
        .collect();
    let e: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    // Segment at i/n covers nodes i..=i+n, so the difference of consecutive
    // segments is the block e[i..=i+n].
    let sum: f64 = sliding_max(&e, n + 1).iter().map(|m| m.powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}
