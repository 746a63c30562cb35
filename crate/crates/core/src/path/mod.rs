//! Uniformly sampled paths, delay segments and the Hölder / p-variation
//! seminorms computed on them.
//!
//! Every quantity here is grid-restricted: suprema run over grid nodes only,
//! so a grid seminorm never exceeds the continuum seminorm of the sampled path.

mod io;
mod norms;

pub use io::{read_csv, write_csv, PathEnvelope};
pub use norms::{
    counterexample_growth, holder_norm, holder_seminorm, pvar_seminorm, segment_path_holder,
    segment_path_norm, segment_norms, sup_norm, NormReport, Witness,
};
pub(crate) use norms::{holder_scan, holder_scan_tail, sup_scan};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Relative slack (in units of the mesh) when mapping a time onto a node.
const GRID_SLACK: f64 = 1e-6;

/// Number of mesh cells spanned by `len`, which must be an integer multiple
/// of `mesh`.
pub fn cells(len: f64, mesh: f64) -> Result<usize> {
    if !(mesh > 0.0) || !mesh.is_finite() {
        return Err(domain(format!("mesh must be positive, got {mesh}")));
    }
    if len < 0.0 || !len.is_finite() {
        return Err(domain(format!("length must be nonnegative, got {len}")));
    }
    let q = len / mesh;
    let k = q.round();
    if (q - k).abs() > GRID_SLACK {
        return Err(domain(format!("{len} is not an integer multiple of mesh {mesh}")));
    }
    Ok(k as usize)
}

/// A `dim`-dimensional path sampled at `t0 + k * mesh`, `k = 0..len()`.
///
/// Values are stored row-major: node `k` occupies `values[k*dim..(k+1)*dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathEnvelope", into = "PathEnvelope")]
pub struct GridPath {
    t0: f64,
    mesh: f64,
    dim: usize,
    values: Vec<f64>,
}

impl GridPath {
    pub fn new(t0: f64, mesh: f64, dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(mesh > 0.0) || !mesh.is_finite() {
            return Err(domain(format!("mesh must be positive, got {mesh}")));
        }
        if !t0.is_finite() {
            return Err(domain("start time must be finite"));
        }
        if dim == 0 {
            return Err(domain("dimension must be positive"));
        }
        if values.is_empty() || values.len() % dim != 0 {
            return Err(domain(format!(
                "expected a nonempty multiple of {dim} values, got {}",
                values.len()
            )));
        }
        Ok(Self { t0, mesh, dim, values })
    }

    pub fn scalar(t0: f64, mesh: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(t0, mesh, 1, values)
    }

    pub fn from_rows(t0: f64, mesh: f64, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(domain("all rows must have the same dimension"));
        }
        Self::new(t0, mesh, dim, rows.concat())
    }

    /// Samples `f` at the `steps + 1` nodes of `[t0, t0 + steps*mesh]`.
    pub fn from_fn(
        t0: f64,
        mesh: f64,
        steps: usize,
        dim: usize,
        mut f: impl FnMut(f64) -> Vec<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity((steps + 1) * dim);
        for k in 0..=steps {
            let v = f(t0 + k as f64 * mesh);
            if v.len() != dim {
                return Err(domain("sampling function returned a vector of the wrong dimension"));
            }
            values.extend(v);
        }
        Self::new(t0, mesh, dim, values)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.mesh
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    /// Node index of time `t`; fails when `t` is off-grid or outside the path.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let q = (t - self.t0) / self.mesh;
        let k = q.round();
        if (q - k).abs() > GRID_SLACK || !q.is_finite() {
            return Err(domain(format!("time {t} is not a grid node (mesh {})", self.mesh)));
        }
        if k < 0.0 || k as usize >= self.len() {
            return Err(domain(format!(
                "time {t} outside path domain [{}, {}]",
                self.t0,
                self.t_end()
            )));
        }
        Ok(k as usize)
    }

    /// Node indices of a window `[a, b]` with `a < b`.
    pub fn window(&self, a: f64, b: f64) -> Result<(usize, usize)> {
        if !(a < b) {
            return Err(domain(format!("empty window [{a}, {b}]")));
        }
        let lo = self.index_of(a)?;
        let hi = self.index_of(b)?;
        if lo >= hi {
            return Err(domain(format!("window [{a}, {b}] spans no mesh cell")));
        }
        Ok((lo, hi))
    }

    /// Whole-domain window.
    pub fn full_window(&self) -> (f64, f64) {
        (self.t0, self.t_end())
    }

    /// The nodes `lo..=hi` as a new path.
    pub fn slice(&self, lo: usize, hi: usize) -> GridPath {
        GridPath {
            t0: self.time(lo),
            mesh: self.mesh,
            dim: self.dim,
            values: self.values[lo * self.dim..(hi + 1) * self.dim].to_vec(),
        }
    }

    /// Restriction to the window `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<GridPath> {
        let (lo, hi) = self.window(a, b)?;
        Ok(self.slice(lo, hi))
    }

    /// Every `stride`-th node, starting at the first.
    pub fn subsample(&self, stride: usize) -> Result<GridPath> {
        if stride == 0 || (self.len() - 1) % stride != 0 {
            return Err(domain(format!(
                "stride {stride} does not divide the {} cells of the path",
                self.len() - 1
            )));
        }
        let values = self
            .rows()
            .step_by(stride)
            .flat_map(|r| r.iter().copied())
            .collect();
        GridPath::new(self.t0, self.mesh * stride as f64, self.dim, values)
    }

    /// Componentwise map of node values.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridPath {
        GridPath {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, a: f64) -> GridPath {
        self.map(|v| a * v)
    }

    /// `a * self + b * other` on a common grid.
    pub fn combine(&self, a: f64, other: &GridPath, b: f64) -> Result<GridPath> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(GridPath { values, ..self.clone() })
    }

    pub fn sub(&self, other: &GridPath) -> Result<GridPath> {
        self.combine(1.0, other, -1.0)
    }

    pub(crate) fn check_same_grid(&self, other: &GridPath) -> Result<()> {
        if self.dim != other.dim || self.len() != other.len() {
            return Err(domain("paths have different shapes"));
        }
        if (self.mesh - other.mesh).abs() > 1e-12 * self.mesh
            || (self.t0 - other.t0).abs() > GRID_SLACK * self.mesh
        {
            return Err(domain("paths live on different grids"));
        }
        Ok(())
    }

    /// Largest Euclidean distance between corresponding nodes.
    pub fn max_distance(&self, other: &GridPath) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .rows()
            .zip(other.rows())
            .map(|(x, y)| euclid(x, y))
            .fold(0.0, f64::max))
    }

    /// Borrowed delay segment ending at node `k` and spanning `lag` cells.
    pub fn segment_view(&self, k: usize, lag: usize, delay: f64) -> Result<SegmentView<'_>> {
        if k < lag {
            return Err(domain("segment precedes history"));
        }
        if k >= self.len() {
            return Err(domain("segment end lies beyond the path"));
        }
        Ok(SegmentView {
            delay,
            mesh: self.mesh,
            dim: self.dim,
            values: &self.values[(k - lag) * self.dim..(k + 1) * self.dim],
        })
    }
}

pub(crate) fn euclid(x: &[f64], y: &[f64]) -> f64 {
    if x.len() == 1 {
        return (x[0] - y[0]).abs();
    }
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    if x.len() == 1 {
        return x[0].abs();
    }
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// The delay slice `x_t(u) = x(t + u)`, `u ∈ [-r, 0]`, stored on the grid.
///
/// Node 0 is `u = -r`; the last node is `u = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    delay: f64,
    mesh: f64,
    dim: usize,
    values: Vec<f64>,
}

impl Segment {
    pub fn new(delay: f64, mesh: f64, dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(delay > 0.0) {
            return Err(domain(format!("delay must be positive, got {delay}")));
        }
        let lag = cells(delay, mesh)?;
        if lag == 0 {
            return Err(domain("delay must span at least one mesh cell"));
        }
        if dim == 0 || values.len() != (lag + 1) * dim {
            return Err(domain(format!(
                "segment needs {} nodes of dimension {dim}, got {} values",
                lag + 1,
                values.len()
            )));
        }
        Ok(Self { delay, mesh, dim, values })
    }

    /// Samples `f(u)` for `u` on the grid of `[-delay, 0]`.
    pub fn from_fn(
        delay: f64,
        mesh: f64,
        dim: usize,
        mut f: impl FnMut(f64) -> Vec<f64>,
    ) -> Result<Self> {
        let lag = cells(delay, mesh)?;
        let mut values = Vec::with_capacity((lag + 1) * dim);
        for k in 0..=lag {
            let u = -delay + k as f64 * mesh;
            let v = f(u);
            if v.len() != dim {
                return Err(domain("sampling function returned a vector of the wrong dimension"));
            }
            values.extend(v);
        }
        Self::new(delay, mesh, dim, values)
    }

    pub fn constant(delay: f64, mesh: f64, value: &[f64]) -> Result<Self> {
        Self::from_fn(delay, mesh, value.len(), |_| value.to_vec())
    }

    pub fn zeros(delay: f64, mesh: f64, dim: usize) -> Result<Self> {
        Self::constant(delay, mesh, &vec![0.0; dim])
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of cells, `r / mesh`.
    pub fn lag(&self) -> usize {
        self.values.len() / self.dim - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn view(&self) -> SegmentView<'_> {
        SegmentView {
            delay: self.delay,
            mesh: self.mesh,
            dim: self.dim,
            values: &self.values,
        }
    }

    /// The segment as a path on `[-r, 0]`.
    pub fn to_path(&self) -> GridPath {
        GridPath {
            t0: -self.delay,
            mesh: self.mesh,
            dim: self.dim,
            values: self.values.clone(),
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Segment, b: f64) -> Result<Segment> {
        if self.values.len() != other.values.len() || self.dim != other.dim {
            return Err(domain("segments have different shapes"));
        }
        Ok(Segment {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            ..self.clone()
        })
    }

    pub fn scale(&self, a: f64) -> Segment {
        Segment {
            values: self.values.iter().map(|v| a * v).collect(),
            ..self.clone()
        }
    }

    /// `‖·‖_{∞,β,[-r,0]}`: sup norm plus β-Hölder seminorm over the nodes.
    pub fn holder_norm(&self, beta: f64) -> f64 {
        self.view().holder_norm(beta)
    }

    pub fn sup_norm(&self) -> f64 {
        self.view().sup_norm()
    }
}

/// Borrowed form of [`Segment`]; what coefficient functionals consume.
#[derive(Debug, Clone, Copy)]
pub struct SegmentView<'a> {
    delay: f64,
    mesh: f64,
    dim: usize,
    values: &'a [f64],
}

impl<'a> SegmentView<'a> {
    pub(crate) fn from_raw(delay: f64, mesh: f64, dim: usize, values: &'a [f64]) -> Self {
        debug_assert!(values.len() % dim == 0);
        Self { delay, mesh, dim, values }
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }

    /// Value at node `k`, counted from `u = -r`.
    pub fn node(&self, k: usize) -> &'a [f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// `ξ(0)`.
    pub fn current(&self) -> &'a [f64] {
        self.node(self.nodes() - 1)
    }

    /// `ξ(-r)`.
    pub fn delayed(&self) -> &'a [f64] {
        self.node(0)
    }

    pub fn sup_norm(&self) -> f64 {
        sup_scan(self.values, self.dim, 0, self.nodes() - 1)
    }

    pub fn holder_norm(&self, beta: f64) -> f64 {
        let hi = self.nodes() - 1;
        sup_scan(self.values, self.dim, 0, hi)
            + holder_scan(self.values, self.dim, self.mesh, beta, 0, hi).0
    }

    pub fn to_segment(&self) -> Segment {
        Segment {
            delay: self.delay,
            mesh: self.mesh,
            dim: self.dim,
            values: self.values.to_vec(),
        }
    }
}

/// `x_t` as an owned segment: the slice of `path` on `[t - r, t]`.
pub fn segment(path: &GridPath, t: f64, r: f64) -> Result<Segment> {
    let lag = cells(r, path.mesh())?;
    if lag == 0 {
        return Err(domain("delay must span at least one mesh cell"));
    }
    if t - r < path.t0() - GRID_SLACK * path.mesh() {
        return Err(domain("segment precedes history"));
    }
    let k = path.index_of(t)?;
    Ok(path.segment_view(k, lag, r)?.to_segment())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(t0: f64, mesh: f64, steps: usize) -> GridPath {
        GridPath::from_fn(t0, mesh, steps, 1, |t| vec![t]).unwrap()
    }

    #[test]
    fn grid_lookup_rejects_off_grid_times() {
        let p = line(0.0, 0.25, 4);
        assert_eq!(p.index_of(0.5).unwrap(), 2);
        assert!(p.index_of(0.3).is_err());
        assert!(p.index_of(1.25).is_err());
        assert!(p.window(0.5, 0.5).is_err());
    }

    #[test]
    fn segment_of_identity_is_shifted_identity() {
        let p = line(0.0, 1.0 / 64.0, 64);
        let s = segment(&p, 1.0, 0.5).unwrap();
        assert_eq!(s.lag(), 32);
        for k in 0..=s.lag() {
            let u = -0.5 + k as f64 / 64.0;
            assert!((s.view().node(k)[0] - (1.0 + u)).abs() < 1e-15);
        }
    }

    #[test]
    fn segment_at_first_admissible_time_is_prefix() {
        let p = GridPath::from_fn(-0.5, 0.125, 12, 1, |t| vec![t * t]).unwrap();
        let s = segment(&p, 0.0, 0.5).unwrap();
        assert_eq!(s.values(), &p.values()[..5]);
    }

    #[test]
    fn segment_before_history_is_rejected() {
        let p = line(0.0, 0.125, 8);
        let err = segment(&p, 0.25, 0.5).unwrap_err();
        assert!(err.to_string().contains("segment precedes history"));
    }

    #[test]
    fn constant_path_gives_constant_segment() {
        let p = GridPath::from_fn(0.0, 0.1, 10, 2, |_| vec![3.0, -1.0]).unwrap();
        let s = segment(&p, 0.7, 0.3).unwrap();
        assert!(s.values().chunks(2).all(|v| v == [3.0, -1.0]));
    }

    #[test]
    fn subsample_keeps_every_other_node() {
        let p = line(0.0, 0.125, 8);
        let q = p.subsample(2).unwrap();
        assert_eq!(q.len(), 5);
        assert_eq!(q.mesh(), 0.25);
        assert_eq!(q.node(2), &[0.5]);
        assert!(p.subsample(3).is_err());
    }
}
