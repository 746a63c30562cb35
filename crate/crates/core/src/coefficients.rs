//! Coefficient functionals `f, g : C_r → ℝ^d` on grid segments, their
//! directional derivatives and regularity constants.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::path::{cells, holder_scan, norm, sup_scan, GridPath, NormReport, SegmentView, Witness};

/// `L_M(M)` for the local Hölder constant of `Dg`.
pub type LocalConstant = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The functionals of a delay equation. Every method writes a `dim()`-vector
/// into `out`.
pub trait Functionals: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn drift(&self, seg: SegmentView<'_>, out: &mut [f64]);
    fn diffusion(&self, seg: SegmentView<'_>, out: &mut [f64]);
    /// `Df(seg) dir`.
    fn drift_derivative(&self, seg: SegmentView<'_>, dir: SegmentView<'_>, out: &mut [f64]);
    /// `Dg(seg) dir`.
    fn diffusion_derivative(&self, seg: SegmentView<'_>, dir: SegmentView<'_>, out: &mut [f64]);
}

/// Functionals plus the constants the solver relies on.
#[derive(Clone)]
pub struct CoefficientSet {
    pub name: String,
    pub functionals: Arc<dyn Functionals>,
    pub lip_f: f64,
    pub lip_g: f64,
    pub delta: f64,
    pub f0_norm: f64,
    pub g0_norm: f64,
    pub local_holder: LocalConstant,
    /// Sup-norm radius outside which the stated constants are not claimed.
    pub domain_radius: Option<f64>,
    /// Whether `f` and `g` are affine in the segment.
    pub affine: bool,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("name", &self.name)
            .field("functionals", &self.functionals)
            .field("lip_f", &self.lip_f)
            .field("lip_g", &self.lip_g)
            .field("delta", &self.delta)
            .field("f0_norm", &self.f0_norm)
            .field("g0_norm", &self.g0_norm)
            .field("domain_radius", &self.domain_radius)
            .field("affine", &self.affine)
            .finish_non_exhaustive()
    }
}

/// Regularity constants of a user-defined coefficient set.
#[derive(Debug, Clone, Copy)]
pub struct Constants {
    pub lip_f: f64,
    pub lip_g: f64,
    pub delta: f64,
    pub f0_norm: f64,
    pub g0_norm: f64,
}

impl CoefficientSet {
    pub fn custom(
        name: impl Into<String>,
        functionals: Arc<dyn Functionals>,
        c: Constants,
        local_holder: LocalConstant,
    ) -> Result<Self> {
        if !(c.lip_f >= 0.0 && c.lip_g >= 0.0 && c.f0_norm >= 0.0 && c.g0_norm >= 0.0) {
            return Err(config("coefficient constants must be nonnegative"));
        }
        if !(c.delta > 0.0 && c.delta <= 1.0) {
            return Err(config(format!("delta must lie in (0, 1], got {}", c.delta)));
        }
        Ok(CoefficientSet {
            name: name.into(),
            functionals,
            lip_f: c.lip_f,
            lip_g: c.lip_g,
            delta: c.delta,
            f0_norm: c.f0_norm,
            g0_norm: c.g0_norm,
            local_holder,
            domain_radius: None,
            affine: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.functionals.dim()
    }

    pub fn l_m(&self, m: f64) -> f64 {
        (self.local_holder)(m)
    }

    /// `L′ = max{L_f, ‖f(0)‖}`.
    pub fn l_prime(&self) -> f64 {
        self.lip_f.max(self.f0_norm)
    }

    /// Checks `δ ∈ ((1−ν)/ν, 1]`.
    pub fn check_delta(&self, nu: f64) -> Result<()> {
        if !(self.delta > (1.0 - nu) / nu && self.delta <= 1.0) {
            return Err(config(format!(
                "delta = {} must lie in ((1-nu)/nu, 1] = ({}, 1]",
                self.delta,
                (1.0 - nu) / nu
            )));
        }
        Ok(())
    }

    pub fn f(&self, seg: SegmentView<'_>) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.functionals.drift(seg, &mut out);
        out
    }

    pub fn g(&self, seg: SegmentView<'_>) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.functionals.diffusion(seg, &mut out);
        out
    }

    pub fn df(&self, seg: SegmentView<'_>, dir: SegmentView<'_>) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.functionals.drift_derivative(seg, dir, &mut out);
        out
    }

    pub fn dg(&self, seg: SegmentView<'_>, dir: SegmentView<'_>) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.functionals.diffusion_derivative(seg, dir, &mut out);
        out
    }
}

/// Square matrix given row by row in scenario files.
pub type Matrix = Vec<Vec<f64>>;

/// Built-in coefficient families as they appear in scenario JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum CoefficientSpec {
    /// `f(ξ) = A ξ(0) + B ξ(−r)`, `g(ξ) = Σ ξ(−r) + c`.
    LinearDelay {
        #[serde(default)]
        a: Option<Matrix>,
        #[serde(default)]
        b: Option<Matrix>,
        #[serde(default)]
        sigma: Option<Matrix>,
        #[serde(default)]
        c: Option<Vec<f64>>,
        #[serde(default)]
        dim: Option<usize>,
    },
    /// `f(ξ) = A ξ(0) + B ξ(−r)`, `g(ξ) = σ sin(ξ(−r))` componentwise.
    SinDelay {
        #[serde(default)]
        a: Option<Matrix>,
        #[serde(default)]
        b: Option<Matrix>,
        sigma: f64,
        #[serde(default)]
        dim: Option<usize>,
    },
    /// Scalar `f(ξ) = a ξ(0)(1 − tanh ξ(−r))`, `g(ξ) = σ tanh ξ(0)`, with
    /// constants claimed on `‖ξ‖_∞ ≤ bound`.
    ScalarLogisticBounded { a: f64, sigma: f64, bound: f64 },
}

impl CoefficientSpec {
    /// Zero drift and diffusion in dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        CoefficientSpec::LinearDelay { a: None, b: None, sigma: None, c: None, dim: Some(dim) }
    }

    /// Scalar linear delay family.
    pub fn scalar_linear(a: f64, b: f64, sigma: f64, c: f64) -> Self {
        CoefficientSpec::LinearDelay {
            a: Some(vec![vec![a]]),
            b: Some(vec![vec![b]]),
            sigma: Some(vec![vec![sigma]]),
            c: Some(vec![c]),
            dim: None,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            CoefficientSpec::LinearDelay { .. } => "linear_delay",
            CoefficientSpec::SinDelay { .. } => "sin_delay",
            CoefficientSpec::ScalarLogisticBounded { .. } => "scalar_logistic_bounded",
        }
    }

    /// Whether `Df` and `Dg` are constant, so the equation is linear.
    pub fn is_linear(&self) -> bool {
        matches!(self, CoefficientSpec::LinearDelay { .. })
    }
}

fn infer_dim(mats: &[&Option<Matrix>], vecs: &[&Option<Vec<f64>>], hint: Option<usize>) -> Result<usize> {
    let mut dims: Vec<usize> = mats.iter().filter_map(|m| m.as_ref().map(Vec::len)).collect();
    dims.extend(vecs.iter().filter_map(|v| v.as_ref().map(Vec::len)));
    dims.extend(hint);
    let d = *dims.first().ok_or_else(|| config("cannot infer dimension; give `dim`"))?;
    if d == 0 || dims.iter().any(|&x| x != d) {
        return Err(config("coefficient blocks disagree on dimension"));
    }
    Ok(d)
}

fn to_matrix(m: &Option<Matrix>, d: usize, what: &str) -> Result<DMatrix<f64>> {
    match m {
        None => Ok(DMatrix::zeros(d, d)),
        Some(rows) => {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(config(format!("matrix {what} must be {d}x{d}")));
            }
            if rows.iter().flatten().any(|v| !v.is_finite()) {
                return Err(config(format!("matrix {what} has non-finite entries")));
            }
            Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
        }
    }
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    m.singular_values().max()
}

fn mat_vec_add(m: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    let d = out.len();
    for j in 0..d {
        let xj = x[j];
        if xj != 0.0 {
            for i in 0..d {
                out[i] += m[(i, j)] * xj;
            }
        }
    }
}

#[derive(Debug)]
struct LinearDelay {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    sigma: DMatrix<f64>,
    c: Vec<f64>,
}

impl Functionals for LinearDelay {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn drift(&self, seg: SegmentView<'_>, out: &mut [f64]) {
        out.fill(0.0);
        mat_vec_add(&self.a, seg.current(), out);
        mat_vec_add(&self.b, seg.delayed(), out);
    }

    fn diffusion(&self, seg: SegmentView<'_>, out: &mut [f64]) {
        out.copy_from_slice(&self.c);
        mat_vec_add(&self.sigma, seg.delayed(), out);
    }

    fn drift_derivative(&self, _seg: SegmentView<'_>, dir: SegmentView<'_>, out: &mut [f64]) {
        self.drift(dir, out);
    }

    fn diffusion_derivative(&self, _seg: SegmentView<'_>, dir: SegmentView<'_>, out: &mut [f64]) {
        out.fill(0.0);
        mat_vec_add(&self.sigma, dir.delayed(), out);
    }
}

#[derive(Debug)]
struct SinDelay {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    sigma: f64,
}

impl Functionals for SinDelay {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn drift(&self, seg: SegmentView<'_>, out: &mut [f64]) {
        out.fill(0.0);
        mat_vec_add(&self.a, seg.current(), out);
        mat_vec_add(&self.b, seg.delayed(), out);
    }

    fn diffusion(&self, seg: SegmentView<'_>, out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(seg.delayed()) {
            *o = self.sigma * x.sin();
        }
    }

    fn drift_derivative(&self, _seg: SegmentView<'_>, dir: SegmentView<'_>, out: &mut [f64]) {
        self.drift(dir, out);
    }

    fn diffusion_derivative(&self, seg: SegmentView<'_>, dir: SegmentView<'_>, out: &mut [f64]) {
        for ((o, x), v) in out.iter_mut().zip(seg.delayed()).zip(dir.delayed()) {
            *o = self.sigma * x.cos() * v;
        }
    }
}

#[derive(Debug)]
struct ScalarLogistic {
    a: f64,
    sigma: f64,
}

fn sech2(x: f64) -> f64 {
    let c = x.cosh();
    1.0 / (c * c)
}

impl Functionals for ScalarLogistic {
    fn dim(&self) -> usize {
        1
    }

    fn drift(&self, seg: SegmentView<'_>, out: &mut [f64]) {
        out[0] = self.a * seg.current()[0] * (1.0 - seg.delayed()[0].tanh());
    }

    fn diffusion(&self, seg: SegmentView<'_>, out: &mut [f64]) {
        out[0] = self.sigma * seg.current()[0].tanh();
    }

    fn drift_derivative(&self, seg: SegmentView<'_>, dir: SegmentView<'_>, out: &mut [f64]) {
        let (x0, xr) = (seg.current()[0], seg.delayed()[0]);
        let (v0, vr) = (dir.current()[0], dir.delayed()[0]);
        out[0] = self.a * (v0 * (1.0 - xr.tanh()) - x0 * sech2(xr) * vr);
    }

    fn diffusion_derivative(&self, seg: SegmentView<'_>, dir: SegmentView<'_>, out: &mut [f64]) {
        out[0] = self.sigma * sech2(seg.current()[0]) * dir.current()[0];
    }
}

/// `max |d/dx sech²(x)| = 4 / (3√3)`.
pub const SECH2_LIPSCHITZ: f64 = 0.769_800_358_919_501;

fn constant_lm(v: f64) -> LocalConstant {
    Arc::new(move |_| v)
}

/// Instantiates a built-in family with its closed-form constants.
pub fn make_builtin(spec: &CoefficientSpec) -> Result<CoefficientSet> {
    let name = spec.family().to_string();
    match spec {
        CoefficientSpec::LinearDelay { a, b, sigma, c, dim } => {
            let d = infer_dim(&[a, b, sigma], &[c], *dim)?;
            let (a, b, sigma) = (to_matrix(a, d, "a")?, to_matrix(b, d, "b")?, to_matrix(sigma, d, "sigma")?);
            let c = c.clone().unwrap_or_else(|| vec![0.0; d]);
            if c.len() != d || c.iter().any(|v| !v.is_finite()) {
                return Err(config("vector c must be finite with the coefficient dimension"));
            }
            let lip_f = spectral_norm(&a) + spectral_norm(&b);
            let lip_g = spectral_norm(&sigma);
            let g0_norm = norm(&c);
            Ok(CoefficientSet {
                name,
                functionals: Arc::new(LinearDelay { a, b, sigma, c }),
                lip_f,
                lip_g,
                delta: 1.0,
                f0_norm: 0.0,
                g0_norm,
                local_holder: constant_lm(0.0),
                domain_radius: None,
                affine: true,
            })
        }
        CoefficientSpec::SinDelay { a, b, sigma, dim } => {
            let d = infer_dim(&[a, b], &[], *dim)?;
            let (a, b) = (to_matrix(a, d, "a")?, to_matrix(b, d, "b")?);
            if !sigma.is_finite() {
                return Err(config("sigma must be finite"));
            }
            let lip_f = spectral_norm(&a) + spectral_norm(&b);
            Ok(CoefficientSet {
                name,
                functionals: Arc::new(SinDelay { a, b, sigma: *sigma }),
                lip_f,
                lip_g: sigma.abs(),
                delta: 1.0,
                f0_norm: 0.0,
                g0_norm: 0.0,
                local_holder: constant_lm(sigma.abs()),
                domain_radius: None,
                affine: false,
            })
        }
        CoefficientSpec::ScalarLogisticBounded { a, sigma, bound } => {
            if !(a.is_finite() && sigma.is_finite() && *bound > 0.0 && bound.is_finite()) {
                return Err(config("logistic parameters must be finite with bound > 0"));
            }
            Ok(CoefficientSet {
                name,
                functionals: Arc::new(ScalarLogistic { a: *a, sigma: *sigma }),
                lip_f: a.abs() * (2.0 + bound),
                lip_g: sigma.abs(),
                delta: 1.0,
                f0_norm: 0.0,
                g0_norm: 0.0,
                local_holder: constant_lm(SECH2_LIPSCHITZ * sigma.abs()),
                domain_radius: Some(*bound),
                affine: false,
            })
        }
    }
}

/// Source of random segments with `‖ξ‖_∞ ≤ radius`.
#[derive(Debug, Clone)]
pub struct SegmentSampler {
    pub delay: f64,
    pub mesh: f64,
    pub dim: usize,
    pub seed: u64,
}

impl SegmentSampler {
    pub fn new(delay: f64, mesh: f64, dim: usize, seed: u64) -> Result<Self> {
        if cells(delay, mesh)? == 0 {
            return Err(domain("delay must span at least one mesh cell"));
        }
        Ok(SegmentSampler { delay, mesh, dim, seed })
    }

    fn nodes(&self) -> usize {
        (self.delay / self.mesh).round() as usize + 1
    }

    /// One random segment in the ball of the given radius. Shapes alternate
    /// between rough (independent nodes), smooth (few harmonics) and constant.
    fn draw(&self, rng: &mut ChaCha20Rng, radius: f64) -> Vec<f64> {
        let n = self.nodes() * self.dim;
        let mut v: Vec<f64> = match rng.random_range(0..3) {
            0 => (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect(),
            1 => {
                let (f1, f2) = (rng.random_range(0.5..4.0), rng.random_range(4.0..20.0));
                let (p1, p2) = (rng.random_range(0.0..6.3), rng.random_range(0.0..6.3));
                let c: f64 = rng.random_range(-1.0..1.0);
                (0..n)
                    .map(|k| {
                        let u = (k / self.dim) as f64 / (self.nodes() - 1) as f64;
                        c + 0.5 * (f1 * u + p1 + k as f64).sin() + 0.3 * (f2 * u + p2).cos()
                    })
                    .collect()
            }
            _ => {
                let c: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
                (0..n).map(|k| c[k % self.dim]).collect()
            }
        };
        let s = rng.random_range(0.0..=1.0) * radius;
        rescale(&mut v, s);
        v
    }

    /// A nearby segment: `base` plus a perturbation of random size, pulled
    /// back into the ball.
    fn near(&self, rng: &mut ChaCha20Rng, base: &[f64], radius: f64) -> Vec<f64> {
        let scale = 10f64.powf(rng.random_range(-6.0..0.0)) * radius.max(1e-300);
        let mut v: Vec<f64> = base.iter().map(|x| x + scale * rng.random_range(-1.0..=1.0)).collect();
        let m = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if m > radius {
            for x in &mut v {
                *x *= radius / m;
            }
        }
        v
    }
}

/// Scales `v` so its largest absolute entry equals `target` (zero stays zero).
fn rescale(v: &mut [f64], target: f64) {
    let m = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if m > 0.0 {
        for x in v.iter_mut() {
            *x *= target / m;
        }
    }
}

fn seg_sup(v: &[f64], dim: usize) -> f64 {
    sup_scan(v, dim, 0, v.len() / dim - 1)
}

/// Worst observed ratios from [`verify_regularity`]; a ratio above
/// `1 + 1e-9` means the stated constant is violated.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub family: String,
    pub radius: f64,
    pub trials: usize,
    pub f_lipschitz: f64,
    pub g_lipschitz: f64,
    pub dg_bound: f64,
    pub dg_holder: f64,
    pub valid: bool,
}

/// Tolerance on worst ratios before a constant counts as violated.
pub const REGULARITY_SLACK: f64 = 1e-9;

fn ratio(observed: f64, bound: f64) -> f64 {
    if observed == 0.0 {
        0.0
    } else if bound == 0.0 {
        if observed <= 1e-14 { 0.0 } else { f64::INFINITY }
    } else {
        observed / bound
    }
}

/// Samples segment pairs in the ball of radius `m` (capped at the family's
/// domain) and checks `L_f`, `L_g` (on `g` and on `Dg` along unit
/// directions) and the `δ`-Hölder bound of `Dg` with constant `L_M(m)`.
pub fn verify_regularity(
    coeffs: &CoefficientSet,
    sampler: &SegmentSampler,
    m: f64,
    trials: usize,
) -> Result<RegularityReport> {
    if trials == 0 {
        return Err(domain("verify_regularity needs at least one trial"));
    }
    if sampler.dim != coeffs.dim() {
        return Err(domain("sampler dimension differs from coefficient dimension"));
    }
    let radius = coeffs.domain_radius.map_or(m, |d| d.min(m));
    let lm = coeffs.l_m(m);
    let mut rng = ChaCha20Rng::seed_from_u64(sampler.seed);
    let (d, h, r) = (sampler.dim, sampler.mesh, sampler.delay);
    fn mk(r: f64, h: f64, d: usize, v: &[f64]) -> SegmentView<'_> {
        SegmentView::from_raw(r, h, d, v)
    }
    let diff = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let (mut wf, mut wg, mut wdg, mut wdh) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..trials {
        let xi = sampler.draw(&mut rng, radius);
        let eta = if i % 2 == 0 { sampler.near(&mut rng, &xi, radius) } else { sampler.draw(&mut rng, radius) };
        let dist: Vec<f64> = xi.iter().zip(&eta).map(|(a, b)| a - b).collect();
        let dist = seg_sup(&dist, d);
        if dist > 0.0 {
            let df = diff(&coeffs.f(mk(r, h, d, &xi)), &coeffs.f(mk(r, h, d, &eta)));
            wf = wf.max(ratio(df, coeffs.lip_f * dist));
            let dg = diff(&coeffs.g(mk(r, h, d, &xi)), &coeffs.g(mk(r, h, d, &eta)));
            wg = wg.max(ratio(dg, coeffs.lip_g * dist));
        }
        let mut dir = sampler.draw(&mut rng, 1.0);
        if rng.random_bool(0.5) {
            dir.iter_mut().for_each(|x| *x = if *x >= 0.0 { 1.0 } else { -1.0 });
        }
        rescale(&mut dir, 1.0);
        let dsup = seg_sup(&dir, d);
        if dsup > 0.0 {
            let a = coeffs.dg(mk(r, h, d, &xi), mk(r, h, d, &dir));
            wdg = wdg.max(ratio(norm(&a), coeffs.lip_g * dsup));
            if dist > 0.0 {
                let b = coeffs.dg(mk(r, h, d, &eta), mk(r, h, d, &dir));
                wdh = wdh.max(ratio(diff(&a, &b), lm * dist.powf(coeffs.delta) * dsup));
            }
        }
    }
    let limit = 1.0 + REGULARITY_SLACK;
    Ok(RegularityReport {
        family: coeffs.name.clone(),
        radius,
        trials,
        f_lipschitz: wf,
        g_lipschitz: wg,
        dg_bound: wdg,
        dg_holder: wdh,
        valid: wf <= limit && wg <= limit && wdg <= limit && wdh <= limit,
    })
}

/// `t ↦ g(x_t)` sampled at the grid nodes of `[a, b]`.
pub fn compose_diffusion(coeffs: &CoefficientSet, path: &GridPath, r: f64, window: (f64, f64)) -> Result<GridPath> {
    let lag = cells(r, path.mesh())?;
    let (lo, hi) = path.window(window.0, window.1)?;
    if lo < lag {
        return Err(domain("segment precedes history"));
    }
    let d = coeffs.dim();
    let mut values = Vec::with_capacity((hi - lo + 1) * d);
    let mut out = vec![0.0; d];
    for k in lo..=hi {
        coeffs.functionals.diffusion(path.segment_view(k, lag, r)?, &mut out);
        values.extend_from_slice(&out);
    }
    GridPath::new(path.time(lo), path.mesh(), d, values)
}

/// Grid `β`-Hölder seminorm of `t ↦ g(x_t)` on `[a, b]`, paired with the
/// bound `L_g |||x|||_{β,[a−r,b]}`.
pub fn composition_holder(
    coeffs: &CoefficientSet,
    path: &GridPath,
    beta: f64,
    r: f64,
    window: (f64, f64),
) -> Result<(NormReport, f64)> {
    let gx = compose_diffusion(coeffs, path, r, window)?;
    let (lo, _) = path.window(window.0, window.1)?;
    let mut rep = crate::path::holder_seminorm(&gx, beta, gx.full_window())?;
    if let Witness::Pair { s, t } = rep.witness {
        rep.witness = Witness::Pair { s: s + lo, t: t + lo };
    }
    let xs = crate::path::holder_seminorm(path, beta, (window.0 - r, window.1))?.seminorm;
    Ok((rep, coeffs.lip_g * xs))
}

/// Both sides of the difference estimate
/// `|||g(x_·) − g(y_·)|||_{δβ,[a,b]} ≤ L_g (b−a)^{β−δβ} |||x−y|||_{β,[a−r,b]} + L_M M^δ ‖x−y‖_{∞,[a−r,b]}`
/// with `M = max(‖x‖_{∞,β,[a−r,b]}, ‖y‖_{∞,β,[a−r,b]})`.
pub fn composition_difference(
    coeffs: &CoefficientSet,
    x: &GridPath,
    y: &GridPath,
    beta: f64,
    r: f64,
    window: (f64, f64),
) -> Result<(f64, f64)> {
    x.check_same_grid(y)?;
    let gx = compose_diffusion(coeffs, x, r, window)?;
    let gy = compose_diffusion(coeffs, y, r, window)?;
    let dg = gx.sub(&gy)?;
    let db = coeffs.delta * beta;
    let (ld, hd) = (0, dg.len() - 1);
    let lhs = holder_scan(dg.values(), dg.dim(), dg.mesh(), db, ld, hd).0;
    let wide = (window.0 - r, window.1);
    let z = x.sub(y)?;
    let (lo, hi) = x.window(wide.0, wide.1)?;
    let zs = holder_scan(z.values(), z.dim(), z.mesh(), beta, lo, hi).0;
    let zsup = sup_scan(z.values(), z.dim(), lo, hi);
    let nx = crate::path::holder_norm(x, beta, wide)?;
    let ny = crate::path::holder_norm(y, beta, wide)?;
    let m = nx.max(ny);
    let len = window.1 - window.0;
    let rhs = coeffs.lip_g * len.powf(beta - db) * zs + coeffs.l_m(m) * m.powf(coeffs.delta) * zsup;
    Ok((lhs, rhs))
}
