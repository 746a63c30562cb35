//! Dependence of the solution on the initial segment: the linearized
//! equation, a continuity estimate and a finite-difference derivative check.

use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::CoefficientSet;
use crate::error::{domain, Result};
use crate::path::{holder_norm, segment_norms, GridPath, Segment, SegmentView};
use crate::solver::engine::{solve_windows, EngineParams, Init, StepMap};
use crate::solver::{
    euler_solve, greedy_partition_with, picard_solve, window_factor, ContractionConstants, GreedyPartition,
    SolverConfig, WindowRecord,
};

/// Data of `y(t) = ξ(0) + ∫ Df(x_s)y_s ds + ∫ Dg(x_s)y_s dω(s)`.
#[derive(Debug, Clone)]
pub struct LinearizedProblem {
    pub coefficients: CoefficientSet,
    /// The fixed solution `x(·, ω, η)` on `[−r, T]`.
    pub base_solution: GridPath,
    /// `ξ = η¹ − η`.
    pub direction: Segment,
    pub omega: GridPath,
    pub config: SolverConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearizedSolution {
    #[serde(skip)]
    pub y: GridPath,
    pub partition: GreedyPartition,
    /// `2(L_f + L_g(1 + K′) + K′ L_M(M) M^δ)`.
    pub c_lin: f64,
    pub mu_lin: f64,
    pub windows: Vec<WindowRecord>,
    pub warnings: Vec<String>,
}

struct Linearized<'a> {
    coeffs: &'a CoefficientSet,
    base: &'a [f64],
    lag: usize,
    delay: f64,
    mesh: f64,
}

impl StepMap for Linearized<'_> {
    fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    fn increment(&self, g: usize, y: SegmentView<'_>, dw: f64, h: f64, out: &mut [f64], scratch: &mut [f64]) {
        let d = self.dim();
        let x = SegmentView::from_raw(self.delay, self.mesh, d, &self.base[(g - self.lag) * d..(g + 1) * d]);
        let f = &self.coeffs.functionals;
        f.drift_derivative(x, y, out);
        f.diffusion_derivative(x, y, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o = *o * h + *s * dw;
        }
    }
}

/// Solves the linearized equation window by window, contracting in the
/// `δβ`-Hölder norm.
pub fn linearized_solve(problem: &LinearizedProblem) -> Result<GridPath> {
    Ok(linearized_solve_detailed(problem)?.y)
}

pub fn linearized_solve_detailed(problem: &LinearizedProblem) -> Result<LinearizedSolution> {
    let LinearizedProblem { coefficients: coeffs, base_solution: base, direction, omega, config: cfg } = problem;
    cfg.validate_for(coeffs)?;
    cfg.check_inputs(coeffs, direction, omega)?;
    let lag = cfg.delay_cells();
    let steps = cfg.steps();
    let tol = 1e-9 * cfg.mesh;
    if base.dim() != coeffs.dim()
        || (base.mesh() - cfg.mesh).abs() > tol
        || (base.t0() + cfg.delay).abs() > tol
        || base.len() < lag + steps + 1
    {
        return Err(domain("base solution must cover [-r, T] on the solver grid"));
    }
    let k = ContractionConstants::evaluate(coeffs, cfg.beta, cfg.nu)?;
    let kp = k.young.k_prime()?;
    let m = holder_norm(base, cfg.beta, (-cfg.delay, cfg.horizon))?;
    let lm = coeffs.l_m(m);
    let local = if lm == 0.0 { 0.0 } else { kp * lm * m.powf(coeffs.delta) };
    let c_lin = 2.0 * (coeffs.lip_f + coeffs.lip_g * (1.0 + kp) + local);
    let mu_lin = if c_lin > 0.0 { cfg.mu.min(c_lin / 2.0) } else { cfg.mu };
    let beta_lin = coeffs.delta * cfg.beta;
    let partition = greedy_partition_with(omega, beta_lin, cfg.nu, mu_lin, c_lin, steps)?;
    let p = EngineParams {
        beta: beta_lin,
        tol: cfg.picard_tol,
        max_iters: cfg.picard_max_iters,
        ball_mu: None,
        lag,
        delay: cfg.delay,
        mesh: cfg.mesh,
    };
    let map = Linearized { coeffs, base: base.values(), lag, delay: cfg.delay, mesh: cfg.mesh };
    let out = solve_windows(&map, direction.values(), omega.values(), &partition.nodes, &p, Init::Constant)?;
    Ok(LinearizedSolution {
        y: GridPath::new(-cfg.delay, cfg.mesh, coeffs.dim(), out.values)?,
        partition,
        c_lin,
        mu_lin,
        windows: out.records,
        warnings: out.warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityRow {
    pub t: f64,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    /// `‖η² − η¹‖_{∞,β}`.
    pub perturbation: f64,
    pub m: f64,
    /// `L(T, M)`.
    pub c: f64,
    pub mu: f64,
    pub stopping_times: usize,
    #[serde(skip)]
    pub rows: Vec<ContinuityRow>,
    pub min_margin: f64,
    pub pointwise_holds: bool,
    /// `‖x(η²) − x(η¹)‖_{∞,β,[−r,T]}`.
    pub full_lhs: f64,
    /// `(1 + T/r) sup_t ‖x_t(η²) − x_t(η¹)‖_{∞,β}`.
    pub segment_sup_bound: f64,
    /// `(1 + T/r) e^{−[N(T)+1] log(1−2μ)} ‖η² − η¹‖_{∞,β}`.
    pub full_rhs: f64,
    pub full_holds: bool,
    pub holds: bool,
}

const REL_TOL: f64 = 1e-9;

/// Solves from `η¹` and `η²` and checks
/// `‖x_t(η²) − x_t(η¹)‖_{∞,β} ≤ e^{−[N(t)+1] log(1−2μ)} ‖η² − η¹‖_{∞,β}`
/// with `N` from the greedy partition at `C = L(T, M)`, plus the
/// full-interval form with `C(T, r) = 1 + T/r`.
pub fn continuity_check(
    coeffs: &CoefficientSet,
    eta1: &Segment,
    eta2: &Segment,
    omega: &GridPath,
    cfg: &SolverConfig,
) -> Result<ContinuityReport> {
    let diff0 = eta2.combine(1.0, eta1, -1.0)?;
    let perturbation = diff0.holder_norm(cfg.beta);
    if perturbation > 1.0 {
        return Err(domain(format!("initial segments must be within 1 in the (inf, beta) norm, got {perturbation}")));
    }
    let s1 = picard_solve(coeffs, eta1, omega, cfg)?.solution;
    let s2 = picard_solve(coeffs, eta2, omega, cfg)?.solution;
    let full = (-cfg.delay, cfg.horizon);
    let m = holder_norm(&s1, cfg.beta, full)?.max(holder_norm(&s2, cfg.beta, full)?);
    let k = ContractionConstants::evaluate(coeffs, cfg.beta, cfg.nu)?;
    let c = k.l(cfg.horizon, m);
    let mu = if c > 0.0 { cfg.mu.min(c / 2.0) } else { cfg.mu };
    let part = greedy_partition_with(omega, cfg.beta, cfg.nu, mu, c, cfg.steps())?;
    let z = s2.sub(&s1)?;
    let norms = segment_norms(&z, cfg.beta, cfg.delay)?;
    let h = cfg.mesh;
    let rows: Vec<ContinuityRow> = norms
        .iter()
        .enumerate()
        .map(|(i, &lhs)| {
            let t = i as f64 * h;
            let n = part.stopping_count(t);
            ContinuityRow { t, n, lhs, rhs: window_factor(2.0 * mu, n) * perturbation }
        })
        .collect();
    let min_margin = rows.iter().map(|r| r.rhs - r.lhs).fold(f64::INFINITY, f64::min);
    let pointwise_holds = rows.iter().all(|r| r.lhs <= r.rhs * (1.0 + REL_TOL));
    let full_lhs = holder_norm(&z, cfg.beta, full)?;
    let c_tr = 1.0 + cfg.horizon / cfg.delay;
    let segment_sup_bound = c_tr * norms.iter().copied().fold(0.0, f64::max);
    let full_rhs = c_tr * window_factor(2.0 * mu, part.count()) * perturbation;
    let full_holds = full_lhs <= segment_sup_bound * (1.0 + REL_TOL) && full_lhs <= full_rhs * (1.0 + REL_TOL);
    Ok(ContinuityReport {
        perturbation,
        m,
        c,
        mu,
        stopping_times: part.count(),
        rows,
        min_margin,
        pointwise_holds,
        full_lhs,
        segment_sup_bound,
        full_rhs,
        full_holds,
        holds: pointwise_holds && full_holds,
    })
}

pub const DEFAULT_EPS_LADDER: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Floor below which ρ counts as zero; affine families raise it to ten times
/// the quadrature error.
pub const RHO_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct RhoRow {
    pub eps: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DifferentiabilityReport {
    pub rows: Vec<RhoRow>,
    pub decreasing: bool,
    /// `ρ(ε_last) / ρ(ε_first)`; `None` when `ρ(ε_first) = 0`.
    pub ratio: Option<f64>,
    /// Values of ρ at or below this count as exact.
    pub floor: f64,
    /// Discretization error of the base solve, from halving the mesh.
    pub quadrature_error: Option<f64>,
    pub passes: bool,
}

/// Piecewise-linear refinement of a driver by `factor`.
fn refine_driver(omega: &GridPath, factor: usize) -> Result<GridPath> {
    let w = omega.values();
    let mut v = Vec::with_capacity((w.len() - 1) * factor + 1);
    for k in 0..w.len() - 1 {
        for j in 0..factor {
            v.push(w[k] + (w[k + 1] - w[k]) * j as f64 / factor as f64);
        }
    }
    v.push(w[w.len() - 1]);
    GridPath::scalar(omega.t0(), omega.mesh() / factor as f64, v)
}

/// `sup_t ‖x^h_t − x^{h/2}_t‖_{∞,β}` over the coarse grid, with the finer
/// solve driven by the piecewise-linear refinement of `ω`.
pub fn quadrature_error(coeffs: &CoefficientSet, eta: &Segment, omega: &GridPath, cfg: &SolverConfig) -> Result<f64> {
    let coarse = euler_solve(coeffs, eta, omega, cfg)?;
    let fine_cfg = SolverConfig { mesh: cfg.mesh / 2.0, ..cfg.clone() };
    let eta_fine = Segment::from_fn(cfg.delay, fine_cfg.mesh, eta.dim(), |u| {
        // Linear interpolation of η between its coarse nodes.
        let x = (u + cfg.delay) / cfg.mesh;
        let k = (x.floor() as usize).min(eta.lag());
        let th = x - k as f64;
        let a = &eta.values()[k * eta.dim()..(k + 1) * eta.dim()];
        if th == 0.0 {
            return a.to_vec();
        }
        let b = &eta.values()[(k + 1) * eta.dim()..(k + 2) * eta.dim()];
        a.iter().zip(b).map(|(p, q)| p + th * (q - p)).collect()
    })?;
    let fine = euler_solve(coeffs, &eta_fine, &refine_driver(omega, 2)?, &fine_cfg)?.subsample(2)?;
    let norms = segment_norms(&fine.sub(&coarse)?, cfg.beta, cfg.delay)?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// `ρ(ε) = sup_t ‖x_t(η+εξ) − x_t(η) − ε y_t‖_{∞,β} / ε` over the ladder.
pub fn differentiability_check(
    coeffs: &CoefficientSet,
    eta: &Segment,
    direction: &Segment,
    omega: &GridPath,
    cfg: &SolverConfig,
    eps_ladder: &[f64],
) -> Result<DifferentiabilityReport> {
    if eps_ladder.is_empty() || eps_ladder.windows(2).any(|w| !(w[1] < w[0])) || eps_ladder.iter().any(|&e| !(e > 0.0)) {
        return Err(domain("eps ladder must be positive and strictly decreasing"));
    }
    let base = picard_solve(coeffs, eta, omega, cfg)?.solution;
    let problem = LinearizedProblem {
        coefficients: coeffs.clone(),
        base_solution: base.clone(),
        direction: direction.clone(),
        omega: omega.clone(),
        config: cfg.clone(),
    };
    let y = linearized_solve(&problem)?;
    let rows = eps_ladder
        .par_iter()
        .map(|&eps| -> Result<RhoRow> {
            let pert = eta.combine(1.0, direction, eps)?;
            let x = picard_solve(coeffs, &pert, omega, cfg)?.solution;
            let rem = x.sub(&base)?.combine(1.0, &y, -eps)?;
            let sup = segment_norms(&rem, cfg.beta, cfg.delay)?.into_iter().fold(0.0, f64::max);
            Ok(RhoRow { eps, rho: sup / eps })
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = rows.windows(2).all(|w| w[1].rho <= w[0].rho * (1.0 + REL_TOL));
    let first = rows[0].rho;
    let ratio = (first > 0.0).then(|| rows[rows.len() - 1].rho / first);
    let quad = if coeffs.affine { Some(quadrature_error(coeffs, eta, omega, cfg)?) } else { None };
    let floor = quad.map_or(RHO_FLOOR, |q| (10.0 * q).max(RHO_FLOOR));
    let max_rho = rows.iter().map(|r| r.rho).fold(0.0, f64::max);
    let passes = (decreasing && ratio.is_some_and(|r| r <= 0.5)) || max_rho <= floor;
    Ok(DifferentiabilityReport { rows, decreasing, ratio, floor, quadrature_error: quad, passes })
}
