use std::time::{Duration, Instant};

use serde::Serialize;

use super::engine::{apply_map, explicit_pass, solve_windows, EngineParams, Init, StepMap};
pub use super::engine::WindowRecord;
use super::{greedy_partition_with, ContractionConstants, GreedyPartition, SolverConfig};
use crate::coefficients::CoefficientSet;
use crate::error::{config, domain, Result};
use crate::path::{holder_norm, GridPath, Segment, SegmentView};

/// `f(x_t)·h + g(x_t)·Δω` on one cell.
pub(crate) struct Nonlinear<'a>(pub &'a CoefficientSet);

impl StepMap for Nonlinear<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn increment(&self, _g: usize, seg: SegmentView<'_>, dw: f64, h: f64, out: &mut [f64], scratch: &mut [f64]) {
        let f = &self.0.functionals;
        f.drift(seg, out);
        f.diffusion(seg, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o = *o * h + *s * dw;
        }
    }
}

/// Initial iterate on each window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Initializer {
    /// `x(t) ≡ x(t_i)` beyond `t_i`.
    ConstantExtension,
    /// Continues the last history slope.
    LinearExtension,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthSummary {
    pub holds: bool,
    pub min_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: GridPath,
    pub partition: GreedyPartition,
    pub constants: ContractionConstants,
    pub windows: Vec<WindowRecord>,
    pub warnings: Vec<String>,
    pub growth: Option<GrowthSummary>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SolveReport {
    pub fn total_iterations(&self) -> usize {
        self.windows.iter().map(|w| w.iterations).sum()
    }

    pub fn max_fixed_point_residual(&self) -> f64 {
        self.windows.iter().map(|w| w.fixed_point_residual).fold(0.0, f64::max)
    }

    pub fn ball_ok(&self) -> bool {
        self.windows.iter().all(|w| w.ball_ok)
    }
}

pub(crate) fn params(cfg: &SolverConfig, beta: f64, ball_mu: Option<f64>) -> EngineParams {
    EngineParams {
        beta,
        tol: cfg.picard_tol,
        max_iters: cfg.picard_max_iters,
        ball_mu,
        lag: cfg.delay_cells(),
        delay: cfg.delay,
        mesh: cfg.mesh,
    }
}

fn prepare(coeffs: &CoefficientSet, eta: &Segment, omega: &GridPath, cfg: &SolverConfig) -> Result<(ContractionConstants, GreedyPartition)> {
    cfg.validate_for(coeffs)?;
    cfg.check_inputs(coeffs, eta, omega)?;
    let k = ContractionConstants::evaluate(coeffs, cfg.beta, cfg.nu)?;
    if k.c > 0.0 && !(cfg.mu < k.c) {
        return Err(config(format!("mu = {} must be below C = {}", cfg.mu, k.c)));
    }
    let p = greedy_partition_with(omega, cfg.beta, cfg.nu, cfg.mu, k.c, cfg.steps())?;
    Ok((k, p))
}

/// Windowed Picard solve from the constant extension.
pub fn picard_solve(coeffs: &CoefficientSet, eta: &Segment, omega: &GridPath, cfg: &SolverConfig) -> Result<SolveReport> {
    picard_solve_with(coeffs, eta, omega, cfg, Initializer::ConstantExtension)
}

pub fn picard_solve_with(
    coeffs: &CoefficientSet,
    eta: &Segment,
    omega: &GridPath,
    cfg: &SolverConfig,
    init: Initializer,
) -> Result<SolveReport> {
    let init = match init {
        Initializer::ConstantExtension => Init::Constant,
        Initializer::LinearExtension => Init::Linear,
    };
    solve_inner(coeffs, eta, omega, cfg, init)
}

fn solve_inner(coeffs: &CoefficientSet, eta: &Segment, omega: &GridPath, cfg: &SolverConfig, init: Init<'_>) -> Result<SolveReport> {
    let clock = Instant::now();
    let (constants, partition) = prepare(coeffs, eta, omega, cfg)?;
    let p = params(cfg, cfg.beta, Some(cfg.mu));
    let out = solve_windows(&Nonlinear(coeffs), eta.values(), omega.values(), &partition.nodes, &p, init)?;
    let solution = GridPath::new(-cfg.delay, cfg.mesh, coeffs.dim(), out.values)?;
    let mut report = SolveReport {
        solution,
        partition,
        constants,
        windows: out.records,
        warnings: out.warnings,
        growth: None,
        wall_time: Duration::ZERO,
    };
    let g = super::growth_bound_check(&report, eta)?;
    report.growth = Some(GrowthSummary { holds: g.holds, min_margin: g.min_margin });
    report.wall_time = clock.elapsed();
    Ok(report)
}

/// The explicit scheme `x_{k+1} = x_k + f(x_{t_k})h + g(x_{t_k})Δω_k` on
/// `[−r, T]`.
pub fn euler_solve(coeffs: &CoefficientSet, eta: &Segment, omega: &GridPath, cfg: &SolverConfig) -> Result<GridPath> {
    cfg.validate()?;
    cfg.check_inputs(coeffs, eta, omega)?;
    let p = params(cfg, cfg.beta, None);
    let v = explicit_pass(&Nonlinear(coeffs), eta.values(), omega.values(), cfg.steps(), &p);
    GridPath::new(-cfg.delay, cfg.mesh, coeffs.dim(), v)
}

/// `F(x)` on `[t_i − r, t_{i+1}]`: unchanged on the history, and
/// `x(t_i) + Σ f(x_s)h + Σ g(x_s)Δω` on the window.
pub fn map_f(x: &GridPath, coeffs: &CoefficientSet, omega: &GridPath, window: (f64, f64), history: &Segment) -> Result<GridPath> {
    let (a, b) = window;
    let h = x.mesh();
    let tol = 1e-9 * h;
    if x.dim() != coeffs.dim() || history.dim() != coeffs.dim() {
        return Err(domain("dimension mismatch between iterate, history and coefficients"));
    }
    if (history.mesh() - h).abs() > tol || (omega.mesh() - h).abs() > tol {
        return Err(domain("iterate, history and driver must share the mesh"));
    }
    let r = history.delay();
    if (x.t0() - (a - r)).abs() > tol || (x.t_end() - b).abs() > tol {
        return Err(domain("iterate must cover exactly [t_i - r, t_{i+1}]"));
    }
    let lag = history.lag();
    if x.values()[..(lag + 1) * x.dim()] != *history.values() {
        return Err(domain("iterate disagrees with the history on [t_i - r, t_i]"));
    }
    let (lo, hi) = omega.window(a, b)?;
    let dw: Vec<f64> = (lo..hi).map(|k| omega.node(k + 1)[0] - omega.node(k)[0]).collect();
    let p = EngineParams { beta: 1.0, tol: 0.0, max_iters: 1, ball_mu: None, lag, delay: r, mesh: h };
    let mut out = vec![0.0; x.values().len()];
    apply_map(&Nonlinear(coeffs), x.values(), &mut out, lo, &p, &dw);
    GridPath::new(x.t0(), h, x.dim(), out)
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub inits: Vec<String>,
    /// Largest pairwise `‖x^a − x^b‖_{∞,β,[−r,T]}`.
    pub max_distance: f64,
    pub tolerance: f64,
    pub agree: bool,
}

/// Reruns Picard from `n_inits` different initial iterates: the constant
/// extension, the linear extension, then the explicit solution plus
/// perturbations of growing size.
pub fn uniqueness_probe(
    coeffs: &CoefficientSet,
    eta: &Segment,
    omega: &GridPath,
    cfg: &SolverConfig,
    n_inits: usize,
) -> Result<UniquenessReport> {
    if n_inits == 0 {
        return Err(domain("uniqueness probe needs at least one initialization"));
    }
    let mut names = Vec::new();
    let mut sols: Vec<GridPath> = Vec::new();
    let euler = euler_solve(coeffs, eta, omega, cfg)?;
    let d = coeffs.dim();
    let lag = cfg.delay_cells();
    for i in 0..n_inits {
        let sol = match i {
            0 => {
                names.push("constant_extension".to_string());
                solve_inner(coeffs, eta, omega, cfg, Init::Constant)?.solution
            }
            1 => {
                names.push("linear_extension".to_string());
                solve_inner(coeffs, eta, omega, cfg, Init::Linear)?.solution
            }
            _ => {
                let amp = 1e-3 * 10f64.powi(i as i32 - 2);
                names.push(format!("perturbed_oracle({amp:e})"));
                let mut guess = euler.values().to_vec();
                for (k, v) in guess.iter_mut().enumerate().skip((lag + 1) * d) {
                    let t = (k / d) as f64 * cfg.mesh;
                    *v += amp * (7.0 * t + (k % d) as f64).sin();
                }
                solve_inner(coeffs, eta, omega, cfg, Init::Guess(&guess))?.solution
            }
        };
        sols.push(sol);
    }
    let mut max_distance = 0.0_f64;
    for i in 0..sols.len() {
        for j in i + 1..sols.len() {
            let diff = sols[i].sub(&sols[j])?;
            let w = diff.full_window();
            max_distance = max_distance.max(holder_norm(&diff, cfg.beta, w)?);
        }
    }
    let tolerance = 10.0 * cfg.picard_tol;
    Ok(UniquenessReport { inits: names, max_distance, tolerance, agree: max_distance <= tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{make_builtin, CoefficientSpec};
    use crate::driver::{generate, DriverKind, DriverSpec};

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn sine(c: &SolverConfig) -> GridPath {
        generate(&DriverSpec::new(DriverKind::Sine { amplitude: 0.5, frequency: 1.0 }, c.horizon, c.mesh)).unwrap()
    }

    #[test]
    fn decay_matches_exponential() {
        let c = cfg();
        let coeffs = make_builtin(&CoefficientSpec::scalar_linear(-1.0, 0.0, 0.0, 0.0)).unwrap();
        let eta = Segment::constant(c.delay, c.mesh, &[1.0]).unwrap();
        let omega = generate(&DriverSpec::new(DriverKind::Zero, c.horizon, c.mesh)).unwrap();
        let rep = picard_solve(&coeffs, &eta, &omega, &c).unwrap();
        let lag = c.delay_cells();
        let err = (0..=c.steps())
            .map(|k| (rep.solution.node(lag + k)[0] - (-(k as f64) * c.mesh).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-3, "{err}");
        assert!(rep.max_fixed_point_residual() <= c.picard_tol);
        assert!(rep.growth.as_ref().unwrap().holds);
    }

    #[test]
    fn additive_noise_telescopes() {
        let c = cfg();
        let coeffs = make_builtin(&CoefficientSpec::scalar_linear(0.0, 0.0, 0.0, 0.3)).unwrap();
        let eta = Segment::constant(c.delay, c.mesh, &[1.0]).unwrap();
        let omega = sine(&c);
        let rep = picard_solve(&coeffs, &eta, &omega, &c).unwrap();
        let lag = c.delay_cells();
        for k in 0..=c.steps() {
            let want = 1.0 + 0.3 * (omega.node(k)[0] - omega.node(0)[0]);
            assert!((rep.solution.node(lag + k)[0] - want).abs() <= 1e-12);
        }
        assert_eq!(rep.solution, euler_solve(&coeffs, &eta, &omega, &c).unwrap());
    }

    #[test]
    fn zero_coefficients_freeze_the_state() {
        let c = cfg();
        let coeffs = make_builtin(&CoefficientSpec::zero(1)).unwrap();
        let eta = Segment::from_fn(c.delay, c.mesh, 1, |u| vec![1.0 + u.sin()]).unwrap();
        let rep = picard_solve(&coeffs, &eta, &sine(&c), &c).unwrap();
        assert_eq!(rep.partition.windows(), 1);
        let lag = c.delay_cells();
        assert_eq!(&rep.solution.values()[..=lag], eta.values());
        assert!(rep.solution.values()[lag..].iter().all(|&v| v == eta.values()[lag]));
        let u = uniqueness_probe(&coeffs, &eta, &sine(&c), &c, 3).unwrap();
        assert_eq!(u.max_distance, 0.0);
    }

    #[test]
    fn picard_equals_euler_on_nonlinear_problem() {
        let c = cfg();
        let coeffs = make_builtin(&CoefficientSpec::SinDelay { a: Some(vec![vec![-0.3]]), b: None, sigma: 0.05, dim: None }).unwrap();
        let eta = Segment::constant(c.delay, c.mesh, &[1.0]).unwrap();
        let omega = sine(&c);
        let rep = picard_solve(&coeffs, &eta, &omega, &c).unwrap();
        let e = euler_solve(&coeffs, &eta, &omega, &c).unwrap();
        assert!(rep.solution.max_distance(&e).unwrap() <= 10.0 * c.picard_tol);
        assert!(rep.ball_ok(), "{:?}", rep.warnings);
        let u = uniqueness_probe(&coeffs, &eta, &omega, &c, 3).unwrap();
        assert!(u.agree, "{u:?}");
    }

    #[test]
    fn map_f_with_constant_drift() {
        let c = SolverConfig { mesh: 1.0 / 64.0, ..cfg() };
        let coeffs = make_builtin(&CoefficientSpec::scalar_linear(0.0, 0.0, 0.0, 0.0)).unwrap();
        let omega = sine(&c);
        let hist = Segment::constant(c.delay, c.mesh, &[2.0]).unwrap();
        let lag = hist.lag();
        let mut v = hist.values().to_vec();
        v.extend((0..8).map(|k| k as f64));
        let x = GridPath::scalar(0.5 - c.delay, c.mesh, v).unwrap();
        let fx = map_f(&x, &coeffs, &omega, (0.5, 0.625), &hist).unwrap();
        assert!(fx.values()[lag..].iter().all(|&v| v == 2.0));
        let bad = GridPath::scalar(0.5 - c.delay, c.mesh, vec![0.0; lag + 9]).unwrap();
        assert!(map_f(&bad, &coeffs, &omega, (0.5, 0.625), &hist).is_err());
    }
}
