//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::driver::RNG_ALGORITHM;
use crate::emit::{write_json, write_table, Cell, Format, Table};
use crate::error::{config, Error, Result};
use crate::path::{counterexample_growth, holder_seminorm, write_csv, GridPath, Segment};
use crate::scenario::{Built, Check, Scenario};
use crate::sensitivity::{continuity_check, differentiability_check, DEFAULT_EPS_LADDER};
use crate::solver::{greedy_partition_with, nt_bound, picard_solve, ContractionConstants};
use crate::verify::{run_builtin_suite, run_suite, SuiteOptions};

#[derive(Debug, Parser)]
#[command(name = "ydde", version, about = "Pathwise solver for Young differential delay equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario JSON file.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario, used when no file is given.
    #[arg(long, global = true, default_value = "sin")]
    pub builtin: String,
    /// Overrides the driver seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the mesh; accepts `0.001` or `1/1024`.
    #[arg(long, global = true, value_parser = parse_mesh)]
    pub mesh: Option<f64>,
    #[arg(long, global = true, env = "YDDE_OUT", default_value = "ydde-out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Print errors as JSON on stderr.
    #[arg(long, global = true)]
    pub error_json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the scenario and write the solution, partition and diagnostics.
    Solve,
    /// Greedy stopping times and the count bound.
    Partition {
        /// Use this contraction constant instead of the scenario's C.
        #[arg(long)]
        c_const: Option<f64>,
    },
    /// Mesh-halving ladder against the scenario mesh.
    Converge {
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Continuity and differentiability in the initial segment.
    Sensitivity,
    /// Partition sums of x(t) = |t|^beta over an n-ladder.
    Counterexample {
        #[arg(long, default_value_t = 0.4)]
        beta: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![100usize, 1000, 10000])]
        n: Vec<usize>,
    },
    /// Run the property suite; exits 0 iff every check passes.
    Verify {
        /// Seeds per scenario in the seed sweeps.
        #[arg(long, default_value_t = 20)]
        seeds: usize,
    },
    /// Growth-bound margins over many seeds, in parallel.
    Ensemble {
        #[arg(long, default_value_t = 20)]
        seeds: usize,
    },
}

fn parse_mesh(s: &str) -> std::result::Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|e| format!("{e}"))?,
    };
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("mesh must be positive".into())
    }
}

/// Outcome of a subcommand: whether every check it ran passed.
type Outcome = Result<bool>;

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
}

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let c = &cli.common;
    let result = match &cli.command {
        Command::Solve => solve(c),
        Command::Partition { c_const } => partition(c, *c_const),
        Command::Converge { levels } => converge(c, *levels),
        Command::Sensitivity => sensitivity(c),
        Command::Counterexample { beta, p, n } => counterexample(c, *beta, *p, n),
        Command::Verify { seeds } => verify(c, *seeds),
        Command::Ensemble { seeds } => ensemble(c, *seeds),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            if c.error_json {
                let j = ErrorJson { error: e.kind(), message: e.to_string() };
                eprintln!("{}", serde_json::to_string(&j).expect("error serializes"));
            } else {
                eprintln!("error: {e}");
            }
            match e {
                Error::Config(_) | Error::Json(_) => 2,
                _ => 1,
            }
        }
    }
}

fn load(c: &Common) -> Result<Scenario> {
    let mut s = match &c.scenario {
        Some(p) => Scenario::load(p).map_err(|e| match e {
            Error::Io(io) => config(format!("cannot read {}: {io}", p.display())),
            other => other,
        })?,
        None => Scenario::builtin(&c.builtin)?,
    };
    if let Some(seed) = c.seed {
        s = s.with_seed(seed);
    }
    if let Some(h) = c.mesh {
        s = s.with_mesh(h)?;
    }
    Ok(s)
}

fn say(c: &Common, msg: impl AsRef<str>) {
    if !c.quiet {
        println!("{}", msg.as_ref());
    }
}

fn write_path(dir: &Path, stem: &str, path: &GridPath, format: Format) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    match format {
        Format::Csv => {
            let p = dir.join(format!("{stem}.csv"));
            let mut f = std::io::BufWriter::new(fs::File::create(&p)?);
            write_csv(path, &mut f)?;
            std::io::Write::flush(&mut f)?;
            Ok(p)
        }
        Format::Json => write_json(dir, stem, path),
    }
}

#[derive(Serialize)]
struct Meta<'a> {
    scenario: &'a str,
    seed: u64,
    rng: &'a str,
}

fn meta(s: &Scenario) -> Meta<'_> {
    Meta { scenario: &s.name, seed: s.driver.seed, rng: RNG_ALGORITHM }
}

fn solve(c: &Common) -> Outcome {
    let s = load(c)?;
    let b = s.build()?;
    let rep = picard_solve(&b.coefficients, &b.eta, &b.omega, &b.config)?;
    write_path(&c.out, "solution", &rep.solution, c.format)?;
    write_table(&c.out, "partition", &partition_table(&rep.partition), c.format)?;
    #[derive(Serialize)]
    struct Diag<'a> {
        meta: Meta<'a>,
        report: &'a crate::solver::SolveReport,
    }
    write_json(&c.out, "diagnostics", &Diag { meta: meta(&s), report: &rep })?;
    let growth = rep.growth.as_ref().expect("growth computed");
    say(
        c,
        format!(
            "{}: {} windows, N(T) = {}, {} Picard iterations, max fixed-point residual {:.3e}, growth bound {} (min margin {:.4e})",
            s.name,
            rep.partition.windows(),
            rep.partition.count(),
            rep.total_iterations(),
            rep.max_fixed_point_residual(),
            if growth.holds { "holds" } else { "VIOLATED" },
            growth.min_margin
        ),
    );
    for w in &rep.warnings {
        say(c, format!("warning: {w}"));
    }
    Ok(growth.holds && rep.max_fixed_point_residual() <= b.config.picard_tol)
}

fn partition_table(p: &crate::solver::GreedyPartition) -> Table {
    let mut t = Table::new(["i", "t_i", "residual", "next_residual"]);
    for (i, &ti) in p.times.iter().enumerate() {
        let (r, n) = if i == 0 {
            (Cell::Text(String::new()), Cell::Text(String::new()))
        } else {
            (p.residuals[i - 1].into(), p.next_residuals[i - 1].map_or(Cell::Text(String::new()), Cell::Num))
        };
        t.push(vec![i.into(), ti.into(), r, n]);
    }
    t
}

fn partition(c: &Common, c_const: Option<f64>) -> Outcome {
    let s = load(c)?;
    let b = s.build()?;
    let cfg = &b.config;
    let cc = match c_const {
        Some(v) => v,
        None => ContractionConstants::evaluate(&b.coefficients, cfg.beta, cfg.nu)?.c,
    };
    let p = greedy_partition_with(&b.omega, cfg.beta, cfg.nu, cfg.mu, cc, cfg.steps())?;
    let sem = holder_seminorm(&b.omega, cfg.nu, (0.0, cfg.horizon))?.seminorm;
    let bound = if cc > 0.0 { nt_bound(cc, cfg.mu, cfg.beta, cfg.nu, cfg.horizon, sem) } else { 0.0 };
    write_table(&c.out, "partition", &partition_table(&p), c.format)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        meta: Meta<'a>,
        c: f64,
        mu: f64,
        threshold: f64,
        windows: usize,
        n: usize,
        nt_bound: f64,
        margin: f64,
        residuals_consistent: bool,
    }
    let n = p.count();
    let ok = p.residuals_consistent() && (n as f64) <= bound.max(0.0) || (cc == 0.0 && n == 0);
    write_json(
        &c.out,
        "partition_summary",
        &Summary {
            meta: meta(&s),
            c: cc,
            mu: cfg.mu,
            threshold: p.threshold,
            windows: p.windows(),
            n,
            nt_bound: bound,
            margin: bound - n as f64,
            residuals_consistent: p.residuals_consistent(),
        },
    )?;
    say(c, format!("C = {cc}, mu = {}, N(T) = {n}, bound {bound:.6e}", cfg.mu));
    Ok(ok)
}

fn converge(c: &Common, levels: u32) -> Outcome {
    let s = load(c)?;
    let fine = s.build()?;
    let h = fine.config.mesh;
    let reference = picard_solve(&fine.coefficients, &fine.eta, &fine.omega, &fine.config)?.solution;
    let mut t = Table::new(["mesh", "max_distance_to_finest", "observed_order"]);
    let mut prev: Option<f64> = None;
    for k in (1..=levels).rev() {
        let stride = 1usize << k;
        let coarse = coarsen(&s, &fine, stride)?;
        let sol = picard_solve(&coarse.coefficients, &coarse.eta, &coarse.omega, &coarse.config)?.solution;
        let dist = sol.max_distance(&reference.subsample(stride)?)?;
        let order = prev.map_or(Cell::Text(String::new()), |p| Cell::Num((p / dist).log2()));
        t.push(vec![(h * stride as f64).into(), dist.into(), order]);
        say(c, format!("mesh {:.6e}: distance {dist:.3e}", h * stride as f64));
        prev = Some(dist);
    }
    write_table(&c.out, "converge", &t, c.format)?;
    Ok(true)
}

/// The scenario on a mesh `stride` times coarser, driven by the subsampled
/// fine driver.
fn coarsen(s: &Scenario, fine: &Built, stride: usize) -> Result<Built> {
    let cfg = crate::solver::SolverConfig { mesh: fine.config.mesh * stride as f64, ..fine.config.clone() };
    cfg.validate_for(&fine.coefficients)?;
    let eta = s.eta.build(cfg.delay, cfg.mesh, fine.coefficients.dim())?;
    Ok(Built { coefficients: fine.coefficients.clone(), eta, omega: fine.omega.subsample(stride)?, config: cfg })
}

fn sensitivity(c: &Common) -> Outcome {
    let s = load(c)?;
    let b = s.build()?;
    let cfg = &b.config;
    let d = b.coefficients.dim();
    let base = Segment::from_fn(cfg.delay, cfg.mesh, d, |u| vec![1.0 + 0.5 * (std::f64::consts::PI * u / cfg.delay).cos(); d])?;
    let unit = base.scale(1.0 / base.holder_norm(cfg.beta));
    let mut ct = Table::new(["size", "c", "mu", "stopping_times", "min_margin", "full_lhs", "full_rhs", "holds"]);
    let mut ok = true;
    let mut reports = Vec::new();
    for size in [1e-1, 1e-2] {
        let eta2 = b.eta.combine(1.0, &unit, size)?;
        let r = continuity_check(&b.coefficients, &b.eta, &eta2, &b.omega, cfg)?;
        ok &= r.holds;
        ct.push(vec![
            size.into(),
            r.c.into(),
            r.mu.into(),
            r.stopping_times.into(),
            r.min_margin.into(),
            r.full_lhs.into(),
            r.full_rhs.into(),
            r.holds.into(),
        ]);
        reports.push(r);
    }
    let dir = Segment::from_fn(cfg.delay, cfg.mesh, d, |u| vec![1.0 + u; d])?;
    let diff = differentiability_check(&b.coefficients, &b.eta, &dir, &b.omega, cfg, &DEFAULT_EPS_LADDER)?;
    ok &= diff.passes;
    let mut rt = Table::new(["eps", "rho"]);
    for r in &diff.rows {
        rt.push(vec![r.eps.into(), r.rho.into()]);
        say(c, format!("eps {:.0e}: rho {:.6e}", r.eps, r.rho));
    }
    write_table(&c.out, "continuity", &ct, c.format)?;
    write_table(&c.out, "rho", &rt, c.format)?;
    #[derive(Serialize)]
    struct Verdicts<'a> {
        meta: Meta<'a>,
        continuity: &'a [crate::sensitivity::ContinuityReport],
        differentiability: &'a crate::sensitivity::DifferentiabilityReport,
    }
    write_json(&c.out, "sensitivity", &Verdicts { meta: meta(&s), continuity: &reports, differentiability: &diff })?;
    say(c, format!("continuity {}, differentiability {}", pass(reports.iter().all(|r| r.holds)), pass(diff.passes)));
    Ok(ok)
}

fn pass(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn counterexample(c: &Common, beta: f64, p: f64, ns: &[usize]) -> Outcome {
    let mut t = Table::new(["n", "sum", "lower_bound"]);
    let mut ok = true;
    let mut prev = f64::NEG_INFINITY;
    for &n in ns {
        let v = counterexample_growth(beta, p, n)?;
        let bound = (n as f64).powf((1.0 - beta * p) / p);
        ok &= v >= bound * (1.0 - 1e-12) && v > prev;
        prev = v;
        t.push(vec![n.into(), v.into(), bound.into()]);
        say(c, format!("n = {n}: sum {v:.6}, lower bound {bound:.4}"));
    }
    write_table(&c.out, "counterexample", &t, c.format)?;
    Ok(ok)
}

fn verify(c: &Common, seeds: usize) -> Outcome {
    let opts = SuiteOptions { seed: c.seed.unwrap_or(0), seeds, ..Default::default() };
    let report = if c.scenario.is_some() {
        let mut s = load(c)?;
        if s.checks.is_empty() {
            s.checks = Check::ALL.to_vec();
        }
        run_suite(&[s], false, opts)
    } else {
        if c.mesh.is_some() {
            return Err(config("--mesh applies to scenario files; the built-in suite runs at its own meshes"));
        }
        run_builtin_suite(opts)?
    };
    write_table(&c.out, "verify", &report.outcome_table(), c.format)?;
    for (name, t) in &report.tables {
        write_table(&c.out, name, t, c.format)?;
    }
    write_json(&c.out, "verify_summary", &report)?;
    for o in &report.outcomes {
        say(c, format!("[{}] {:>2} {:<9} {:<26} {}", pass(o.passed), o.criterion, o.scenario, o.check, o.detail));
    }
    let n_fail = report.failures().count();
    say(c, format!("{} checks, {} failed", report.outcomes.len(), n_fail));
    Ok(report.passed())
}

fn ensemble(c: &Common, seeds: usize) -> Outcome {
    let s = load(c)?;
    let base = c.seed.unwrap_or(s.driver.seed);
    let rows: Vec<Result<(u64, usize, f64, bool)>> = (0..seeds as u64)
        .into_par_iter()
        .map(|k| {
            let sc = s.clone().with_seed(base.wrapping_add(k));
            let b = sc.build()?;
            let rep = picard_solve(&b.coefficients, &b.eta, &b.omega, &b.config)?;
            let g = rep.growth.expect("growth computed");
            Ok((sc.driver.seed, rep.partition.count(), g.min_margin, g.holds))
        })
        .collect();
    let mut t = Table::new(["seed", "stopping_times", "min_margin", "holds"]);
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for r in rows {
        let (seed, n, m, h) = r?;
        ok &= h;
        worst = worst.min(m);
        t.push(vec![Cell::Int(seed as i64), n.into(), m.into(), h.into()]);
    }
    write_table(&c.out, "ensemble", &t, c.format)?;
    say(c, format!("{seeds} seeds: growth bound {} everywhere, min margin {worst:.6e}", if ok { "holds" } else { "FAILS" }));
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_parser() {
        assert_eq!(parse_mesh("1/1024").unwrap(), 1.0 / 1024.0);
        assert_eq!(parse_mesh("0.5").unwrap(), 0.5);
        assert!(parse_mesh("-1").is_err());
    }

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from(["ydde", "partition", "--c-const", "8", "--mesh", "1/64"]).unwrap();
        assert!(matches!(cli.command, Command::Partition { c_const: Some(c) } if c == 8.0));
        assert_eq!(cli.common.mesh, Some(1.0 / 64.0));
    }
}
