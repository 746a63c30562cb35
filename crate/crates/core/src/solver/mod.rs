//! Windowed Picard solver for `dx = f(x_t) dt + g(x_t) dω` on `[0, T]` with
//! history `η` on `[−r, 0]`.

mod checks;
mod constants;
pub(crate) mod engine;
mod partition;
mod picard;

pub use checks::{
    gronwall_check, growth_bound_check, window_factor, GronwallOptions, GronwallReport, GrowthReport, GrowthRow,
    WindowMargin,
};
pub use constants::{compute_contraction_constants, ContractionConstants};
pub use partition::{greedy_partition, greedy_partition_with, nt_bound, GreedyPartition};
pub use picard::{
    euler_solve, map_f, picard_solve, picard_solve_with, uniqueness_probe, GrowthSummary, Initializer, SolveReport,
    UniquenessReport, WindowRecord,
};

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSet;
use crate::error::{config, Result};
use crate::path::{cells, GridPath, Segment};
use crate::young::young_constant;

fn default_beta() -> f64 {
    0.4
}
fn default_nu() -> f64 {
    0.7
}
fn default_mu() -> f64 {
    0.25
}
fn default_mesh() -> f64 {
    1.0 / 1024.0
}
fn default_horizon() -> f64 {
    1.0
}
fn default_delay() -> f64 {
    0.25
}
fn default_tol() -> f64 {
    1e-12
}
fn default_iters() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_mesh")]
    pub mesh: f64,
    #[serde(default = "default_horizon", alias = "T")]
    pub horizon: f64,
    #[serde(default = "default_delay", alias = "r")]
    pub delay: f64,
    /// Stop once successive iterates differ by at most this in `‖·‖_{∞,β}`.
    #[serde(default = "default_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_iters")]
    pub picard_max_iters: usize,
    /// Accuracy of stopping times; defaults to one mesh cell, the finest a
    /// grid partition can resolve.
    #[serde(default)]
    pub bisect_tol: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            beta: default_beta(),
            nu: default_nu(),
            mu: default_mu(),
            mesh: default_mesh(),
            horizon: default_horizon(),
            delay: default_delay(),
            picard_tol: default_tol(),
            picard_max_iters: default_iters(),
            bisect_tol: None,
        }
    }
}

impl SolverConfig {
    /// Checks the exponent, `μ` and grid invariants. `μ < 1/2` is required
    /// everywhere, so one configuration serves the solver and the
    /// Gronwall-type estimates alike.
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.5 && self.nu <= 1.0) {
            return Err(config(format!("nu must lie in (1/2, 1], got {}", self.nu)));
        }
        if !(self.beta > 0.0 && self.beta < self.nu) {
            return Err(config(format!("beta must lie in (0, nu), got {}", self.beta)));
        }
        young_constant(self.beta, self.nu).map_err(|e| config(e.to_string()))?;
        if !(self.mu > 0.0 && self.mu < 0.5) {
            return Err(config(format!("mu must lie in (0, 1/2), got {}", self.mu)));
        }
        if !(self.picard_tol > 0.0) || self.picard_max_iters == 0 {
            return Err(config("picard_tol must be positive and picard_max_iters nonzero"));
        }
        let r = cells(self.delay, self.mesh).map_err(|e| config(format!("delay: {e}")))?;
        let n = cells(self.horizon, self.mesh).map_err(|e| config(format!("horizon: {e}")))?;
        if r == 0 || n == 0 {
            return Err(config("delay and horizon must each span at least one mesh cell"));
        }
        if let Some(b) = self.bisect_tol {
            if !(b >= self.mesh) {
                return Err(config("bisect_tol cannot be finer than the mesh"));
            }
        }
        Ok(())
    }

    /// [`SolverConfig::validate`] plus `δβ + ν > 1` and `δ ∈ ((1−ν)/ν, 1]`.
    pub fn validate_for(&self, coeffs: &CoefficientSet) -> Result<()> {
        self.validate()?;
        coeffs.check_delta(self.nu)?;
        young_constant(coeffs.delta * self.beta, self.nu)
            .map_err(|_| config(format!("need delta*beta + nu > 1, got {}", coeffs.delta * self.beta + self.nu)))?;
        Ok(())
    }

    pub fn delay_cells(&self) -> usize {
        (self.delay / self.mesh).round() as usize
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.mesh).round() as usize
    }

    pub fn bisect_tol(&self) -> f64 {
        self.bisect_tol.unwrap_or(self.mesh)
    }

    /// Checks that `η` and `ω` live on this configuration's grid.
    pub(crate) fn check_inputs(&self, coeffs: &CoefficientSet, eta: &Segment, omega: &GridPath) -> Result<()> {
        if eta.dim() != coeffs.dim() {
            return Err(config(format!(
                "initial segment has dimension {}, coefficients {}",
                eta.dim(),
                coeffs.dim()
            )));
        }
        let tol = 1e-9 * self.mesh;
        if (eta.mesh() - self.mesh).abs() > tol || (eta.delay() - self.delay).abs() > tol {
            return Err(config("initial segment grid differs from the solver grid"));
        }
        if omega.dim() != 1 || (omega.mesh() - self.mesh).abs() > tol || omega.t0().abs() > tol {
            return Err(config("driver must be scalar on the solver grid starting at 0"));
        }
        if omega.len() < self.steps() + 1 {
            return Err(config("driver does not cover [0, T]"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn invariants_are_enforced() {
        let bad = [
            SolverConfig { nu: 0.5, ..Default::default() },
            SolverConfig { beta: 0.8, ..Default::default() },
            SolverConfig { beta: 0.2, ..Default::default() },
            SolverConfig { mu: 0.5, ..Default::default() },
            SolverConfig { delay: 0.3, mesh: 0.25, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn parses_short_names() {
        let c: SolverConfig = serde_json::from_str(r#"{"T": 2.0, "r": 0.5}"#).unwrap();
        assert_eq!((c.horizon, c.delay, c.mu), (2.0, 0.5, 0.25));
    }
}
