//! Scenario files: coefficients, driver, initial segment, solver settings
//! and the checks to run.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coefficients::{make_builtin, CoefficientSet, CoefficientSpec};
use crate::driver::{generate, DriverKind, DriverSpec};
use crate::error::{config, Result};
use crate::path::{GridPath, Segment};
use crate::solver::SolverConfig;

fn one() -> f64 {
    1.0
}

/// Closed form or samples of the initial segment `η` on `[−r, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum EtaSpec {
    /// `η(u) = value`.
    Constant { value: Vec<f64> },
    /// `η(u) = value + slope · u`.
    Linear { value: Vec<f64>, slope: Vec<f64> },
    /// `η(u) = offset + amplitude · sin(2π · frequency · u)` in every component.
    Sine {
        #[serde(default)]
        offset: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
    },
    /// Node values on `[−r, 0]`, one row per node.
    Samples { values: Vec<Vec<f64>> },
}

impl EtaSpec {
    pub fn build(&self, delay: f64, mesh: f64, dim: usize) -> Result<Segment> {
        let check = |v: &Vec<f64>, what: &str| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(config(format!("eta {what} has {} components, coefficients need {dim}", v.len())))
            }
        };
        match self {
            EtaSpec::Constant { value } => {
                check(value, "value")?;
                Segment::constant(delay, mesh, value)
            }
            EtaSpec::Linear { value, slope } => {
                check(value, "value")?;
                check(slope, "slope")?;
                Segment::from_fn(delay, mesh, dim, |u| value.iter().zip(slope).map(|(a, b)| a + b * u).collect())
            }
            EtaSpec::Sine { offset, amplitude, frequency } => {
                Segment::from_fn(delay, mesh, dim, |u| vec![offset + amplitude * (2.0 * PI * frequency * u).sin(); dim])
            }
            EtaSpec::Samples { values } => {
                let n = (delay / mesh).round() as usize + 1;
                if values.len() != n {
                    return Err(config(format!("eta samples need {n} rows for this grid, got {}", values.len())));
                }
                let mut flat = Vec::with_capacity(n * dim);
                for row in values {
                    check(row, "row")?;
                    flat.extend_from_slice(row);
                }
                Segment::new(delay, mesh, dim, flat)
            }
        }
    }
}

/// Property checks a scenario can enable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Regularity,
    YoungLoeve,
    Partition,
    Growth,
    Uniqueness,
    Gronwall,
    Continuity,
    Differentiability,
    Lemmas,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Regularity,
        Check::YoungLoeve,
        Check::Partition,
        Check::Growth,
        Check::Uniqueness,
        Check::Gronwall,
        Check::Continuity,
        Check::Differentiability,
        Check::Lemmas,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub coefficients: CoefficientSpec,
    pub driver: DriverSpec,
    pub eta: EtaSpec,
    #[serde(default)]
    pub config: SolverConfig,
    #[serde(default)]
    pub checks: Vec<Check>,
}

/// A scenario turned into solver inputs.
#[derive(Debug, Clone)]
pub struct Built {
    pub coefficients: CoefficientSet,
    pub eta: Segment,
    pub omega: GridPath,
    pub config: SolverConfig,
}

pub const BUILTIN_NAMES: [&str; 6] = ["zero", "additive", "linear", "sin", "logistic", "decay"];

fn fbm() -> DriverKind {
    DriverKind::Fbm { hurst: 0.75, amplitude: 0.25 }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut s: Scenario = serde_json::from_str(text).map_err(|e| config(format!("scenario: {e}")))?;
        s.sync_driver();
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Built-in scenarios used by `verify`.
    pub fn builtin(name: &str) -> Result<Self> {
        let cfg = SolverConfig::default();
        let all = Check::ALL.to_vec();
        let (coefficients, kind, eta) = match name {
            "zero" => (
                CoefficientSpec::zero(1),
                fbm(),
                EtaSpec::Sine { offset: 1.0, amplitude: 0.2, frequency: 2.0 },
            ),
            "additive" => (
                CoefficientSpec::scalar_linear(0.0, 0.0, 0.0, 0.2),
                fbm(),
                EtaSpec::Constant { value: vec![1.0] },
            ),
            "linear" => (
                CoefficientSpec::scalar_linear(-0.1, 0.05, 0.02, 0.0),
                fbm(),
                EtaSpec::Sine { offset: 1.0, amplitude: 0.2, frequency: 2.0 },
            ),
            "sin" => (
                CoefficientSpec::SinDelay { a: Some(vec![vec![-0.1]]), b: None, sigma: 0.02, dim: None },
                fbm(),
                EtaSpec::Sine { offset: 1.0, amplitude: 0.2, frequency: 2.0 },
            ),
            "logistic" => (
                CoefficientSpec::ScalarLogisticBounded { a: 0.02, sigma: 0.02, bound: 3.0 },
                fbm(),
                EtaSpec::Constant { value: vec![0.5] },
            ),
            "decay" => (
                CoefficientSpec::scalar_linear(-1.0, 0.0, 0.0, 0.0),
                DriverKind::Zero,
                EtaSpec::Constant { value: vec![1.0] },
            ),
            other => {
                return Err(config(format!("unknown built-in scenario {other:?}; known: {}", BUILTIN_NAMES.join(", "))))
            }
        };
        let mut s = Scenario {
            name: name.to_string(),
            coefficients,
            driver: DriverSpec::new(kind, cfg.horizon, cfg.mesh),
            eta,
            config: cfg,
            checks: all,
        };
        s.sync_driver();
        Ok(s)
    }

    fn sync_driver(&mut self) {
        if self.driver.horizon == 0.0 {
            self.driver.horizon = self.config.horizon;
        }
        if self.driver.mesh == 0.0 {
            self.driver.mesh = self.config.mesh;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let tol = 1e-12 * self.config.mesh;
        if (self.driver.mesh - self.config.mesh).abs() > tol || (self.driver.horizon - self.config.horizon).abs() > tol {
            return Err(config("driver mesh and horizon must match the solver config"));
        }
        self.driver.validate()?;
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.driver.seed = seed;
        self
    }

    /// Moves the whole scenario to another mesh.
    pub fn with_mesh(mut self, mesh: f64) -> Result<Self> {
        if let DriverKind::CustomSamples { .. } = self.driver.kind {
            return Err(config("custom-sample drivers are tied to their mesh"));
        }
        if let EtaSpec::Samples { .. } = self.eta {
            return Err(config("sampled initial segments are tied to their mesh"));
        }
        self.config.mesh = mesh;
        self.driver.mesh = mesh;
        self.validate()?;
        Ok(self)
    }

    pub fn enabled(&self, check: Check) -> bool {
        self.checks.contains(&check)
    }

    pub fn is_fbm(&self) -> bool {
        matches!(self.driver.kind, DriverKind::Fbm { .. })
    }

    pub fn build(&self) -> Result<Built> {
        self.validate()?;
        let coefficients = make_builtin(&self.coefficients)?;
        self.config.validate_for(&coefficients)?;
        let eta = self.eta.build(self.config.delay, self.config.mesh, coefficients.dim())?;
        let omega = generate(&self.driver)?;
        Ok(Built { coefficients, eta, omega, config: self.config.clone() })
    }
}
