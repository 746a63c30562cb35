//! Driver paths ω: fractional Brownian motion and deterministic test signals.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::path::{cells, holder_seminorm, GridPath};

/// Identifier of the pseudo-random generator behind every seeded driver.
pub const RNG_ALGORITHM: &str = "chacha20";

/// Largest number of increments the Cholesky sampler accepts.
pub const MAX_FBM_STEPS: usize = 1 << 14;

/// Default gap between the Hurst index and the working Hölder exponent.
pub const HOLDER_MARGIN: f64 = 0.05;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriverKind {
    Fbm {
        hurst: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude · t^exponent`.
    Power {
        exponent: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude · sin(2π · frequency · t)`.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
    },
    Zero,
    /// Node values on `[0, T]` supplied verbatim.
    CustomSamples { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverSpec {
    #[serde(flatten)]
    pub kind: DriverKind,
    #[serde(default)]
    pub seed: u64,
    /// Scenario files may omit `horizon` and `mesh`; they are then taken
    /// from the solver configuration.
    #[serde(default, alias = "T")]
    pub horizon: f64,
    #[serde(default)]
    pub mesh: f64,
}

impl DriverSpec {
    pub fn new(kind: DriverKind, horizon: f64, mesh: f64) -> Self {
        DriverSpec { kind, seed: 0, horizon, mesh }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn steps(&self) -> Result<usize> {
        let n = cells(self.horizon, self.mesh).map_err(|e| config(e.to_string()))?;
        if n == 0 {
            return Err(config("driver horizon must span at least one mesh cell"));
        }
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.steps()?;
        match &self.kind {
            DriverKind::Fbm { hurst, amplitude } => {
                if !(*hurst > 0.5 && *hurst < 1.0) {
                    return Err(config(format!("Hurst index must lie in (1/2, 1), got {hurst}")));
                }
                if !amplitude.is_finite() {
                    return Err(config("fBm amplitude must be finite"));
                }
                if n > MAX_FBM_STEPS {
                    return Err(config(format!(
                        "fBm sampling is capped at {MAX_FBM_STEPS} steps, got {n}"
                    )));
                }
            }
            DriverKind::Power { exponent, .. } => {
                if !(*exponent > 0.0 && *exponent <= 1.0) {
                    return Err(config(format!("power exponent must lie in (0, 1], got {exponent}")));
                }
            }
            DriverKind::CustomSamples { values } => {
                if values.len() != n + 1 {
                    return Err(config(format!(
                        "custom driver needs {} samples for T/mesh = {n}, got {}",
                        n + 1,
                        values.len()
                    )));
                }
            }
            DriverKind::Sine { .. } | DriverKind::Zero => {}
        }
        Ok(())
    }

    /// Default working Hölder exponent for this driver, if it has a natural one.
    pub fn suggested_nu(&self) -> Option<f64> {
        match self.kind {
            DriverKind::Fbm { hurst, .. } => Some(hurst - HOLDER_MARGIN),
            DriverKind::Power { exponent, .. } => Some(exponent),
            _ => None,
        }
    }
}

/// Generates the driver described by `spec` on `[0, T]`.
pub fn generate(spec: &DriverSpec) -> Result<GridPath> {
    match spec.kind {
        DriverKind::Fbm { .. } => gen_fbm(spec),
        _ => gen_deterministic(spec),
    }
}

/// Samples fractional Brownian motion with `ω(0) = 0`.
pub fn gen_fbm(spec: &DriverSpec) -> Result<GridPath> {
    let DriverKind::Fbm { hurst, amplitude } = spec.kind else {
        return Err(config("gen_fbm needs an fbm driver spec"));
    };
    spec.validate()?;
    let n = spec.steps()?;
    let sampler = FbmSampler::cached(n, hurst)?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let values = sampler.sample_path(&mut rng, spec.mesh, amplitude);
    GridPath::scalar(0.0, spec.mesh, values)
}

/// Evaluates the closed-form drivers and custom samples.
pub fn gen_deterministic(spec: &DriverSpec) -> Result<GridPath> {
    spec.validate()?;
    let n = spec.steps()?;
    let h = spec.mesh;
    let values: Vec<f64> = match &spec.kind {
        DriverKind::Power { exponent, amplitude } => {
            (0..=n).map(|k| amplitude * (k as f64 * h).powf(*exponent)).collect()
        }
        DriverKind::Sine { amplitude, frequency } => (0..=n)
            .map(|k| amplitude * (2.0 * PI * frequency * (k as f64 * h)).sin())
            .collect(),
        DriverKind::Zero => vec![0.0; n + 1],
        DriverKind::CustomSamples { values } => values.clone(),
        DriverKind::Fbm { .. } => return Err(config("fbm drivers are random; use gen_fbm")),
    };
    GridPath::scalar(0.0, h, values)
}

/// Cholesky sampler for `n` unit-step fractional Gaussian noise increments.
///
/// The factor is computed for mesh 1; increments on mesh `h` are rescaled by
/// `h^H`, which is exact by self-similarity.
#[derive(Debug)]
pub struct FbmSampler {
    hurst: f64,
    factor: DMatrix<f64>,
}

type SamplerCache = Mutex<HashMap<(usize, u64), Arc<FbmSampler>>>;

fn cache() -> &'static SamplerCache {
    static CACHE: OnceLock<SamplerCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let two_h = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

impl FbmSampler {
    /// Builds the factor for any `H ∈ (0, 1)`; callers feeding the solver go
    /// through [`gen_fbm`], which restricts `H` to `(1/2, 1)`.
    pub fn new(n: usize, hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::Generation(format!("Hurst index {hurst} outside (0, 1)")));
        }
        if n == 0 || n > MAX_FBM_STEPS {
            return Err(Error::Generation(format!("step count {n} outside 1..={MAX_FBM_STEPS}")));
        }
        let gamma: Vec<f64> = (0..n).map(|k| fgn_autocovariance(k, hurst)).collect();
        let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
        let mut jitter = 0.0;
        for _ in 0..6 {
            let mut m = cov.clone();
            for i in 0..n {
                m[(i, i)] += jitter;
            }
            if let Some(ch) = m.cholesky() {
                return Ok(FbmSampler { hurst, factor: ch.unpack() });
            }
            jitter = if jitter == 0.0 { 1e-12 } else { jitter * 100.0 };
        }
        Err(Error::Generation(format!(
            "fGn covariance for n={n}, H={hurst} is not positive definite after jitter"
        )))
    }

    /// Shared sampler for `(n, H)`, factorised once per process.
    pub fn cached(n: usize, hurst: f64) -> Result<Arc<Self>> {
        let key = (n, hurst.to_bits());
        if let Some(s) = cache().lock().expect("sampler cache poisoned").get(&key) {
            return Ok(Arc::clone(s));
        }
        let s = Arc::new(FbmSampler::new(n, hurst)?);
        cache()
            .lock()
            .expect("sampler cache poisoned")
            .insert(key, Arc::clone(&s));
        Ok(s)
    }

    pub fn steps(&self) -> usize {
        self.factor.nrows()
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Node values `ω(k h)`, `k = 0..=n`, scaled by `amplitude`.
    pub fn sample_path<R: rand::Rng>(&self, rng: &mut R, mesh: f64, amplitude: f64) -> Vec<f64> {
        let n = self.steps();
        let z = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
        let incr = &self.factor * z;
        let scale = amplitude * mesh.powf(self.hurst);
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for dw in incr.iter() {
            acc += scale * dw;
            out.push(acc);
        }
        out
    }
}

/// Grid Hölder seminorm of `path` over its whole domain for each exponent.
pub fn empirical_holder_exponent(path: &GridPath, betas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if betas.is_empty() {
        return Err(config("empirical_holder_exponent needs at least one exponent"));
    }
    let w = path.full_window();
    betas
        .iter()
        .map(|&b| Ok((b, holder_seminorm(path, b, w)?.seminorm)))
        .collect()
}
