use serde::Serialize;

use super::SolverConfig;
use crate::coefficients::{CoefficientSet, LocalConstant};
use crate::error::{domain, Result};
use crate::young::YoungConstants;

/// Constants that make the map `F` a contraction on stopping-time windows.
#[derive(Clone, Serialize)]
pub struct ContractionConstants {
    pub young: YoungConstants,
    pub lip_f: f64,
    pub lip_g: f64,
    pub g0_norm: f64,
    /// `L′ = max{L_f, ‖f(0)‖}`.
    pub l_prime: f64,
    /// `C = 2(‖g(0)‖ + L′ + L_g(K + 1))`.
    pub c: f64,
    #[serde(skip)]
    local_holder: LocalConstant,
}

impl std::fmt::Debug for ContractionConstants {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContractionConstants")
            .field("young", &self.young)
            .field("l_prime", &self.l_prime)
            .field("c", &self.c)
            .finish_non_exhaustive()
    }
}

impl ContractionConstants {
    /// Evaluates the constants; fails only when a Young condition is violated.
    pub fn evaluate(coeffs: &CoefficientSet, beta: f64, nu: f64) -> Result<Self> {
        let young = YoungConstants::new(beta, nu, coeffs.delta)?;
        young.k_prime()?;
        let l_prime = coeffs.l_prime();
        let c = 2.0 * (coeffs.g0_norm + l_prime + coeffs.lip_g * (young.k + 1.0));
        Ok(ContractionConstants {
            young,
            lip_f: coeffs.lip_f,
            lip_g: coeffs.lip_g,
            g0_norm: coeffs.g0_norm,
            l_prime,
            c,
            local_holder: coeffs.local_holder.clone(),
        })
    }

    /// `C′(Δ) = [1 + Δ^β](‖g(0)‖ + L_g + L_g K Δ^β + L′)`.
    pub fn c_prime(&self, delta_t: f64) -> f64 {
        let p = delta_t.powf(self.young.beta);
        (1.0 + p) * (self.g0_norm + self.lip_g + self.lip_g * self.young.k * p + self.l_prime)
    }

    /// `L(Δ, M) = L_f + L_g + L_g K′ Δ^β + K′ L_M(M) M^δ Δ^{δβ}`.
    pub fn l(&self, delta_t: f64, m: f64) -> f64 {
        let y = &self.young;
        let kp = y.k_prime.expect("checked in evaluate");
        let lm = (self.local_holder)(m);
        let tail = if lm == 0.0 { 0.0 } else { kp * lm * m.powf(y.delta) * delta_t.powf(y.delta * y.beta) };
        self.lip_f + self.lip_g + self.lip_g * kp * delta_t.powf(y.beta) + tail
    }
}

/// Evaluates `C`, `C′` and `L` for the configuration; additionally rejects
/// `C = 0`, where no `μ < C` exists.
pub fn compute_contraction_constants(coeffs: &CoefficientSet, cfg: &SolverConfig) -> Result<ContractionConstants> {
    let k = ContractionConstants::evaluate(coeffs, cfg.beta, cfg.nu)?;
    if !(k.c > 0.0) {
        return Err(domain("C must be positive to fix μ<C"));
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{make_builtin, CoefficientSpec};

    #[test]
    fn zero_coefficients_have_no_positive_c() {
        let c = make_builtin(&CoefficientSpec::zero(1)).unwrap();
        let e = compute_contraction_constants(&c, &SolverConfig::default()).unwrap_err();
        assert!(e.to_string().contains("C must be positive"));
        assert_eq!(ContractionConstants::evaluate(&c, 0.4, 0.7).unwrap().c, 0.0);
    }

    #[test]
    fn c_for_unit_constants_and_k_two() {
        // L' = 1, L_g = 1, ‖g(0)‖ = 0 and β + ν = 2 so K = 2.
        let coeffs = make_builtin(&CoefficientSpec::scalar_linear(1.0, 0.0, 1.0, 0.0)).unwrap();
        let k = ContractionConstants::evaluate(&coeffs, 1.0, 1.0).unwrap();
        assert_eq!(k.young.k, 2.0);
        assert_eq!(k.c, 8.0);
    }

    #[test]
    fn l_without_local_term() {
        let coeffs = make_builtin(&CoefficientSpec::scalar_linear(0.3, 0.0, 0.5, 0.0)).unwrap();
        let k = ContractionConstants::evaluate(&coeffs, 0.4, 0.7).unwrap();
        let kp = k.young.k_prime.unwrap();
        let want = 0.3 + 0.5 + 0.5 * kp * 0.1f64.powf(0.4);
        assert!((k.l(0.1, 7.0) - want).abs() < 1e-14);
    }

    #[test]
    fn c_prime_is_below_c_on_short_windows() {
        let coeffs = make_builtin(&CoefficientSpec::SinDelay { a: Some(vec![vec![-0.5]]), b: None, sigma: 0.3, dim: None }).unwrap();
        let k = ContractionConstants::evaluate(&coeffs, 0.4, 0.7).unwrap();
        for d in [1e-4, 0.01, 0.5, 1.0] {
            assert!(k.c_prime(d) <= k.c * (1.0 + 1e-15));
        }
    }

    #[test]
    fn young_violation_is_a_domain_error() {
        let coeffs = make_builtin(&CoefficientSpec::zero(1)).unwrap();
        assert!(ContractionConstants::evaluate(&coeffs, 0.2, 0.7).is_err());
    }
}
