//! Young integrals as left-point Riemann–Stieltjes sums, with the
//! Young–Loève error certificate.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::path::{holder_scan, GridPath};

/// `1 / (1 − 2^{1−(β+ν)})`.
pub fn young_constant(beta: f64, nu: f64) -> Result<f64> {
    let s = beta + nu;
    if !(s > 1.0) || !s.is_finite() {
        return Err(domain(format!("Young condition violated: beta + nu = {s} <= 1")));
    }
    Ok(1.0 / (1.0 - (1.0 - s).exp2()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YoungConstants {
    pub beta: f64,
    pub nu: f64,
    pub delta: f64,
    /// Constant for the pair `(β, ν)`.
    pub k: f64,
    /// Constant for the pair `(δβ, ν)`, when `δβ + ν > 1`.
    pub k_prime: Option<f64>,
}

impl YoungConstants {
    pub fn new(beta: f64, nu: f64, delta: f64) -> Result<Self> {
        let k = young_constant(beta, nu)?;
        let k_prime = young_constant(delta * beta, nu).ok();
        Ok(YoungConstants { beta, nu, delta, k, k_prime })
    }

    /// `K′`, or a domain error when `δβ + ν ≤ 1`.
    pub fn k_prime(&self) -> Result<f64> {
        self.k_prime.ok_or_else(|| {
            domain(format!(
                "Young condition violated: delta*beta + nu = {} <= 1",
                self.delta * self.beta + self.nu
            ))
        })
    }
}

/// Node ranges of `x` and `ω` covering `[s, t]` on a shared grid.
fn aligned(x: &GridPath, omega: &GridPath, window: (f64, f64)) -> Result<((usize, usize), usize)> {
    if omega.dim() != 1 {
        return Err(domain("driver must be scalar"));
    }
    if (x.mesh() - omega.mesh()).abs() > 1e-12 * x.mesh() {
        return Err(domain(format!(
            "integrand mesh {} differs from driver mesh {}",
            x.mesh(),
            omega.mesh()
        )));
    }
    let (xl, xh) = x.window(window.0, window.1)?;
    let (ol, oh) = omega.window(window.0, window.1)?;
    debug_assert_eq!(xh - xl, oh - ol);
    Ok(((xl, xh), ol))
}

/// `Σ_k x(u_k)(ω(u_{k+1}) − ω(u_k))` over the grid nodes of `[s, t]`.
pub fn young_integral(x: &GridPath, omega: &GridPath, window: (f64, f64)) -> Result<Vec<f64>> {
    let ((xl, xh), ol) = aligned(x, omega, window)?;
    let w = omega.values();
    let mut acc = vec![0.0; x.dim()];
    for (j, k) in (xl..xh).enumerate() {
        let dw = w[ol + j + 1] - w[ol + j];
        for (a, xi) in acc.iter_mut().zip(x.node(k)) {
            *a += xi * dw;
        }
    }
    Ok(acc)
}

/// Left-point sum on the grid refined `factor` times, with `x` and `ω`
/// interpolated linearly between nodes.
///
/// Each coarse cell contributes `Δω_k (x_k + (factor−1)/(2·factor) Δx_k)`
/// in closed form.
pub fn refined_young_integral(
    x: &GridPath,
    omega: &GridPath,
    window: (f64, f64),
    factor: usize,
) -> Result<Vec<f64>> {
    if factor == 0 {
        return Err(domain("refinement factor must be positive"));
    }
    let ((xl, xh), ol) = aligned(x, omega, window)?;
    let w = omega.values();
    let c = (factor as f64 - 1.0) / (2.0 * factor as f64);
    let mut acc = vec![0.0; x.dim()];
    for (j, k) in (xl..xh).enumerate() {
        let dw = w[ol + j + 1] - w[ol + j];
        let (a, b) = (x.node(k), x.node(k + 1));
        for i in 0..acc.len() {
            acc[i] += dw * (a[i] + c * (b[i] - a[i]));
        }
    }
    Ok(acc)
}

/// Mesh ratio of the quadrature oracle used by [`young_loeve_gap`].
pub const ORACLE_REFINEMENT: usize = 4;

/// Returns `(gap, bound)` with
/// `gap = ‖∫_s^t x dω − x(s)(ω(t) − ω(s))‖` (oracle quadrature) and
/// `bound = K (t−s)^{β+ν} |||ω|||_{ν,[s,t]} |||x|||_{β,[s,t]}` (grid seminorms).
pub fn young_loeve_gap(
    x: &GridPath,
    omega: &GridPath,
    window: (f64, f64),
    consts: &YoungConstants,
) -> Result<(f64, f64)> {
    let ((xl, xh), ol) = aligned(x, omega, window)?;
    let integral = refined_young_integral(x, omega, window, ORACLE_REFINEMENT)?;
    let w = omega.values();
    let dw = w[ol + xh - xl] - w[ol];
    let xs = x.node(xl);
    let gap = integral
        .iter()
        .zip(xs)
        .map(|(i, a)| (i - a * dw).powi(2))
        .sum::<f64>()
        .sqrt();
    let h = x.mesh();
    let len = (xh - xl) as f64 * h;
    let (sx, _, _) = holder_scan(x.values(), x.dim(), h, consts.beta, xl, xh);
    let (sw, _, _) = holder_scan(w, 1, h, consts.nu, ol, ol + xh - xl);
    let bound = consts.k * len.powf(consts.beta + consts.nu) * sw * sx;
    Ok((gap, bound))
}

/// Returns `(lhs, rhs)` of `‖∫_s^t x dω‖ ≤ (t−s)^ν |||ω|||_ν (‖x(s)‖ + K (t−s)^β |||x|||_β)`
/// with the integral taken as the grid left-point sum.
pub fn young_integral_bound(
    x: &GridPath,
    omega: &GridPath,
    window: (f64, f64),
    consts: &YoungConstants,
) -> Result<(f64, f64)> {
    let ((xl, xh), ol) = aligned(x, omega, window)?;
    let lhs = crate::path::norm(&young_integral(x, omega, window)?);
    let h = x.mesh();
    let len = (xh - xl) as f64 * h;
    let (sx, _, _) = holder_scan(x.values(), x.dim(), h, consts.beta, xl, xh);
    let (sw, _, _) = holder_scan(omega.values(), 1, h, consts.nu, ol, ol + xh - xl);
    let rhs = len.powf(consts.nu) * sw * (crate::path::norm(x.node(xl)) + consts.k * len.powf(consts.beta) * sx);
    Ok((lhs, rhs))
}

/// Summation error bound `n ε Σ_k ‖x_k‖ |Δω_k|` for the left-point sums over
/// `[s, t]`, with `n` the number of cells plus one.
pub fn rounding_slack(x: &GridPath, omega: &GridPath, window: (f64, f64)) -> Result<f64> {
    let ((xl, xh), ol) = aligned(x, omega, window)?;
    let w = omega.values();
    let total: f64 = (xl..xh)
        .enumerate()
        .map(|(j, k)| crate::path::norm(x.node(k)) * (w[ol + j + 1] - w[ol + j]).abs())
        .sum();
    Ok(((xh - xl + 1) as f64) * f64::EPSILON * total)
}

/// First-order Richardson extrapolation from sums at mesh `h` and `h/2`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    2.0 * fine - coarse
}
