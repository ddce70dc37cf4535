//! Exact ergodic rate by nested quadrature.
//!
//! `R = (1-α)/ln2 ∫_0^∞ (1 - F_γ(γ0)) / (1 + γ0) dγ0` with
//! `F_γ(γ0) = F_max((γ0/ν)^{1/4})`. The outer range is compactified by
//! `t = γ0 / (1 + γ0)`, under which `dγ0 / (1 + γ0) = dt / (1 - t)`:
//!
//! ```text
//! R = (1-α)/ln2 ∫_0^{t_max} S( (t / ((1-t) ν))^{1/4} ) / (1 - t) dt
//! ```
//!
//! where `S` is the survival of the selected envelope and `t_max` sits where a
//! union bound puts `S` below 1e-12.

use super::{snr_scale, RateMethod, RateResult, ScenarioConfig, UplinkMode};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::selection::{inner_tolerance, MaxEnvelopeLaw};
use crate::specfun::Tolerance;
use std::f64::consts::LN_2;

const SURVIVAL_CUTOFF: f64 = 1e-12;

/// Tolerance on the outer (SNR) integral.
pub fn outer_tolerance() -> Tolerance {
    Tolerance {
        abs_tol: 1e-10,
        rel_tol: 1e-7,
        max_terms: 1_000_000,
    }
}

/// Integrand of the compactified outer integral, exposed for testing.
pub fn compactified_integrand(law: &MaxEnvelopeLaw, nu: f64, t: f64) -> Result<f64> {
    let one_minus_t = 1.0 - t;
    let x = (t / (one_minus_t * nu)).powf(0.25);
    Ok(law.survival(x)? / one_minus_t)
}

/// `∫_0^∞ S_γ(γ0) / (1 + γ0) dγ0` in nats, for a given SNR scale `ν`.
pub fn log_capacity_integral(law: &MaxEnvelopeLaw, nu: f64, tol: &Tolerance) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::domain("exact rate", format!("nu must be finite and >= 0, got {nu}")));
    }
    if nu == 0.0 {
        return Ok(0.0);
    }
    let x_max = law.upper_quantile_bound(SURVIVAL_CUTOFF)?;
    let x4 = x_max.powi(4);
    let gamma_max = nu * x4;
    let t_max = (gamma_max / (1.0 + gamma_max)).min(1.0 - 4.0 * f64::EPSILON);
    let opts = QuadOptions {
        abs_tol: tol.abs_tol,
        rel_tol: tol.rel_tol,
        max_intervals: 4000,
    };
    let r = integrate(|t| compactified_integrand(law, nu, t), 0.0, t_max, &opts)?;
    Ok(r.value)
}

/// Exact rate for a precomputed selected-envelope law and SNR scale.
pub fn exact_rate_for_nu(law: &MaxEnvelopeLaw, nu: f64, alpha: f64, tol: &Tolerance) -> Result<f64> {
    Ok((1.0 - alpha) / LN_2 * log_capacity_integral(law, nu, tol)?)
}

/// Ergodic rate of the reciprocal link, evaluated exactly.
pub fn ergodic_rate_exact(cfg: &ScenarioConfig, tol: &Tolerance) -> Result<RateResult> {
    if cfg.uplink_mode != UplinkMode::Reciprocal {
        return Err(Error::Unsupported(
            "the exact rate integral assumes a reciprocal uplink; use Monte Carlo for independent uplinks".into(),
        ));
    }
    let nu = snr_scale(cfg)?;
    let law = MaxEnvelopeLaw::new(&cfg.fas, &cfg.fading, inner_tolerance())?;
    let rate = exact_rate_for_nu(&law, nu, cfg.alpha, tol)?;
    Ok(RateResult::deterministic(rate, RateMethod::Exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{FadingParams, FasGeometry};
    use approx::assert_abs_diff_eq;

    // (1/ln2)·(1-α)·∫_0^∞ e^{-sqrt(γ/ν)}/(1+γ) dγ, substituted γ = ν y², composite Simpson.
    fn rayleigh_single_port_oracle(nu: f64, alpha: f64) -> f64 {
        let upper = 60.0;
        let n = 400_000;
        let h = upper / n as f64;
        let f = |y: f64| (-y).exp() * 2.0 * nu * y / (1.0 + nu * y * y);
        let mut s = f(0.0) + f(upper);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        (1.0 - alpha) / LN_2 * s * h / 3.0
    }

    fn rayleigh_law() -> MaxEnvelopeLaw {
        MaxEnvelopeLaw::new(
            &FasGeometry::new(1, 0.0).unwrap(),
            &FadingParams::new(1, 1.0).unwrap(),
            inner_tolerance(),
        )
        .unwrap()
    }

    #[test]
    fn single_rayleigh_port_matches_oracle() {
        let law = rayleigh_law();
        for &nu in &[0.1, 1.0, 10.0, 1e3] {
            let r = exact_rate_for_nu(&law, nu, 0.5, &outer_tolerance()).unwrap();
            assert_abs_diff_eq!(r, rayleigh_single_port_oracle(nu, 0.5), epsilon = 1e-6);
        }
    }

    #[test]
    fn zero_snr_zero_rate() {
        assert_eq!(exact_rate_for_nu(&rayleigh_law(), 0.0, 0.5, &outer_tolerance()).unwrap(), 0.0);
    }

    #[test]
    fn compactified_integrand_matches_truncated_domain() {
        // brute force: the original γ-domain integrand on a truncated range with Simpson
        let fading = FadingParams::new(2, 1.0).unwrap();
        let fas = FasGeometry::with_correlation(3, 0.6).unwrap();
        let law = MaxEnvelopeLaw::new(&fas, &fading, inner_tolerance()).unwrap();
        let nu = 2.0;
        let upper = nu * 6f64.powi(4);
        let n = 20_000;
        // integrate in s = sqrt(γ) to tame the endpoint behaviour: dγ = 2 s ds
        let s_max = upper.sqrt();
        let h = s_max / n as f64;
        let f = |s: f64| {
            let g = s * s;
            law.survival((g / nu).powf(0.25)).unwrap() * 2.0 * s / (1.0 + g)
        };
        let mut acc = f(0.0) + f(s_max);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let brute = acc * h / 3.0;
        let compact = log_capacity_integral(&law, nu, &outer_tolerance()).unwrap();
        assert_abs_diff_eq!(compact, brute, epsilon = 1e-6);
    }

    #[test]
    fn rejects_independent_uplink() {
        let mut cfg = ScenarioConfig::baseline();
        cfg.uplink_mode = UplinkMode::Independent;
        assert!(matches!(ergodic_rate_exact(&cfg, &outer_tolerance()), Err(Error::Unsupported(_))));
    }
}
