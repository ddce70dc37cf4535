//! High-SNR asymptote.
//!
//! Near the origin the CDF of the selected envelope behaves as
//! `F(x) ≈ a0 · x^{2s}` with `s = mN`. Matching a Gamma(s, θ) law for `|h|²`
//! to that leading term gives `θ = (Γ(s) a0 s)^{-1/s}`, and then
//! `E[ln γ] = ln ν + 2(ψ(s) + ln θ)`. The rate asymptote is
//! `(1-α)/ln2 · E[ln γ]`.
//!
//! The Gamma match is exact only for a single port. For `N ≥ 2` it is an
//! approximation whose offset from the true `E[ln γ]` does not vanish as the
//! SNR grows.

use super::{snr_scale, RateMethod, RateResult, ScenarioConfig};
use crate::channel::{FadingParams, FasGeometry};
use crate::error::{Error, Result};
use crate::specfun::{digamma, ln_gamma};
use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticParams {
    /// Total diversity order `m N`.
    pub s: u32,
    pub ln_a0: f64,
    /// `exp(ln_a0)`; may over- or underflow for very large `N`, use `ln_a0` for arithmetic.
    pub a0: f64,
    /// Gamma scale `θ √ν` of `√γ`.
    pub scale: f64,
    pub ln_scale: f64,
    pub ln_nu: f64,
}

impl AsymptoticParams {
    /// Structural constants for a port array and fading law at SNR scale `ν`.
    pub fn new(fas: &FasGeometry, fading: &FadingParams, nu: f64) -> Result<Self> {
        fading.validate()?;
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::domain("asymptotic_params", format!("nu must be positive, got {nu}")));
        }
        let n = fas.n_ports();
        let mu = fas.mu();
        if n >= 2 && mu >= 1.0 {
            return Err(Error::domain(
                "asymptotic_params",
                "fully correlated ports (mu = 1) make a0 diverge",
            ));
        }
        let m = fading.m as f64;
        let ln_m = m.ln();
        let ln_sigma_sq = fading.sigma_sq.ln();
        let others = (n - 1) as f64;
        let mut ln_a0 = (m - 1.0) * ln_m - ln_gamma(m)? - m * ln_sigma_sq;
        if n >= 2 {
            ln_a0 += -others * ln_gamma(m + 1.0)? + others * m * (ln_m - ln_sigma_sq - (-mu * mu).ln_1p());
        }
        let s = fading
            .m
            .checked_mul(n as u32)
            .ok_or_else(|| Error::domain("asymptotic_params", "m * N overflows"))?;
        Ok(Self::from_parts(s, ln_a0, nu.ln()))
    }

    fn from_parts(s: u32, ln_a0: f64, ln_nu: f64) -> Self {
        let sf = s as f64;
        let ln_gamma_s = ln_gamma(sf).expect("s >= 1");
        let ln_scale = -(ln_gamma_s + ln_a0 + sf.ln()) / sf + 0.5 * ln_nu;
        AsymptoticParams {
            s,
            ln_a0,
            a0: ln_a0.exp(),
            scale: ln_scale.exp(),
            ln_scale,
            ln_nu,
        }
    }

    /// Same constants with `a0` multiplied by `factor`. Used to check that
    /// validation notices a mis-specified structural constant.
    pub fn with_a0_factor(&self, factor: f64) -> Self {
        Self::from_parts(self.s, self.ln_a0 + factor.ln(), self.ln_nu)
    }

    /// `E[ln γ] ≈ 2ψ(s) + 2 ln(scale)`.
    pub fn mean_log_snr(&self) -> f64 {
        2.0 * digamma(self.s as f64).expect("s >= 1") + 2.0 * self.ln_scale
    }

    pub fn rate(&self, alpha: f64) -> RateResult {
        let rate = (1.0 - alpha) / LN_2 * self.mean_log_snr();
        RateResult {
            outside_validity: rate < 0.0,
            ..RateResult::deterministic(rate, RateMethod::Asymptotic)
        }
    }
}

pub fn asymptotic_params(cfg: &ScenarioConfig) -> Result<AsymptoticParams> {
    AsymptoticParams::new(&cfg.fas, &cfg.fading, snr_scale(cfg)?)
}

/// `2ψ(s) + ln ν − (2/s) ln(Γ(s) a0 s)`.
pub fn mean_log_snr(cfg: &ScenarioConfig) -> Result<f64> {
    Ok(asymptotic_params(cfg)?.mean_log_snr())
}

/// High-SNR rate. Returned unclamped; `outside_validity` is set when negative.
pub fn ergodic_rate_asymptotic(cfg: &ScenarioConfig) -> Result<RateResult> {
    Ok(asymptotic_params(cfg)?.rate(cfg.alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Geometry, PathLossParams};
    use crate::selection::{inner_tolerance, MaxEnvelopeLaw};
    use crate::specfun::euler_gamma;
    use approx::assert_relative_eq;

    fn unit_config(n_ports: usize, m: u32, mu: f64) -> ScenarioConfig {
        ScenarioConfig {
            geometry: Geometry::vertical(1.0).unwrap(),
            path_loss: PathLossParams::new(1.0, 2.0).unwrap(),
            fas: FasGeometry::with_correlation(n_ports, mu).unwrap(),
            fading: FadingParams::new(m, 1.0).unwrap(),
            eta: 1.0,
            p_u: 1.0,
            n0: 1.0,
            alpha: 0.5,
            ..ScenarioConfig::baseline()
        }
    }

    // plain-arithmetic a0 for small N
    fn direct_a0(n: usize, m: u32, sigma_sq: f64, mu: f64) -> f64 {
        let mf = m as f64;
        let fact = |k: u32| (1..=k).map(|i| i as f64).product::<f64>();
        let mut a0 = mf.powi(m as i32 - 1) / (fact(m - 1) * sigma_sq.powi(m as i32) * fact(m).powi(n as i32 - 1));
        for _ in 2..=n {
            a0 *= (mf / (sigma_sq * (1.0 - mu * mu))).powi(m as i32);
        }
        a0
    }

    #[test]
    fn single_rayleigh_port() {
        let p = asymptotic_params(&unit_config(1, 1, 0.0)).unwrap();
        assert_eq!(p.s, 1);
        assert_relative_eq!(p.a0, 1.0, max_relative = 1e-14);
        assert_relative_eq!(p.scale, 1.0, max_relative = 1e-14);
        let nu4 = asymptotic_params(&unit_config(1, 1, 0.0).with_power(4.0)).unwrap();
        assert_relative_eq!(nu4.scale, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn two_independent_rayleigh_ports() {
        let cfg = unit_config(2, 1, 0.0).with_power(3.0);
        let p = asymptotic_params(&cfg).unwrap();
        assert_eq!(p.s, 2);
        assert_relative_eq!(p.a0, 1.0, max_relative = 1e-14);
        assert_relative_eq!(p.scale, (3.0f64 / 2.0).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn log_space_matches_direct_product() {
        for n in 1..=10 {
            for m in 1..=4 {
                for &(sigma_sq, mu) in &[(1.0, 0.3), (0.5, 0.9), (2.0, 0.0)] {
                    let fas = FasGeometry::with_correlation(n, mu).unwrap();
                    let fading = FadingParams::new(m, sigma_sq).unwrap();
                    let p = AsymptoticParams::new(&fas, &fading, 1.0).unwrap();
                    let mu_eff = if n == 1 { 0.0 } else { mu };
                    assert_relative_eq!(p.a0, direct_a0(n, m, sigma_sq, mu_eff), max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn large_arrays_stay_finite_in_log_space() {
        let fas = FasGeometry::with_correlation(1000, 0.9).unwrap();
        let p = AsymptoticParams::new(&fas, &FadingParams::new(3, 1.0).unwrap(), 1e-5).unwrap();
        assert!(p.ln_a0.is_finite() && p.scale.is_finite() && p.mean_log_snr().is_finite());
    }

    #[test]
    fn a0_is_leading_cdf_coefficient() {
        let fas = FasGeometry::with_correlation(3, 0.6).unwrap();
        let fading = FadingParams::new(2, 1.0).unwrap();
        let p = AsymptoticParams::new(&fas, &fading, 1.0).unwrap();
        let law = MaxEnvelopeLaw::new(&fas, &fading, inner_tolerance()).unwrap();
        let x: f64 = 0.03;
        let ratio = law.cdf(x).unwrap() / x.powi(2 * p.s as i32);
        assert_relative_eq!(ratio, p.a0, max_relative = 1e-2);
    }

    #[test]
    fn exponential_channel_closed_form() {
        let cfg = unit_config(1, 1, 0.0);
        assert_relative_eq!(mean_log_snr(&cfg).unwrap(), -2.0 * euler_gamma(), max_relative = 1e-12);
        let r = ergodic_rate_asymptotic(&cfg).unwrap();
        assert_relative_eq!(r.rate, -euler_gamma() / LN_2, max_relative = 1e-12);
        assert!((r.rate + 0.8327).abs() < 1e-4);
        assert!(r.outside_validity);
        assert_eq!(r.method, RateMethod::Asymptotic);
    }

    #[test]
    fn log_linear_in_power() {
        let cfg = ScenarioConfig::baseline().with_power(100.0);
        let r1 = ergodic_rate_asymptotic(&cfg).unwrap().rate;
        let r2 = ergodic_rate_asymptotic(&cfg.with_power(200.0)).unwrap().rate;
        assert_relative_eq!(r2 - r1, 1.0 - cfg.alpha, max_relative = 1e-10);
        let l1 = mean_log_snr(&cfg).unwrap();
        let l7 = mean_log_snr(&cfg.with_power(700.0)).unwrap();
        assert_relative_eq!(l7 - l1, 7f64.ln(), max_relative = 1e-10);
    }

    #[test]
    fn a0_factor_shifts_mean_log() {
        let p = asymptotic_params(&ScenarioConfig::baseline()).unwrap();
        let q = p.with_a0_factor(1.05);
        assert_relative_eq!(q.a0, 1.05 * p.a0, max_relative = 1e-12);
        let shift = q.mean_log_snr() - p.mean_log_snr();
        assert_relative_eq!(shift, -2.0 / p.s as f64 * 1.05f64.ln(), max_relative = 1e-8);
        assert_eq!(p.with_a0_factor(1.0).scale.to_bits(), p.scale.to_bits());
    }

    #[test]
    fn fully_correlated_rejected() {
        let fas = FasGeometry::with_correlation(4, 1.0).unwrap();
        let fading = FadingParams::new(1, 1.0).unwrap();
        assert!(AsymptoticParams::new(&fas, &fading, 1.0).is_err());
    }
}
