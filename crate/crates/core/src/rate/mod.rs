//! Ergodic spectral rate of the harvest-then-transmit link.
//!
//! The CH harvests `η P_u L(d) |h|² α T` joules on the downlink and spends them
//! over `(1-α)T` on the uplink, so the received SNR is
//! `γ = ν |h|² |g|²` with `ν = η P_u L(d)² α / ((1-α) N0)`. Under channel
//! reciprocity `g = h` and `γ = ν |h|⁴`.
//!
//! Three evaluators are provided: an exact nested integral ([`exact`]), Monte
//! Carlo ([`monte_carlo`]) and the high-SNR asymptote ([`asymptotic`]).

pub mod asymptotic;
pub mod exact;
pub mod monte_carlo;

pub use asymptotic::{asymptotic_params, ergodic_rate_asymptotic, mean_log_snr, AsymptoticParams};
pub use exact::{ergodic_rate_exact, exact_rate_for_nu, outer_tolerance};
pub use monte_carlo::{draw_gain_products, ergodic_rate_mc, rate_from_products, McOptions};

use crate::channel::{path_loss, FadingParams, FasGeometry, Geometry, PathLossParams};
use crate::error::{Error, Result};

/// How the uplink envelope relates to the downlink one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum UplinkMode {
    /// Uplink reuses the downlink draw (`g = h`).
    #[default]
    Reciprocal,
    /// Uplink ports are drawn afresh and selected on their own.
    Independent,
}

impl UplinkMode {
    pub fn label(&self) -> &'static str {
        match self {
            UplinkMode::Reciprocal => "reciprocal",
            UplinkMode::Independent => "independent",
        }
    }
}

/// Full description of one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: Geometry,
    pub path_loss: PathLossParams,
    pub fas: FasGeometry,
    pub fading: FadingParams,
    /// Energy conversion efficiency.
    pub eta: f64,
    /// UAV transmit power (W).
    pub p_u: f64,
    /// Noise power (W).
    pub n0: f64,
    /// Fraction of the slot spent on power transfer.
    pub alpha: f64,
    /// Slot duration (s).
    pub t_slot: f64,
    pub uplink_mode: UplinkMode,
}

impl ScenarioConfig {
    /// Simulation baseline: UAV 25 m above the CH, 10 ports over 2λ, m = 2,
    /// `P_u = 1 W`, `η = 0.8`, `ρ = 2.7`, `N0 = 1e-9 W`, `α = 0.5`.
    pub fn baseline() -> Self {
        ScenarioConfig {
            geometry: Geometry {
                uav_position: [0.0, 0.0, 25.0],
                ch_position: [0.0, 0.0, 0.0],
            },
            path_loss: PathLossParams::default(),
            fas: FasGeometry::new(10, 2.0).expect("valid baseline aperture"),
            fading: FadingParams { m: 2, sigma_sq: 1.0 },
            eta: 0.8,
            p_u: 1.0,
            n0: 1e-9,
            alpha: 0.5,
            t_slot: 1.0,
            uplink_mode: UplinkMode::Reciprocal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.path_loss.validate()?;
        self.fading.validate()?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain("ScenarioConfig", format!("{name} must be positive, got {v}")))
            }
        };
        positive("p_u", self.p_u)?;
        positive("n0", self.n0)?;
        positive("t_slot", self.t_slot)?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::domain("ScenarioConfig", format!("eta must lie in (0, 1], got {}", self.eta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(
                "ScenarioConfig",
                format!("alpha must lie in (0, 1), got {}", self.alpha),
            ));
        }
        Ok(())
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_power(mut self, p_u: f64) -> Self {
        self.p_u = p_u;
        self
    }

    pub fn distance(&self) -> f64 {
        self.geometry.distance()
    }

    pub fn path_gain(&self) -> Result<f64> {
        path_loss(self.distance(), &self.path_loss)
    }
}

/// Which evaluator produced a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateMethod {
    Exact,
    MonteCarlo,
    Asymptotic,
}

impl RateMethod {
    pub fn label(&self) -> &'static str {
        match self {
            RateMethod::Exact => "exact",
            RateMethod::MonteCarlo => "monte_carlo",
            RateMethod::Asymptotic => "asymptotic",
        }
    }
}

/// Ergodic rate in bits/s/Hz with provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub rate: f64,
    pub method: RateMethod,
    /// Standard error of a Monte Carlo estimate, zero otherwise.
    pub std_error: f64,
    pub trials: usize,
    /// Set when the high-SNR asymptote came out negative, i.e. the operating
    /// point is far outside the regime where it means anything.
    pub outside_validity: bool,
}

impl RateResult {
    pub(crate) fn deterministic(rate: f64, method: RateMethod) -> Self {
        RateResult {
            rate,
            method,
            std_error: 0.0,
            trials: 0,
            outside_validity: false,
        }
    }
}

/// SNR scale `ν = η P_u L(d)² α / ((1-α) N0)`.
pub fn snr_scale(cfg: &ScenarioConfig) -> Result<f64> {
    cfg.validate()?;
    let l = cfg.path_gain()?;
    Ok(cfg.eta * cfg.p_u * l * l * cfg.alpha / ((1.0 - cfg.alpha) * cfg.n0))
}

/// `γ = ν |h|⁴` (reciprocal uplink).
pub fn instantaneous_snr(selected_envelope: f64, nu: f64) -> f64 {
    let p = selected_envelope * selected_envelope;
    nu * p * p
}

/// `γ = ν |h|² |g|²` (independent uplink).
pub fn instantaneous_snr_two_links(downlink: f64, uplink: f64, nu: f64) -> f64 {
    nu * downlink * downlink * uplink * uplink
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_config() -> ScenarioConfig {
        // L = 1 at d = 1 with beta_ref = 1
        ScenarioConfig {
            geometry: Geometry::vertical(1.0).unwrap(),
            path_loss: PathLossParams::new(1.0, 2.0).unwrap(),
            eta: 1.0,
            p_u: 1.0,
            n0: 1.0,
            alpha: 0.5,
            ..ScenarioConfig::baseline()
        }
    }

    #[test]
    fn snr_scale_examples() {
        assert_relative_eq!(snr_scale(&unit_config()).unwrap(), 1.0, max_relative = 1e-15);

        let cfg = ScenarioConfig::baseline();
        let l = 1e-3 * (-2.7 * 25f64.ln()).exp();
        let expected = 0.8 * l * l * 0.5 / (0.5 * 1e-9);
        assert_relative_eq!(snr_scale(&cfg).unwrap(), expected, max_relative = 1e-13);
        assert_relative_eq!(snr_scale(&cfg).unwrap(), 2.2605e-5, max_relative = 1e-4);

        let third = snr_scale(&unit_config().with_alpha(1.0 / 3.0)).unwrap();
        let half = snr_scale(&unit_config().with_alpha(0.5)).unwrap();
        assert_relative_eq!(half, 2.0 * third, max_relative = 1e-14);
    }

    #[test]
    fn snr_examples() {
        assert_eq!(instantaneous_snr(1.0, 7.5), 7.5);
        assert_eq!(instantaneous_snr(0.0, 7.5), 0.0);
        assert_eq!(instantaneous_snr(2.0, 3.0), 48.0);
        assert_eq!(instantaneous_snr_two_links(2.0, 1.0, 3.0), 12.0);
    }

    #[test]
    fn validation() {
        assert!(ScenarioConfig::baseline().validate().is_ok());
        assert!(ScenarioConfig::baseline().with_alpha(1.0).validate().is_err());
        assert!(ScenarioConfig::baseline().with_alpha(0.0).validate().is_err());
        assert!(ScenarioConfig::baseline().with_power(0.0).validate().is_err());
        let mut cfg = ScenarioConfig::baseline();
        cfg.eta = 1.2;
        assert!(cfg.validate().is_err());
    }
}
