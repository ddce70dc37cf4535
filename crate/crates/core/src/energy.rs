//! Harvested energy, UAV power budget and energy efficiency.
//!
//! The UAV is hovering, so its consumption is the constant
//! `P_tot = P_c + P_u + P_o + P_i` (circuit, transmit, blade profile, induced).
//! `P_u` enters the budget in full even though the amplifier only radiates for
//! `αT` of each slot.
//!
//! Energy efficiency is `ζ = R(α*) / P_tot` where `α*` maximises the ergodic
//! rate. The search scans a uniform grid over `(0, 1)` and then runs a
//! golden-section refinement around the best grid point.

use crate::error::{Error, Result};
use crate::rate::{
    draw_gain_products, exact_rate_for_nu, outer_tolerance, rate_from_products, snr_scale, McOptions, RateResult,
    ScenarioConfig, UplinkMode,
};
use crate::selection::{inner_tolerance, MaxEnvelopeLaw};

/// Non-transmit consumption of the hovering UAV, in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub p_c: f64,
    pub p_o: f64,
    pub p_i: f64,
}

impl Default for PowerModel {
    /// 0.1 W circuit power; 79.86 W blade profile and 88.63 W induced power at hover.
    fn default() -> Self {
        PowerModel {
            p_c: 0.1,
            p_o: 79.86,
            p_i: 88.63,
        }
    }
}

impl PowerModel {
    pub fn new(p_c: f64, p_o: f64, p_i: f64) -> Result<Self> {
        let model = PowerModel { p_c, p_o, p_i };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_c", self.p_c), ("p_o", self.p_o), ("p_i", self.p_i)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain("PowerModel", format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Hover power `P_o + P_i`.
    pub fn hover(&self) -> f64 {
        self.p_o + self.p_i
    }

    pub fn total(&self, p_u: f64) -> Result<f64> {
        total_power(self, p_u)
    }
}

/// `P_c + P_u + P_o + P_i`.
pub fn total_power(model: &PowerModel, p_u: f64) -> Result<f64> {
    model.validate()?;
    if !(p_u > 0.0) || !p_u.is_finite() {
        return Err(Error::domain("total_power", format!("p_u must be positive, got {p_u}")));
    }
    Ok(model.p_c + p_u + model.hover())
}

/// Energy harvested over `αT`: `η P_u L(d) |h|² α T` joules.
pub fn harvested_energy(cfg: &ScenarioConfig, envelope: f64) -> Result<f64> {
    if !(envelope >= 0.0) {
        return Err(Error::domain("harvested_energy", format!("envelope must be >= 0, got {envelope}")));
    }
    cfg.validate()?;
    Ok(cfg.eta * cfg.p_u * cfg.path_gain()? * envelope * envelope * cfg.alpha * cfg.t_slot)
}

/// `ζ = rate / p_total`.
pub fn energy_efficiency(rate: f64, p_total: f64) -> Result<f64> {
    if !(p_total > 0.0) {
        return Err(Error::domain("energy_efficiency", format!("p_total must be positive, got {p_total}")));
    }
    Ok(rate / p_total)
}

/// Grid density and refinement width for the `α` search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSearch {
    pub grid: usize,
    pub refine_tol: f64,
}

impl Default for AlphaSearch {
    fn default() -> Self {
        AlphaSearch {
            grid: 99,
            refine_tol: 1e-4,
        }
    }
}

impl AlphaSearch {
    pub fn new(grid: usize, refine_tol: f64) -> Result<Self> {
        let s = AlphaSearch { grid, refine_tol };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 8 {
            return Err(Error::domain("AlphaSearch", format!("grid must be >= 8, got {}", self.grid)));
        }
        if !(self.refine_tol > 0.0 && self.refine_tol < 0.1) {
            return Err(Error::domain(
                "AlphaSearch",
                format!("refine_tol must lie in (0, 0.1), got {}", self.refine_tol),
            ));
        }
        Ok(())
    }

    pub fn grid_points(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.grid).map(move |i| i as f64 / (self.grid + 1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyResult {
    pub alpha_star: f64,
    pub rate_at_optimum: f64,
    /// Standard error of `rate_at_optimum` (zero for exact evaluation).
    pub rate_std_error: f64,
    pub p_total: f64,
    pub zeta: f64,
    /// Standard error of `zeta`.
    pub zeta_std_error: f64,
    /// The coarse grid showed more than one local maximum.
    pub multimodal: bool,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximises `rate_at(α)` over `(0, 1)` and reports `ζ` against `p_total`.
pub fn optimize_alpha<F>(mut rate_at: F, search: &AlphaSearch, p_total: f64) -> Result<EfficiencyResult>
where
    F: FnMut(f64) -> Result<RateResult>,
{
    search.validate()?;
    let grid: Vec<f64> = search.grid_points().collect();
    let values = grid.iter().map(|&a| rate_at(a)).collect::<Result<Vec<_>>>()?;
    if values.iter().all(|r| r.rate == 0.0) {
        return Err(Error::Degenerate("ergodic rate is zero at every grid value of alpha".into()));
    }
    let best = (0..values.len()).fold(0, |b, i| if values[i].rate > values[b].rate { i } else { b });

    let n = values.len();
    let peaks = (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i].rate > values[i - 1].rate;
            let right = i + 1 == n || values[i].rate >= values[i + 1].rate;
            left && right
        })
        .count();
    let multimodal = peaks > 1;
    if multimodal {
        log::warn!("rate over alpha shows {peaks} local maxima on the grid; refining the largest");
    }

    let step = 1.0 / (search.grid + 1) as f64;
    let mut lo = grid[best] - step;
    let mut hi = grid[best] + step;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = rate_at(x1)?;
    let mut f2 = rate_at(x2)?;
    while hi - lo > search.refine_tol {
        if f1.rate >= f2.rate {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = rate_at(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = rate_at(x2)?;
        }
    }
    let (mut alpha_star, mut at_star) = if f1.rate >= f2.rate { (x1, f1) } else { (x2, f2) };
    if values[best].rate > at_star.rate {
        alpha_star = grid[best];
        at_star = values[best];
    }

    Ok(EfficiencyResult {
        alpha_star,
        rate_at_optimum: at_star.rate,
        rate_std_error: at_star.std_error,
        p_total,
        zeta: energy_efficiency(at_star.rate, p_total)?,
        zeta_std_error: at_star.std_error / p_total,
        multimodal,
    })
}

/// `α` search on the exact rate. The `alpha` field of `cfg` is ignored.
pub fn optimize_alpha_exact(cfg: &ScenarioConfig, power: &PowerModel, search: &AlphaSearch) -> Result<EfficiencyResult> {
    if cfg.uplink_mode != UplinkMode::Reciprocal {
        return Err(Error::Unsupported("exact alpha search requires a reciprocal uplink".into()));
    }
    let law = MaxEnvelopeLaw::new(&cfg.fas, &cfg.fading, inner_tolerance())?;
    let tol = outer_tolerance();
    let p_total = power.total(cfg.p_u)?;
    optimize_alpha(
        |alpha| {
            let nu = snr_scale(&cfg.with_alpha(alpha))?;
            let rate = exact_rate_for_nu(&law, nu, alpha, &tol)?;
            Ok(RateResult::deterministic(rate, crate::rate::RateMethod::Exact))
        },
        search,
        p_total,
    )
}

/// `α` search on a Monte Carlo estimate. One set of channel draws is shared by
/// every candidate `α`, so the estimated rate curve is smooth in `α`.
pub fn optimize_alpha_mc(
    cfg: &ScenarioConfig,
    power: &PowerModel,
    search: &AlphaSearch,
    opts: &McOptions,
) -> Result<EfficiencyResult> {
    let products = draw_gain_products(cfg, opts)?;
    let p_total = power.total(cfg.p_u)?;
    optimize_alpha(
        |alpha| Ok(rate_from_products(&products, snr_scale(&cfg.with_alpha(alpha))?, alpha)),
        search,
        p_total,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{FadingParams, FasGeometry, Geometry, PathLossParams};
    use crate::rate::{ergodic_rate_exact, RateMethod};
    use crate::selection::Strategy;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::LN_2;

    fn unit_config() -> ScenarioConfig {
        ScenarioConfig {
            geometry: Geometry::vertical(1.0).unwrap(),
            path_loss: PathLossParams::new(1.0, 2.0).unwrap(),
            fas: FasGeometry::new(1, 0.0).unwrap(),
            fading: FadingParams::new(1, 1.0).unwrap(),
            eta: 1.0,
            p_u: 1.0,
            n0: 1.0,
            alpha: 0.5,
            ..ScenarioConfig::baseline()
        }
    }

    #[test]
    fn harvested_energy_examples() {
        assert_relative_eq!(harvested_energy(&unit_config(), 1.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_eq!(harvested_energy(&unit_config(), 0.0).unwrap(), 0.0);
        let base = ScenarioConfig::baseline();
        let l = base.path_gain().unwrap();
        assert_relative_eq!(harvested_energy(&base, 1.0).unwrap(), 0.8 * l * 0.5, max_relative = 1e-15);
        assert_relative_eq!(harvested_energy(&base, 1.0).unwrap(), 6.725e-8, max_relative = 1e-3);
        assert!(harvested_energy(&base, -1.0).is_err());
    }

    #[test]
    fn power_budget() {
        let zero = PowerModel::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(total_power(&zero, 1.0).unwrap(), 1.0);
        assert_relative_eq!(total_power(&PowerModel::default(), 1.0).unwrap(), 169.59, max_relative = 1e-12);
        let m = PowerModel::default();
        assert_relative_eq!(m.total(6.0).unwrap() - m.total(3.0).unwrap(), 3.0, max_relative = 1e-12);
        assert!(PowerModel::new(-1.0, 0.0, 0.0).is_err());
        assert!(total_power(&m, 0.0).is_err());
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(energy_efficiency(1.0, 100.0).unwrap(), 0.01);
        assert_eq!(energy_efficiency(0.0, 100.0).unwrap(), 0.0);
        assert_relative_eq!(
            energy_efficiency(2.0, 300.0).unwrap(),
            energy_efficiency(2.0, 100.0).unwrap() / 3.0,
            max_relative = 1e-15
        );
        assert!(energy_efficiency(1.0, 0.0).is_err());
    }

    // (1-α)/ln2 ∫ e^{-y} 2νy/(1+νy²) dy, composite Simpson on [0, 50]
    fn rayleigh_rate(nu: f64, alpha: f64) -> f64 {
        let n = 4000;
        let h = 50.0 / n as f64;
        let f = |y: f64| (-y).exp() * 2.0 * nu * y / (1.0 + nu * y * y);
        let mut s = f(0.0) + f(50.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        (1.0 - alpha) / LN_2 * s * h / 3.0
    }

    #[test]
    fn alpha_star_matches_brute_force_grid() {
        let cfg = unit_config();
        let search = AlphaSearch::new(16, 1e-3).unwrap();
        let res = optimize_alpha_exact(&cfg, &PowerModel::default(), &search).unwrap();
        let brute = (1..10_000)
            .map(|i| i as f64 / 10_000.0)
            .map(|a| (a, rayleigh_rate(a / (1.0 - a), a)))
            .fold((0.0, f64::MIN), |b, p| if p.1 > b.1 { p } else { b });
        assert_abs_diff_eq!(res.alpha_star, brute.0, epsilon = 1e-3);
        assert_relative_eq!(res.rate_at_optimum, brute.1, max_relative = 1e-5);
        assert!(!res.multimodal);
        assert_relative_eq!(res.zeta, res.rate_at_optimum / 169.59, max_relative = 1e-12);
    }

    #[test]
    fn grid_doubling_invariance() {
        let cfg = ScenarioConfig::baseline();
        let power = PowerModel::default();
        let a = optimize_alpha_exact(&cfg, &power, &AlphaSearch::new(20, 1e-4).unwrap()).unwrap();
        let b = optimize_alpha_exact(&cfg, &power, &AlphaSearch::new(40, 1e-4).unwrap()).unwrap();
        assert_abs_diff_eq!(a.alpha_star, b.alpha_star, epsilon = 1e-4);
        assert!(a.alpha_star > 0.0 && a.alpha_star < 1.0);
    }

    #[test]
    fn endpoints_below_midpoint() {
        // needs an SNR where the transmit phase matters; at the 25 m baseline
        // the rate keeps rising almost all the way to alpha = 1
        let cfg = ScenarioConfig::baseline().with_power(1e5);
        let mid = ergodic_rate_exact(&cfg, &outer_tolerance()).unwrap().rate;
        for a in [1e-3, 1.0 - 1e-3] {
            assert!(ergodic_rate_exact(&cfg.with_alpha(a), &outer_tolerance()).unwrap().rate < mid);
        }
    }

    #[test]
    fn degenerate_rate_rejected() {
        let search = AlphaSearch::default();
        let r = optimize_alpha(|_| Ok(RateResult::deterministic(0.0, RateMethod::Exact)), &search, 1.0);
        assert!(matches!(r, Err(Error::Degenerate(_))));
        assert!(AlphaSearch::new(4, 1e-3).is_err());
        assert!(AlphaSearch::new(16, 0.2).is_err());
    }

    #[test]
    fn bimodal_curve_flagged() {
        let f = |a: f64| {
            let r = (-(a - 0.2f64).powi(2) / 0.002).exp() + 1.2 * (-(a - 0.7f64).powi(2) / 0.002).exp();
            Ok(RateResult::deterministic(r, RateMethod::Exact))
        };
        let res = optimize_alpha(f, &AlphaSearch::new(50, 1e-5).unwrap(), 1.0).unwrap();
        assert!(res.multimodal);
        assert_abs_diff_eq!(res.alpha_star, 0.7, epsilon = 1e-4);
    }

    #[test]
    fn mc_search_mgs_beats_rs() {
        let cfg = ScenarioConfig::baseline();
        let power = PowerModel::default();
        let search = AlphaSearch::default();
        let opts = McOptions::new(20_000, 11);
        let mgs = optimize_alpha_mc(&cfg, &power, &search, &opts).unwrap();
        let rs = optimize_alpha_mc(&cfg, &power, &search, &opts.with_strategy(Strategy::Rs)).unwrap();
        assert!(mgs.zeta > rs.zeta);
        assert!(mgs.zeta_std_error > 0.0);
    }
}
