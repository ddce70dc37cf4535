//! TOML experiment configuration.
//!
//! Every section is optional; omitted keys take the simulation baseline
//! (UAV 25 m above the CH, `N = 10`, `W = 2λ`, `m = 2`, `η = 0.8`, `ρ = 2.7`,
//! `N0 = 1e-9 W`, `P_u = 1 W`, `α = 0.5`). Unknown keys are rejected.
//!
//! ```toml
//! [geometry]
//! distance = 25.0            # or uav = [x, y, h_u] and ch = [x, y, h]
//!
//! [pathloss]
//! beta_ref = 1e-3
//! rho = 2.7
//!
//! [fas]
//! n_ports = 10
//! width = 2.0                # in wavelengths
//!
//! [fading]
//! m = 2
//! sigma_sq = 1.0
//! uplink = "reciprocal"      # or "independent" (Monte Carlo only)
//!
//! [power]
//! p_u = 1.0
//! eta = 0.8
//! n0 = 1e-9
//! alpha = 0.5
//! t_slot = 1.0
//! p_c = 0.1
//! p_o = 79.86
//! p_i = 88.63
//!
//! [sweep]
//! parameter = "p_u"          # p_u | alpha | n_ports | width | m | d
//! values = [1, 10, 100]
//! methods = ["exact", "monte_carlo", "asymptotic"]
//! strategies = ["mgs", "rs"]
//! alpha_grid = 99
//! refine_tol = 1e-4
//!
//! [sweep.curves]             # one output curve per combination
//! n_ports = [10, 100]
//! distance = [25, 50]
//!
//! [mc]
//! trials = 1000000
//! seed = 1
//! ```

use crate::error::CliError;
use fasuav_core::channel::{FadingParams, FasGeometry, Geometry, PathLossParams};
use fasuav_core::energy::{AlphaSearch, PowerModel};
use fasuav_core::rate::{RateMethod, ScenarioConfig, UplinkMode};
use fasuav_core::selection::Strategy;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const DEFAULT_TRIALS: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;
/// Smallest trial count accepted when Monte Carlo is requested.
pub const MIN_TRIALS: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub geometry: GeometrySection,
    pub pathloss: PathLossSection,
    pub fas: FasSection,
    pub fading: FadingSection,
    pub power: PowerSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub mc: McSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uav: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ch: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathLossSection {
    pub beta_ref: f64,
    pub rho: f64,
}

impl Default for PathLossSection {
    fn default() -> Self {
        let p = PathLossParams::default();
        PathLossSection {
            beta_ref: p.beta_ref,
            rho: p.rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FasSection {
    pub n_ports: usize,
    pub width: f64,
}

impl Default for FasSection {
    fn default() -> Self {
        FasSection { n_ports: 10, width: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UplinkName {
    #[default]
    Reciprocal,
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FadingSection {
    pub m: u32,
    pub sigma_sq: f64,
    pub uplink: UplinkName,
}

impl Default for FadingSection {
    fn default() -> Self {
        FadingSection {
            m: 2,
            sigma_sq: 1.0,
            uplink: UplinkName::Reciprocal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerSection {
    pub p_u: f64,
    pub eta: f64,
    pub n0: f64,
    pub alpha: f64,
    pub t_slot: f64,
    pub p_c: f64,
    pub p_o: f64,
    pub p_i: f64,
}

impl Default for PowerSection {
    fn default() -> Self {
        let base = ScenarioConfig::baseline();
        let model = PowerModel::default();
        PowerSection {
            p_u: base.p_u,
            eta: base.eta,
            n0: base.n0,
            alpha: base.alpha,
            t_slot: base.t_slot,
            p_c: model.p_c,
            p_o: model.p_o,
            p_i: model.p_i,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    PU,
    Alpha,
    NPorts,
    Width,
    M,
    D,
}

impl SweepParameter {
    pub fn key(&self) -> &'static str {
        match self {
            SweepParameter::PU => "p_u",
            SweepParameter::Alpha => "alpha",
            SweepParameter::NPorts => "n_ports",
            SweepParameter::Width => "width",
            SweepParameter::M => "m",
            SweepParameter::D => "d",
        }
    }

    fn integral(&self) -> bool {
        matches!(self, SweepParameter::NPorts | SweepParameter::M)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Exact,
    MonteCarlo,
    Asymptotic,
}

impl From<MethodName> for RateMethod {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Exact => RateMethod::Exact,
            MethodName::MonteCarlo => RateMethod::MonteCarlo,
            MethodName::Asymptotic => RateMethod::Asymptotic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Mgs,
    Rs,
}

impl From<StrategyName> for Strategy {
    fn from(s: StrategyName) -> Self {
        match s {
            StrategyName::Mgs => Strategy::Mgs,
            StrategyName::Rs => Strategy::Rs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurvesSection {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n_ports: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub distance: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub width: Vec<f64>,
}

impl CurvesSection {
    pub fn is_empty(&self) -> bool {
        self.n_ports.is_empty() && self.distance.is_empty() && self.m.is_empty() && self.width.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<MethodName>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<StrategyName>>,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: usize,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
    #[serde(default, skip_serializing_if = "CurvesSection::is_empty")]
    pub curves: CurvesSection,
}

fn default_alpha_grid() -> usize {
    AlphaSearch::default().grid
}

fn default_refine_tol() -> f64 {
    AlphaSearch::default().refine_tol
}

impl SweepSection {
    pub fn new(parameter: SweepParameter, values: Vec<f64>) -> Self {
        SweepSection {
            parameter,
            values,
            methods: None,
            strategies: None,
            alpha_grid: default_alpha_grid(),
            refine_tol: default_refine_tol(),
            curves: CurvesSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub trials: usize,
    pub seed: u64,
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
        }
    }
}

/// A validated experiment: the operating point, power budget, sweep and Monte Carlo settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: ScenarioConfig,
    /// Aperture width in wavelengths, kept alongside `scenario.fas` so sweeps can rebuild it.
    pub width: f64,
    pub power: PowerModel,
    pub sweep: Option<SweepSection>,
    pub trials: usize,
    pub seed: u64,
}

fn config_err(key: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {detail}"))
}

fn core_at(key: &str) -> impl Fn(fasuav_core::Error) -> CliError + '_ {
    move |e| config_err(key, e)
}

impl ConfigFile {
    pub fn resolve(&self) -> Result<ExperimentSpec, CliError> {
        let g = &self.geometry;
        let geometry = match (g.distance, g.uav, g.ch) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(config_err("geometry", "give either distance or uav/ch positions, not both"))
            }
            (Some(d), None, None) => Geometry::vertical(d).map_err(core_at("geometry.distance"))?,
            (None, Some(uav), ch) => {
                Geometry::new(uav, ch.unwrap_or([0.0; 3])).map_err(core_at("geometry"))?
            }
            (None, None, Some(_)) => return Err(config_err("geometry.uav", "required when geometry.ch is given")),
            (None, None, None) => ScenarioConfig::baseline().geometry,
        };
        let path_loss =
            PathLossParams::new(self.pathloss.beta_ref, self.pathloss.rho).map_err(core_at("pathloss"))?;
        let fas = FasGeometry::new(self.fas.n_ports, self.fas.width).map_err(core_at("fas"))?;
        let fading = FadingParams::new(self.fading.m, self.fading.sigma_sq).map_err(core_at("fading"))?;
        let p = &self.power;
        let scenario = ScenarioConfig {
            geometry,
            path_loss,
            fas,
            fading,
            eta: p.eta,
            p_u: p.p_u,
            n0: p.n0,
            alpha: p.alpha,
            t_slot: p.t_slot,
            uplink_mode: match self.fading.uplink {
                UplinkName::Reciprocal => UplinkMode::Reciprocal,
                UplinkName::Independent => UplinkMode::Independent,
            },
        };
        check_range("power.alpha", p.alpha, |a| a > 0.0 && a < 1.0, "must lie in (0, 1)")?;
        check_range("power.eta", p.eta, |v| v > 0.0 && v <= 1.0, "must lie in (0, 1]")?;
        for (key, v) in [("power.p_u", p.p_u), ("power.n0", p.n0), ("power.t_slot", p.t_slot)] {
            check_range(key, v, |v| v > 0.0 && v.is_finite(), "must be positive")?;
        }
        scenario.validate().map_err(core_at("power"))?;
        let power = PowerModel::new(p.p_c, p.p_o, p.p_i).map_err(core_at("power"))?;

        let spec = ExperimentSpec {
            scenario,
            width: self.fas.width,
            power,
            sweep: self.sweep.clone(),
            trials: self.mc.trials,
            seed: self.mc.seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn check_range(key: &str, v: f64, ok: impl Fn(f64) -> bool, what: &str) -> Result<(), CliError> {
    if ok(v) {
        Ok(())
    } else {
        Err(config_err(key, format!("{what}, got {v}")))
    }
}

impl ExperimentSpec {
    /// Baseline scenario with no sweep.
    pub fn baseline() -> Self {
        ConfigFile::default().resolve().expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(config_err("mc.trials", "must be >= 1"));
        }
        let Some(sweep) = &self.sweep else {
            return Ok(());
        };
        if sweep.values.is_empty() {
            return Err(config_err("sweep.values", "must not be empty"));
        }
        if sweep.values.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(config_err("sweep.values", "must be strictly increasing"));
        }
        for &v in &sweep.values {
            if !v.is_finite() {
                return Err(config_err("sweep.values", format!("non-finite value {v}")));
            }
            if sweep.parameter.integral() && (v.fract() != 0.0 || v < 1.0) {
                return Err(config_err(
                    "sweep.values",
                    format!("{} takes positive integers, got {v}", sweep.parameter.key()),
                ));
            }
            apply_sweep(self, sweep.parameter, v).map_err(|e| match e {
                CliError::Config(msg) => config_err("sweep.values", msg),
                other => other,
            })?;
        }
        if matches!(&sweep.methods, Some(m) if m.is_empty()) {
            return Err(config_err("sweep.methods", "must not be empty"));
        }
        if matches!(&sweep.strategies, Some(s) if s.is_empty()) {
            return Err(config_err("sweep.strategies", "must not be empty"));
        }
        let mc_requested = sweep.methods.as_ref().is_none_or(|m| m.contains(&MethodName::MonteCarlo));
        if mc_requested && self.trials < MIN_TRIALS {
            return Err(config_err("mc.trials", format!("must be >= {MIN_TRIALS} for Monte Carlo, got {}", self.trials)));
        }
        AlphaSearch::new(sweep.alpha_grid, sweep.refine_tol).map_err(core_at("sweep"))?;
        for curve in curves(self)? {
            curve.apply(self)?;
        }
        Ok(())
    }

    pub fn search(&self) -> AlphaSearch {
        self.sweep
            .as_ref()
            .map(|s| AlphaSearch {
                grid: s.alpha_grid,
                refine_tol: s.refine_tol,
            })
            .unwrap_or_default()
    }

    /// Fully populated file form; reparsing it yields an identical spec.
    pub fn to_file(&self) -> ConfigFile {
        let s = &self.scenario;
        ConfigFile {
            geometry: GeometrySection {
                distance: None,
                uav: Some(s.geometry.uav_position),
                ch: Some(s.geometry.ch_position),
            },
            pathloss: PathLossSection {
                beta_ref: s.path_loss.beta_ref,
                rho: s.path_loss.rho,
            },
            fas: FasSection {
                n_ports: s.fas.n_ports(),
                width: self.width,
            },
            fading: FadingSection {
                m: s.fading.m,
                sigma_sq: s.fading.sigma_sq,
                uplink: match s.uplink_mode {
                    UplinkMode::Reciprocal => UplinkName::Reciprocal,
                    UplinkMode::Independent => UplinkName::Independent,
                },
            },
            power: PowerSection {
                p_u: s.p_u,
                eta: s.eta,
                n0: s.n0,
                alpha: s.alpha,
                t_slot: s.t_slot,
                p_c: self.power.p_c,
                p_o: self.power.p_o,
                p_i: self.power.p_i,
            },
            sweep: self.sweep.clone(),
            mc: McSection {
                trials: self.trials,
                seed: self.seed,
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("config serializes")
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentSpec, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string() + &span_hint(text, &e)))?;
    file.resolve()
}

fn span_hint(text: &str, e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].lines().count().max(1);
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Moves the UAV straight above the CH at distance `d`.
fn at_distance(geometry: &Geometry, d: f64) -> Result<Geometry, CliError> {
    let ch = geometry.ch_position;
    Geometry::new([ch[0], ch[1], d], ch).map_err(|e| CliError::Config(e.to_string()))
}

/// Applies one sweep value to the experiment's scenario.
pub fn apply_sweep(spec: &ExperimentSpec, parameter: SweepParameter, v: f64) -> Result<ScenarioConfig, CliError> {
    let mut cfg = spec.scenario;
    let cfg_err = |e: fasuav_core::Error| CliError::Config(e.to_string());
    match parameter {
        SweepParameter::PU => cfg.p_u = v,
        SweepParameter::Alpha => cfg.alpha = v,
        SweepParameter::NPorts => cfg.fas = FasGeometry::new(v as usize, spec.width).map_err(cfg_err)?,
        SweepParameter::Width => cfg.fas = FasGeometry::new(cfg.fas.n_ports(), v).map_err(cfg_err)?,
        SweepParameter::M => cfg.fading = FadingParams::new(v as u32, cfg.fading.sigma_sq).map_err(cfg_err)?,
        SweepParameter::D => cfg.geometry = at_distance(&cfg.geometry, v)?,
    }
    cfg.validate().map_err(cfg_err)?;
    Ok(cfg)
}

/// One curve of a multi-curve table: overrides applied on top of the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Curve {
    pub n_ports: Option<usize>,
    pub distance: Option<f64>,
    pub m: Option<u32>,
    pub width: Option<f64>,
}

impl Curve {
    /// Column suffix naming the overridden values, e.g. `_N10_d25`.
    pub fn suffix(&self) -> String {
        let mut s = String::new();
        if let Some(n) = self.n_ports {
            s += &format!("_N{n}");
        }
        if let Some(d) = self.distance {
            s += &format!("_d{d}");
        }
        if let Some(m) = self.m {
            s += &format!("_m{m}");
        }
        if let Some(w) = self.width {
            s += &format!("_W{w}");
        }
        s
    }

    /// The experiment with this curve's overrides baked into its scenario.
    pub fn apply(&self, spec: &ExperimentSpec) -> Result<ExperimentSpec, CliError> {
        let mut out = spec.clone();
        fn err(key: &'static str) -> impl Fn(fasuav_core::Error) -> CliError {
            move |e| config_err(key, e)
        }
        if let Some(w) = self.width {
            out.width = w;
        }
        if self.n_ports.is_some() || self.width.is_some() {
            let n = self.n_ports.unwrap_or(spec.scenario.fas.n_ports());
            out.scenario.fas = FasGeometry::new(n, out.width).map_err(err("sweep.curves"))?;
        }
        if let Some(m) = self.m {
            out.scenario.fading = FadingParams::new(m, spec.scenario.fading.sigma_sq).map_err(err("sweep.curves.m"))?;
        }
        if let Some(d) = self.distance {
            out.scenario.geometry =
                at_distance(&spec.scenario.geometry, d).map_err(|e| config_err("sweep.curves.distance", e))?;
        }
        Ok(out)
    }
}

/// Cartesian product of the requested curve overrides, in `n_ports`, `distance`, `m`, `width` order.
pub fn curves(spec: &ExperimentSpec) -> Result<Vec<Curve>, CliError> {
    let Some(sweep) = &spec.sweep else {
        return Ok(vec![Curve::default()]);
    };
    let c = &sweep.curves;
    fn opts<T: Copy>(v: &[T]) -> Vec<Option<T>> {
        if v.is_empty() {
            vec![None]
        } else {
            v.iter().copied().map(Some).collect()
        }
    }
    let mut out = Vec::new();
    for &n_ports in &opts(&c.n_ports) {
        for &distance in &opts(&c.distance) {
            for &m in &opts(&c.m) {
                for &width in &opts(&c.width) {
                    out.push(Curve {
                        n_ports,
                        distance,
                        m,
                        width,
                    });
                }
            }
        }
    }
    Ok(out)
}
