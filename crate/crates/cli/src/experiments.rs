//! Sweep runners producing the rate and energy-efficiency tables.

use crate::config::{
    apply_sweep, curves, Curve, ExperimentSpec, MethodName, StrategyName, SweepParameter, SweepSection,
};
use crate::error::CliError;
use crate::table::ResultTable;
use fasuav_core::channel::FasGeometry;
use fasuav_core::energy::{optimize_alpha_exact, optimize_alpha_mc, EfficiencyResult};
use fasuav_core::rate::{
    draw_gain_products, ergodic_rate_asymptotic, exact_rate_for_nu, outer_tolerance, rate_from_products, snr_scale,
    McOptions, ScenarioConfig, UplinkMode,
};
use fasuav_core::selection::{inner_tolerance, MaxEnvelopeLaw, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    RateVsPower,
    RateVsAlpha,
    EeVsPorts,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::RateVsPower => "rate-vs-power",
            Command::RateVsAlpha => "rate-vs-alpha",
            Command::EeVsPorts => "ee-vs-ports",
        }
    }

    pub fn parameter(&self) -> SweepParameter {
        match self {
            Command::RateVsPower => SweepParameter::PU,
            Command::RateVsAlpha => SweepParameter::Alpha,
            Command::EeVsPorts => SweepParameter::NPorts,
        }
    }

    /// Sweep used when the configuration has none.
    pub fn default_sweep(&self) -> SweepSection {
        match self {
            Command::RateVsPower => {
                SweepSection::new(SweepParameter::PU, (0..=6).map(|k| 10f64.powi(k)).collect())
            }
            Command::RateVsAlpha => {
                let mut s = SweepSection::new(SweepParameter::Alpha, (1..100).map(|i| i as f64 / 100.0).collect());
                s.curves.n_ports = vec![10, 100];
                s.curves.distance = vec![25.0, 50.0];
                s
            }
            Command::EeVsPorts => {
                let mut s = SweepSection::new(SweepParameter::NPorts, vec![10.0, 20.0, 40.0, 80.0, 160.0]);
                s.curves.width = vec![2.0, 0.2];
                s.curves.distance = vec![25.0, 50.0];
                s
            }
        }
    }

    fn default_methods(&self) -> Vec<MethodName> {
        match self {
            Command::EeVsPorts => vec![MethodName::MonteCarlo],
            _ => vec![MethodName::Exact, MethodName::MonteCarlo, MethodName::Asymptotic],
        }
    }

    fn default_strategies(&self) -> Vec<StrategyName> {
        match self {
            Command::EeVsPorts => vec![StrategyName::Mgs, StrategyName::Rs],
            _ => vec![StrategyName::Mgs],
        }
    }

    /// The spec with this command's defaults filled in, as recorded in CSV headers.
    pub fn effective_spec(&self, spec: &ExperimentSpec) -> Result<ExperimentSpec, CliError> {
        let mut out = spec.clone();
        let mut sweep = spec.sweep.clone().unwrap_or_else(|| self.default_sweep());
        if sweep.parameter != self.parameter() {
            return Err(CliError::Config(format!(
                "sweep.parameter: {} expects \"{}\", got \"{}\"",
                self.name(),
                self.parameter().key(),
                sweep.parameter.key()
            )));
        }
        sweep.methods.get_or_insert_with(|| self.default_methods());
        sweep.strategies.get_or_insert_with(|| self.default_strategies());
        if *self == Command::EeVsPorts
            && sweep.methods.as_ref().is_some_and(|m| m.contains(&MethodName::Asymptotic))
        {
            return Err(CliError::Config(
                "sweep.methods: ee-vs-ports supports exact and monte_carlo".into(),
            ));
        }
        out.sweep = Some(sweep);
        out.validate()?;
        Ok(out)
    }
}

/// Runs a command and returns the effective spec with its table.
pub fn run(command: Command, spec: &ExperimentSpec) -> Result<(ExperimentSpec, ResultTable), CliError> {
    let spec = command.effective_spec(spec)?;
    let table = match command {
        Command::RateVsPower | Command::RateVsAlpha => rate_table(&spec, command == Command::RateVsAlpha)?,
        Command::EeVsPorts => ee_table(&spec)?,
    };
    Ok((spec, table))
}

/// Runs a command and renders its CSV, header comment included.
pub fn run_to_csv(command: Command, spec: &ExperimentSpec) -> Result<String, CliError> {
    let (spec, table) = run(command, spec)?;
    table.to_csv(&header_comment(command, &spec))
}

pub fn header_comment(command: Command, spec: &ExperimentSpec) -> String {
    format!(
        "{} {} {}\nseed = {}\n{}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        command.name(),
        spec.seed,
        spec.to_toml()
    )
}

fn sweep_of(spec: &ExperimentSpec) -> &SweepSection {
    spec.sweep.as_ref().expect("effective spec has a sweep")
}

fn strategies(sweep: &SweepSection) -> Vec<Strategy> {
    sweep.strategies.as_deref().unwrap_or(&[]).iter().map(|&s| s.into()).collect()
}

fn has(sweep: &SweepSection, m: MethodName) -> bool {
    sweep.methods.as_deref().unwrap_or(&[]).contains(&m)
}

fn context(param: SweepParameter, v: f64, curve: &Curve) -> String {
    format!("{}={v}{}", param.key(), curve.suffix())
}

/// Scenario seen by a strategy: random selection is a single marginal port.
fn as_seen_by(cfg: &ScenarioConfig, strategy: Strategy) -> Result<ScenarioConfig, fasuav_core::Error> {
    let mut out = *cfg;
    if strategy == Strategy::Rs {
        out.fas = FasGeometry::new(1, 0.0)?;
    }
    Ok(out)
}

/// Reuses Monte Carlo draws across consecutive rows whose channel statistics agree.
struct ProductCache {
    key: Option<(usize, u64, u32, u64, UplinkMode)>,
    products: Vec<f64>,
}

impl ProductCache {
    fn new() -> Self {
        ProductCache {
            key: None,
            products: Vec::new(),
        }
    }

    fn get(&mut self, cfg: &ScenarioConfig, opts: &McOptions) -> Result<&[f64], fasuav_core::Error> {
        let key = (
            cfg.fas.n_ports(),
            cfg.fas.mu().to_bits(),
            cfg.fading.m,
            cfg.fading.sigma_sq.to_bits(),
            cfg.uplink_mode,
        );
        if self.key != Some(key) {
            self.products = draw_gain_products(cfg, opts)?;
            self.key = Some(key);
        }
        Ok(&self.products)
    }
}

struct LawCache {
    key: Option<(usize, u64, u32, u64)>,
    law: Option<MaxEnvelopeLaw>,
}

impl LawCache {
    fn get(&mut self, cfg: &ScenarioConfig) -> Result<&MaxEnvelopeLaw, fasuav_core::Error> {
        let key = (cfg.fas.n_ports(), cfg.fas.mu().to_bits(), cfg.fading.m, cfg.fading.sigma_sq.to_bits());
        if self.key != Some(key) || self.law.is_none() {
            self.law = Some(MaxEnvelopeLaw::new(&cfg.fas, &cfg.fading, inner_tolerance())?);
            self.key = Some(key);
        }
        Ok(self.law.as_ref().expect("law cached"))
    }
}

fn rate_columns(sweep: &SweepSection, strategy: Strategy, suffix: &str) -> Vec<String> {
    let tag = if strategy == Strategy::Mgs { String::new() } else { format!("_{}", strategy.label()) };
    let mut cols = Vec::new();
    if has(sweep, MethodName::Exact) {
        cols.push(format!("rate_exact{tag}{suffix}"));
    }
    if has(sweep, MethodName::MonteCarlo) {
        cols.push(format!("rate_mc{tag}{suffix}"));
        cols.push(format!("rate_mc{tag}_stderr{suffix}"));
    }
    if has(sweep, MethodName::Asymptotic) {
        cols.push(format!("rate_asymptotic{tag}{suffix}"));
    }
    cols
}

fn rate_table(spec: &ExperimentSpec, mark_peak: bool) -> Result<ResultTable, CliError> {
    let sweep = sweep_of(spec);
    let curves = curves(spec)?;
    let strategies = strategies(sweep);
    let mut columns = vec!["sweep_value".to_string()];
    for curve in &curves {
        let suffix = curve.suffix();
        for &s in &strategies {
            columns.extend(rate_columns(sweep, s, &suffix));
        }
        if mark_peak {
            columns.push(format!("peak{suffix}"));
        }
    }

    // column blocks are filled curve by curve, then stitched row-wise
    let n_rows = sweep.values.len();
    let mut blocks: Vec<Vec<Vec<f64>>> = Vec::new();
    for curve in &curves {
        let curve_spec = curve.apply(spec)?;
        let mut block = vec![Vec::new(); n_rows];
        for &strategy in &strategies {
            let mut products = ProductCache::new();
            let mut laws = LawCache { key: None, law: None };
            let opts = McOptions::new(spec.trials, spec.seed).with_strategy(strategy);
            for (row, &v) in sweep.values.iter().enumerate() {
                let ctx = || context(sweep.parameter, v, curve);
                let cfg = apply_sweep(&curve_spec, sweep.parameter, v)?;
                let nu = snr_scale(&cfg).map_err(CliError::numeric(ctx()))?;
                if has(sweep, MethodName::Exact) {
                    if cfg.uplink_mode != UplinkMode::Reciprocal {
                        return Err(CliError::Config(
                            "sweep.methods: exact rates need fading.uplink = \"reciprocal\"".into(),
                        ));
                    }
                    let seen = as_seen_by(&cfg, strategy).map_err(CliError::numeric(ctx()))?;
                    let law = laws.get(&seen).map_err(CliError::numeric(ctx()))?;
                    let r = exact_rate_for_nu(law, nu, cfg.alpha, &outer_tolerance()).map_err(CliError::numeric(ctx()))?;
                    block[row].push(r);
                }
                if has(sweep, MethodName::MonteCarlo) {
                    let x = products.get(&cfg, &opts).map_err(CliError::numeric(ctx()))?;
                    let r = rate_from_products(x, nu, cfg.alpha);
                    block[row].push(r.rate);
                    block[row].push(r.std_error);
                }
                if has(sweep, MethodName::Asymptotic) {
                    let seen = as_seen_by(&cfg, strategy).map_err(CliError::numeric(ctx()))?;
                    let r = ergodic_rate_asymptotic(&seen).map_err(CliError::numeric(ctx()))?;
                    block[row].push(r.rate);
                }
            }
        }
        if mark_peak {
            // first rate column of the curve (exact if present, else Monte Carlo, else asymptote)
            let peak = (0..n_rows).fold(0, |b, i| if block[i][0] > block[b][0] { i } else { b });
            for (i, row) in block.iter_mut().enumerate() {
                row.push(if i == peak { 1.0 } else { 0.0 });
            }
        }
        blocks.push(block);
    }

    let mut table = ResultTable::new(columns);
    for (row, &v) in sweep.values.iter().enumerate() {
        let mut r = vec![v];
        for block in &blocks {
            r.extend_from_slice(&block[row]);
        }
        table.push(r);
    }
    Ok(table)
}

fn ee_table(spec: &ExperimentSpec) -> Result<ResultTable, CliError> {
    let sweep = sweep_of(spec);
    let curves = curves(spec)?;
    let strategies = strategies(sweep);
    let search = spec.search();
    let mut methods = Vec::new();
    if has(sweep, MethodName::MonteCarlo) {
        methods.push(MethodName::MonteCarlo);
    }
    if has(sweep, MethodName::Exact) {
        methods.push(MethodName::Exact);
    }

    let mut columns = vec!["n_ports".to_string()];
    for curve in &curves {
        let suffix = curve.suffix();
        for &method in &methods {
            let tag = if method == MethodName::Exact { "_exact" } else { "" };
            for s in &strategies {
                columns.push(format!("zeta{tag}_{}{suffix}", s.label()));
            }
            for s in &strategies {
                columns.push(format!("alpha_star{tag}_{}{suffix}", s.label()));
            }
            if method == MethodName::MonteCarlo {
                for s in &strategies {
                    columns.push(format!("zeta_{}_stderr{suffix}", s.label()));
                }
            }
        }
    }

    let mut table = ResultTable::new(columns);
    for &v in &sweep.values {
        let mut row = vec![v];
        for curve in &curves {
            let curve_spec = curve.apply(spec)?;
            let cfg = apply_sweep(&curve_spec, sweep.parameter, v)?;
            let ctx = context(sweep.parameter, v, curve);
            for &method in &methods {
                let results = strategies
                    .iter()
                    .map(|&s| -> Result<EfficiencyResult, fasuav_core::Error> {
                        match method {
                            MethodName::Exact => optimize_alpha_exact(&as_seen_by(&cfg, s)?, &spec.power, &search),
                            _ => optimize_alpha_mc(
                                &cfg,
                                &spec.power,
                                &search,
                                &McOptions::new(spec.trials, spec.seed).with_strategy(s),
                            ),
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(CliError::numeric(ctx.clone()))?;
                row.extend(results.iter().map(|r| r.zeta));
                row.extend(results.iter().map(|r| r.alpha_star));
                if method == MethodName::MonteCarlo {
                    row.extend(results.iter().map(|r| r.zeta_std_error));
                }
            }
        }
        table.push(row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn wrong_sweep_parameter_rejected() {
        let spec = parse_config("[sweep]\nparameter = \"alpha\"\nvalues = [0.5]\n").unwrap();
        assert!(matches!(run(Command::RateVsPower, &spec), Err(CliError::Config(_))));
    }

    #[test]
    fn rate_columns_follow_methods() {
        let spec = parse_config(
            "[sweep]\nparameter = \"p_u\"\nvalues = [1, 100]\nmethods = [\"exact\", \"asymptotic\"]\nstrategies = [\"mgs\", \"rs\"]\n",
        )
        .unwrap();
        let (_, t) = run(Command::RateVsPower, &spec).unwrap();
        assert_eq!(
            t.columns,
            ["sweep_value", "rate_exact", "rate_asymptotic", "rate_exact_rs", "rate_asymptotic_rs"]
        );
        assert_eq!(t.rows.len(), 2);
        let rs = t.column("rate_exact_rs").unwrap();
        let mgs = t.column("rate_exact").unwrap();
        assert!(mgs.iter().zip(&rs).all(|(a, b)| a > b));
    }

    #[test]
    fn alpha_table_marks_one_peak_per_curve() {
        let spec = parse_config(
            "[sweep]\nparameter = \"alpha\"\nvalues = [0.2, 0.5, 0.8]\nmethods = [\"exact\"]\n[sweep.curves]\ndistance = [25.0, 50.0]\n[power]\np_u = 1e5\n",
        )
        .unwrap();
        let (_, t) = run(Command::RateVsAlpha, &spec).unwrap();
        for name in ["peak_d25", "peak_d50"] {
            assert_eq!(t.column(name).unwrap().iter().sum::<f64>(), 1.0);
        }
    }
}
