//! Built-in validation suite.
//!
//! Nine numbered criteria cover the special functions, the selected-envelope
//! CDF, the three rate evaluators, the energy-efficiency trends and output
//! determinism. Each criterion is a list of checks of the form
//! `measured <= limit` or `measured >= limit`, plus a wall-clock budget.

use crate::config::{parse_config, ExperimentSpec};
use crate::error::CliError;
use crate::experiments::{run_to_csv, Command};
use fasuav_core::channel::{marginal_envelope_cdf, port_correlation, FadingParams, FasGeometry, Geometry, PathLossParams};
use fasuav_core::energy::{optimize_alpha_mc, AlphaSearch, PowerModel};
use fasuav_core::rate::monte_carlo::mean_log_snr_from_products;
use fasuav_core::rate::{
    asymptotic_params, draw_gain_products, ergodic_rate_exact, ergodic_rate_mc, outer_tolerance, snr_scale,
    McOptions, ScenarioConfig,
};
use fasuav_core::selection::{inner_tolerance, MaxEnvelopeLaw, Strategy};
use fasuav_core::specfun::{bessel_j0, digamma, euler_gamma, ln_gamma, marcum_q, reg_lower_gamma};
use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

pub const CRITERIA: [u32; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

/// Sample sizes and the structural-constant perturbation used by the suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Samples for the selected-envelope CDF comparison.
    pub cdf_samples: usize,
    /// Trials for exact-vs-Monte-Carlo rate and mean-log checks.
    pub rate_trials: usize,
    /// Trials per point for the energy-efficiency trends.
    pub trend_trials: usize,
    pub seed: u64,
    /// Multiplier applied to `a0` before any asymptote is evaluated; 1 in normal runs.
    pub a0_factor: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self::with_trials(100_000)
    }
}

impl ValidationOptions {
    /// Sample sizes stated by the acceptance criteria.
    pub fn acceptance() -> Self {
        ValidationOptions {
            cdf_samples: 1_000_000,
            rate_trials: 1_000_000,
            trend_trials: 100_000,
            seed: 20_240_601,
            a0_factor: 1.0,
        }
    }

    /// Same trial count for every Monte Carlo check.
    pub fn with_trials(trials: usize) -> Self {
        ValidationOptions {
            cdf_samples: trials,
            rate_trials: trials,
            trend_trials: trials,
            ..Self::acceptance()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub relation: Relation,
    pub limit: f64,
}

impl Check {
    pub fn at_most(label: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check {
            label: label.into(),
            measured,
            relation: Relation::AtMost,
            limit,
        }
    }

    pub fn at_least(label: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check {
            label: label.into(),
            measured,
            relation: Relation::AtLeast,
            limit,
        }
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.measured <= self.limit,
            Relation::AtLeast => self.measured >= self.limit,
        }
    }

    pub fn describe(&self) -> String {
        let op = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        format!("{}: {:.4e} {op} {:.4e}", self.label, self.measured, self.limit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.within_budget() && self.checks.iter().all(Check::passed)
    }

    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    /// One line: status, id, title, failing (or last) check and timing.
    pub fn summary(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let n_ok = self.checks.iter().filter(|c| c.passed()).count();
        let shown = self
            .failures()
            .next()
            .or(self.checks.last())
            .map(Check::describe)
            .unwrap_or_default();
        let budget_note = if self.within_budget() { "" } else { " (over budget)" };
        format!(
            "[{status}] criterion {} {}: {n_ok}/{} checks, {:.1}s of {}s{budget_note}; {shown}",
            self.id,
            self.title,
            self.checks.len(),
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

pub fn run_criterion(id: u32, opts: &ValidationOptions) -> Result<CriterionReport, CliError> {
    let start = Instant::now();
    let (title, budget, checks) = match id {
        1 => ("special functions", 5, special_functions()?),
        2 => ("selected-envelope CDF reductions", 30, cdf_reductions()?),
        3 => ("selected-envelope CDF vs Monte Carlo", 300, cdf_vs_monte_carlo(opts)?),
        4 => ("exact rate vs single-port oracle", 10, exact_vs_oracle()?),
        5 => ("exact rate vs Monte Carlo", 600, exact_vs_monte_carlo(opts)?),
        6 => ("high-SNR asymptote convergence", 300, asymptote_convergence(opts)?),
        7 => ("mean log-SNR vs Monte Carlo", 120, mean_log_vs_monte_carlo(opts)?),
        8 => ("energy-efficiency trends", 900, efficiency_trends(opts)?),
        9 => ("CSV determinism", 60, determinism()?),
        _ => return Err(CliError::Config(format!("no criterion {id}"))),
    };
    Ok(CriterionReport {
        id,
        title,
        checks,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget),
    })
}

pub fn run_all(opts: &ValidationOptions) -> Result<Vec<CriterionReport>, CliError> {
    CRITERIA.iter().map(|&id| run_criterion(id, opts)).collect()
}

/// Full report: one summary line per criterion followed by every check.
pub fn render_report(reports: &[CriterionReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "{}", r.summary());
    }
    let _ = writeln!(out);
    for r in reports {
        let _ = writeln!(out, "criterion {} ({}):", r.id, r.title);
        for c in &r.checks {
            let mark = if c.passed() { "ok  " } else { "FAIL" };
            let _ = writeln!(out, "  {mark} {}", c.describe());
        }
    }
    out
}

fn num(e: fasuav_core::Error) -> CliError {
    CliError::Numeric {
        context: "validation".into(),
        source: e,
    }
}

// ---------------------------------------------------------------------------
// oracles

/// Ascending power series of J0.
fn j0_series(x: f64) -> f64 {
    let q = -x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `(1-α)/ln2 ∫ e^{-y} 2νy/(1+νy²) dy`: single Rayleigh port, reciprocal link.
fn single_port_rate_oracle(nu: f64, alpha: f64) -> f64 {
    let upper = 60.0;
    let n = 600_000;
    let h = upper / n as f64;
    let f = |y: f64| (-y).exp() * 2.0 * nu * y / (1.0 + nu * y * y);
    let mut s = f(0.0) + f(upper);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    (1.0 - alpha) / LN_2 * s * h / 3.0
}

fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    // f(lo) < 0 <= f(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Quantile of a CDF on `[0, ∞)`.
fn quantile(q: f64, cdf: impl Fn(f64) -> f64) -> f64 {
    let mut hi = 1.0;
    while cdf(hi) < q {
        hi *= 2.0;
    }
    bisect(0.0, hi, |x| cdf(x) - q)
}

fn quantile_levels() -> impl Iterator<Item = f64> {
    (1..=20).map(|j| (j as f64 - 0.5) / 20.0)
}

/// Smallest aperture width at which `port_correlation(N, W)` drops to `mu²`.
pub fn width_for_correlation(n_ports: usize, mu: f64) -> Result<f64, CliError> {
    let target = mu * mu;
    let f = |w: f64| port_correlation(n_ports, w).map(|c| target - c);
    let mut hi = 0.0;
    loop {
        hi += 0.01;
        if f(hi).map_err(num)? >= 0.0 {
            break;
        }
        if hi > 10.0 {
            return Err(CliError::Validation(format!("no aperture reaches mu = {mu} for N = {n_ports}")));
        }
    }
    Ok(bisect(hi - 0.01, hi, |w| f(w).unwrap_or(f64::NAN)))
}

fn unit_scenario(fas: FasGeometry, m: u32) -> ScenarioConfig {
    ScenarioConfig {
        geometry: Geometry::vertical(1.0).expect("unit distance"),
        path_loss: PathLossParams { beta_ref: 1.0, rho: 2.0 },
        fas,
        fading: FadingParams { m, sigma_sq: 1.0 },
        eta: 1.0,
        p_u: 1.0,
        n0: 1.0,
        alpha: 0.5,
        ..ScenarioConfig::baseline()
    }
}

// ---------------------------------------------------------------------------
// criteria

fn special_functions() -> Result<Vec<Check>, CliError> {
    let mut marcum = 0.0f64;
    for m in 1..=8u32 {
        for i in 0..200 {
            let b = 20.0 * i as f64 / 199.0;
            let q = marcum_q(m, 0.0, b).map_err(num)?;
            let p = reg_lower_gamma(m as f64, b * b / 2.0).map_err(num)?;
            marcum = marcum.max((q - (1.0 - p)).abs());
        }
    }
    let (mut psi, mut lg) = (0.0f64, 0.0f64);
    for i in 0..1000 {
        let x = 0.1 + (100.0 - 0.1) * i as f64 / 999.0;
        psi = psi.max((digamma(x + 1.0).map_err(num)? - digamma(x).map_err(num)? - 1.0 / x).abs());
        lg = lg.max((ln_gamma(x + 1.0).map_err(num)? - ln_gamma(x).map_err(num)? - x.ln()).abs());
    }
    let mut j0 = 0.0f64;
    for i in 0..=400 {
        let x = 10.0 * i as f64 / 400.0;
        j0 = j0.max((bessel_j0(x).map_err(num)? - j0_series(x)).abs());
    }
    Ok(vec![
        Check::at_most("max |Q_m(0,b) - (1 - P(m, b²/2))|, m 1..8, b in [0, 20]", marcum, 1e-10),
        Check::at_most("max |ψ(x+1) - ψ(x) - 1/x|, x in [0.1, 100]", psi, 1e-11),
        Check::at_most("max |lnΓ(x+1) - lnΓ(x) - ln x|, x in [0.1, 100]", lg, 1e-11),
        Check::at_most("max |J0(x) - series(x)|, x in [0, 10]", j0, 1e-12),
    ])
}

fn cdf_reductions() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for m in 1..=3u32 {
        let fading = FadingParams::new(m, 1.0).map_err(num)?;
        let marginal = |x: f64| marginal_envelope_cdf(x, &fading).expect("valid fading");
        let law = MaxEnvelopeLaw::new(&FasGeometry::new(1, 0.0).map_err(num)?, &fading, inner_tolerance()).map_err(num)?;
        let mut err = 0.0f64;
        for q in quantile_levels() {
            let x = quantile(q, marginal);
            err = err.max((law.cdf(x).map_err(num)? - marginal(x)).abs());
        }
        checks.push(Check::at_most(format!("N=1 vs marginal, m={m}"), err, 1e-8));
        for n in [2usize, 4, 8] {
            let fas = FasGeometry::with_correlation(n, 0.0).map_err(num)?;
            let law = MaxEnvelopeLaw::new(&fas, &fading, inner_tolerance()).map_err(num)?;
            let product = |x: f64| marginal(x).powi(n as i32);
            let mut err = 0.0f64;
            for q in quantile_levels() {
                let x = quantile(q, product);
                err = err.max((law.cdf(x).map_err(num)? - product(x)).abs());
            }
            checks.push(Check::at_most(format!("mu=0 vs marginal^N, N={n} m={m}"), err, 1e-6));
        }
    }
    Ok(checks)
}

fn cdf_vs_monte_carlo(opts: &ValidationOptions) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let mut stream = 0u64;
    for n in [2usize, 4, 8] {
        for m in 1..=3u32 {
            for (mu_label, fas) in [
                ("0.3", FasGeometry::with_correlation(n, 0.3).map_err(num)?),
                ("0.7", FasGeometry::with_correlation(n, 0.7).map_err(num)?),
                ("0.95 (geometry)", FasGeometry::new(n, width_for_correlation(n, 0.95)?).map_err(num)?),
            ] {
                stream += 1;
                let cfg = unit_scenario(fas, m);
                let law = MaxEnvelopeLaw::new(&cfg.fas, &cfg.fading, inner_tolerance()).map_err(num)?;
                // products are |h_max|⁴; the empirical CDF of |h_max| follows by monotonicity
                let mut x4 = draw_gain_products(&cfg, &McOptions::new(opts.cdf_samples, opts.seed ^ stream)).map_err(num)?;
                x4.sort_by(f64::total_cmp);
                let len = x4.len() as f64;
                let mut worst = 0.0f64;
                for q in quantile_levels() {
                    let idx = ((q * len).ceil() as usize).clamp(1, x4.len()) - 1;
                    let x = x4[idx].powf(0.25);
                    let empirical = x4.partition_point(|&v| v <= x4[idx]) as f64 / len;
                    let analytic = law.cdf(x).map_err(num)?;
                    let se = (analytic * (1.0 - analytic) / len).sqrt();
                    worst = worst.max((analytic - empirical).abs() / se);
                }
                checks.push(Check::at_most(
                    format!("max |F - F_emp| / SE over 20 quantiles, N={n} m={m} mu={mu_label}"),
                    worst,
                    4.0,
                ));
            }
        }
    }
    Ok(checks)
}

fn exact_vs_oracle() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for nu in [0.1, 1.0, 10.0, 1e3] {
        let cfg = unit_scenario(FasGeometry::new(1, 0.0).map_err(num)?, 1).with_power(nu);
        let exact = ergodic_rate_exact(&cfg, &outer_tolerance()).map_err(num)?.rate;
        let oracle = single_port_rate_oracle(nu, cfg.alpha);
        checks.push(Check::at_most(format!("|exact - oracle| at nu={nu}"), (exact - oracle).abs(), 1e-4));
    }
    Ok(checks)
}

fn baseline_with(n_ports: usize, m: u32) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::baseline();
    cfg.fas = FasGeometry::new(n_ports, 2.0).map_err(num)?;
    cfg.fading = FadingParams::new(m, 1.0).map_err(num)?;
    Ok(cfg)
}

fn exact_vs_monte_carlo(opts: &ValidationOptions) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for n in [1usize, 4, 10] {
        for m in [1u32, 2] {
            let cfg = baseline_with(n, m)?;
            let exact = ergodic_rate_exact(&cfg, &outer_tolerance()).map_err(num)?.rate;
            let mc = ergodic_rate_mc(&cfg, &McOptions::new(opts.rate_trials, opts.seed)).map_err(num)?;
            let allowed = (0.02 * exact).max(3.0 * mc.std_error);
            checks.push(Check::at_most(
                format!("|exact - MC| vs max(2%, 3 SE), N={n} m={m}"),
                (exact - mc.rate).abs(),
                allowed,
            ));
        }
    }
    Ok(checks)
}

fn asymptote_convergence(opts: &ValidationOptions) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for n in [1usize, 4] {
        for m in [1u32, 2] {
            let base = baseline_with(n, m)?;
            let mut gaps = Vec::new();
            for mult in [1.0, 10.0, 100.0, 1000.0] {
                let cfg = base.with_power(base.p_u * mult);
                let exact = ergodic_rate_exact(&cfg, &outer_tolerance()).map_err(num)?.rate;
                let params = asymptotic_params(&cfg).map_err(num)?.with_a0_factor(opts.a0_factor);
                let asym = params.rate(cfg.alpha).rate;
                gaps.push((exact - asym).abs() / exact);
            }
            let worst_step = gaps.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max);
            checks.push(Check::at_most(
                format!("largest step in relative gap over P_u x1..x1000, N={n} m={m}"),
                worst_step,
                0.0,
            ));
            checks.push(Check::at_most(
                format!("relative gap at P_u x1000, N={n} m={m}"),
                *gaps.last().expect("four gaps"),
                0.01,
            ));
        }
    }
    Ok(checks)
}

fn mean_log_vs_monte_carlo(opts: &ValidationOptions) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for n in [2usize, 5] {
        for m in [1u32, 2] {
            let cfg = unit_scenario(FasGeometry::new(n, 2.0).map_err(num)?, m).with_power(1e4);
            let nu = snr_scale(&cfg).map_err(num)?;
            let analytic = asymptotic_params(&cfg).map_err(num)?.with_a0_factor(opts.a0_factor).mean_log_snr();
            let x = draw_gain_products(&cfg, &McOptions::new(opts.rate_trials, opts.seed)).map_err(num)?;
            let (mean, se) = mean_log_snr_from_products(&x, nu);
            checks.push(Check::at_most(
                format!("|E[ln γ] - MC| / SE at nu=1e4, N={n} m={m}"),
                (analytic - mean).abs() / se,
                3.0,
            ));
        }
    }
    let unit = unit_scenario(FasGeometry::new(1, 0.0).map_err(num)?, 1);
    let v = asymptotic_params(&unit).map_err(num)?.with_a0_factor(opts.a0_factor).mean_log_snr();
    checks.push(Check::at_most(
        "|E[ln γ] + 2γ_E| at N=m=nu=1",
        (v + 2.0 * euler_gamma()).abs(),
        1e-10,
    ));
    Ok(checks)
}

fn efficiency_trends(opts: &ValidationOptions) -> Result<Vec<Check>, CliError> {
    let power = PowerModel::default();
    let search = AlphaSearch::default();
    let mc = |s: Strategy| McOptions::new(opts.trend_trials, opts.seed).with_strategy(s);
    let ports = [10usize, 20, 40, 80, 160];
    let combined = |a: f64, b: f64| (a * a + b * b).sqrt();
    let mut checks = Vec::new();

    let mut zeta_mgs = Vec::new();
    for &n in &ports {
        let wide = baseline_with(n, 2)?;
        let mut narrow = wide;
        narrow.fas = FasGeometry::new(n, 0.2).map_err(num)?;
        let mgs = optimize_alpha_mc(&wide, &power, &search, &mc(Strategy::Mgs)).map_err(num)?;
        let rs = optimize_alpha_mc(&wide, &power, &search, &mc(Strategy::Rs)).map_err(num)?;
        let small = optimize_alpha_mc(&narrow, &power, &search, &mc(Strategy::Mgs)).map_err(num)?;
        checks.push(Check::at_least(
            format!("(a) (zeta_mgs - zeta_rs) / SE at N={n}"),
            (mgs.zeta - rs.zeta) / combined(mgs.zeta_std_error, rs.zeta_std_error),
            -3.0,
        ));
        checks.push(Check::at_least(
            format!("(b) (zeta_W2 - zeta_W0.2) / SE at N={n}"),
            (mgs.zeta - small.zeta) / combined(mgs.zeta_std_error, small.zeta_std_error),
            -3.0,
        ));
        zeta_mgs.push(mgs.zeta);
    }
    let increments: Vec<f64> = zeta_mgs.windows(2).map(|w| w[1] - w[0]).collect();
    for (k, w) in increments.windows(2).enumerate() {
        checks.push(Check::at_least(
            format!("(c) zeta increment shrink from N={}->{} to N={}->{}", ports[k], ports[k + 1], ports[k + 1], ports[k + 2]),
            w[0] - w[1],
            0.0,
        ));
    }

    let near = baseline_with(10, 2)?;
    let mut far = near;
    far.geometry = Geometry::vertical(50.0).map_err(num)?;
    let a_near = optimize_alpha_mc(&near, &power, &search, &mc(Strategy::Mgs)).map_err(num)?;
    let a_far = optimize_alpha_mc(&far, &power, &search, &mc(Strategy::Mgs)).map_err(num)?;
    checks.push(Check::at_least(
        "(d) alpha*(d=50) - alpha*(d=25)",
        a_far.alpha_star - a_near.alpha_star,
        0.0,
    ));

    let r1 = ergodic_rate_mc(&baseline_with(200, 1)?, &mc(Strategy::Mgs)).map_err(num)?;
    let r3 = ergodic_rate_mc(&baseline_with(200, 3)?, &mc(Strategy::Mgs)).map_err(num)?;
    checks.push(Check::at_least(
        "(e) (rate_m1 - rate_m3) / SE at N=200 W=2",
        (r1.rate - r3.rate) / combined(r1.std_error, r3.std_error),
        3.0,
    ));
    Ok(checks)
}

/// Small configurations for each table command, cheap enough to run repeatedly.
pub fn determinism_specs() -> Vec<(Command, ExperimentSpec)> {
    let text = |sweep: &str| format!("{sweep}\n[mc]\ntrials = 3000\nseed = 9\n");
    let power = parse_config(&text(
        "[sweep]\nparameter = \"p_u\"\nvalues = [1, 1000]\nstrategies = [\"mgs\", \"rs\"]",
    ))
    .expect("valid");
    let alpha = parse_config(&text(
        "[sweep]\nparameter = \"alpha\"\nvalues = [0.3, 0.6, 0.9]\n[sweep.curves]\nn_ports = [4, 8]",
    ))
    .expect("valid");
    let ee = parse_config(&text(
        "[sweep]\nparameter = \"n_ports\"\nvalues = [4, 8]\nalpha_grid = 16\nrefine_tol = 1e-3\n[sweep.curves]\nwidth = [2.0, 0.2]",
    ))
    .expect("valid");
    vec![(Command::RateVsPower, power), (Command::RateVsAlpha, alpha), (Command::EeVsPorts, ee)]
}

fn determinism() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for (command, spec) in determinism_specs() {
        let mut outputs = Vec::new();
        for threads in [1, 4, 1] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Validation(e.to_string()))?;
            outputs.push(pool.install(|| run_to_csv(command, &spec))?);
        }
        let differing = outputs.iter().filter(|o| **o != outputs[0]).count();
        checks.push(Check::at_most(
            format!("{} reruns (1, 4, 1 threads) differing from the first", command.name()),
            differing as f64,
            0.0,
        ));
    }
    Ok(checks)
}
