//! Monte Carlo ergodic rate.
//!
//! Trials are split into fixed-size chunks; chunk `c` draws from a ChaCha8
//! stream keyed by `(seed, c)`. Chunks run in parallel and are concatenated in
//! chunk order, so results depend only on `(seed, trials)` and never on the
//! number of worker threads.
//!
//! Envelope draws do not depend on `α` or `ν`, so a sweep over either can reuse
//! one set of gain products `|h|²|g|²` (common random numbers).

use super::{snr_scale, RateMethod, RateResult, ScenarioConfig, UplinkMode};
use crate::channel::EnvelopeSampler;
use crate::error::{Error, Result};
use crate::selection::{argmax, Strategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Trials per independent random stream.
pub const CHUNK_TRIALS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub trials: usize,
    pub seed: u64,
    pub strategy: Strategy,
}

impl McOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        McOptions {
            trials,
            seed,
            strategy: Strategy::Mgs,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }
}

/// Stream for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

#[inline]
fn select_power<R: Rng>(strategy: Strategy, envelopes: &[f64], rng: &mut R) -> f64 {
    let idx = match strategy {
        Strategy::Mgs => argmax(envelopes).expect("at least one port"),
        Strategy::Rs => rng.random_range(0..envelopes.len()),
    };
    envelopes[idx] * envelopes[idx]
}

/// Draws `trials` products `|h_sel|² · |g_sel|²` (equal to `|h_sel|⁴` for a reciprocal uplink).
pub fn draw_gain_products(cfg: &ScenarioConfig, opts: &McOptions) -> Result<Vec<f64>> {
    if opts.trials == 0 {
        return Err(Error::domain("monte carlo", "trials must be >= 1"));
    }
    cfg.fading.validate()?;
    let n_chunks = opts.trials.div_ceil(CHUNK_TRIALS);
    let chunks: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_TRIALS.min(opts.trials - c * CHUNK_TRIALS);
            let mut rng = chunk_rng(opts.seed, c as u64);
            let mut sampler = EnvelopeSampler::new(&cfg.fas, &cfg.fading);
            let mut down = vec![0.0; sampler.n_ports()];
            let mut up = vec![0.0; sampler.n_ports()];
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                sampler.sample_into(&mut rng, &mut down);
                let h2 = select_power(opts.strategy, &down, &mut rng);
                let product = match cfg.uplink_mode {
                    UplinkMode::Reciprocal => h2 * h2,
                    UplinkMode::Independent => {
                        sampler.sample_into(&mut rng, &mut up);
                        h2 * select_power(opts.strategy, &up, &mut rng)
                    }
                };
                out.push(product);
            }
            out
        })
        .collect();
    Ok(chunks.concat())
}

/// Sample mean and its standard error, summed in index order.
pub fn mean_and_std_error(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

/// Averages `(1-α) log2(1 + ν X)` over gain products `X`.
pub fn rate_from_products(products: &[f64], nu: f64, alpha: f64) -> RateResult {
    let weight = 1.0 - alpha;
    let (rate, std_error) = mean_and_std_error(products.iter().map(|&x| weight * (nu * x).ln_1p() / std::f64::consts::LN_2));
    RateResult {
        rate,
        method: RateMethod::MonteCarlo,
        std_error,
        trials: products.len(),
        outside_validity: false,
    }
}

/// Monte Carlo mean of `ln γ` and its standard error.
pub fn mean_log_snr_from_products(products: &[f64], nu: f64) -> (f64, f64) {
    let ln_nu = nu.ln();
    mean_and_std_error(products.iter().map(|&x| ln_nu + x.ln()))
}

pub fn ergodic_rate_mc(cfg: &ScenarioConfig, opts: &McOptions) -> Result<RateResult> {
    let nu = snr_scale(cfg)?;
    let products = draw_gain_products(cfg, opts)?;
    Ok(rate_from_products(&products, nu, cfg.alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{FadingParams, FasGeometry, Geometry, PathLossParams};
    use std::f64::consts::LN_2;

    #[test]
    fn forced_unit_envelope() {
        let r = rate_from_products(&[1.0], 1.0, 0.5);
        assert_eq!(r.rate, 0.5);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.trials, 1);
    }

    fn unit_nu_config(n_ports: usize, m: u32) -> ScenarioConfig {
        ScenarioConfig {
            geometry: Geometry::vertical(1.0).unwrap(),
            path_loss: PathLossParams::new(1.0, 2.0).unwrap(),
            fas: FasGeometry::new(n_ports, 2.0).unwrap(),
            fading: FadingParams::new(m, 1.0).unwrap(),
            eta: 1.0,
            p_u: 1.0,
            n0: 1.0,
            alpha: 0.5,
            ..ScenarioConfig::baseline()
        }
    }

    #[test]
    fn rayleigh_single_port_matches_oracle() {
        // oracle: (0.5/ln2) ∫ e^{-y} 2y/(1+y²) dy with ν = 1, composite Simpson
        let upper = 60.0;
        let n = 200_000;
        let h = upper / n as f64;
        let f = |y: f64| (-y).exp() * 2.0 * y / (1.0 + y * y);
        let mut s = f(0.0) + f(upper);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let oracle = 0.5 / LN_2 * s * h / 3.0;
        let r = ergodic_rate_mc(&unit_nu_config(1, 1), &McOptions::new(1_000_000, 5)).unwrap();
        assert!((r.rate - oracle).abs() < 3.0 * r.std_error, "{} vs {oracle} ({})", r.rate, r.std_error);
    }

    #[test]
    fn mgs_beats_rs_on_same_seed() {
        let cfg = unit_nu_config(8, 2);
        let mgs = ergodic_rate_mc(&cfg, &McOptions::new(50_000, 9)).unwrap();
        let rs = ergodic_rate_mc(&cfg, &McOptions::new(50_000, 9).with_strategy(Strategy::Rs)).unwrap();
        assert!(mgs.rate >= rs.rate);
    }

    #[test]
    fn independent_of_thread_count() {
        let cfg = unit_nu_config(5, 2);
        let opts = McOptions::new(3 * CHUNK_TRIALS + 17, 1234);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| draw_gain_products(&cfg, &opts).unwrap())
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.len(), opts.trials);
        assert!(one.iter().zip(&four).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn independent_uplink_runs() {
        let mut cfg = unit_nu_config(4, 1);
        cfg.uplink_mode = UplinkMode::Independent;
        let r = ergodic_rate_mc(&cfg, &McOptions::new(10_000, 3)).unwrap();
        assert!(r.rate > 0.0 && r.std_error > 0.0);
        assert!(draw_gain_products(&cfg, &McOptions::new(0, 1)).is_err());
    }
}
