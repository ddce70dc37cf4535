//! Port selection and the distribution of the selected envelope.
//!
//! Maximum-gain selection (MGS) activates the strongest port; random selection
//! (RS) activates a uniformly drawn one and stands in for a fixed antenna.
//!
//! For MGS over `N` ports with common correlation `μ` the CDF of the selected
//! envelope conditions on the reference port `r`:
//!
//! ```text
//! F(x) = ∫_0^x f_m(r) · [1 - Q_m(a(r), b(x))]^(N-1) dr
//! a(r) = sqrt(2 m μ² r² / (σ² (1 - μ²)))
//! b(x) = sqrt(2 m x² / (σ² (1 - μ²)))
//! ```
//!
//! where `f_m` is the Nakagami-m density. The survival function is integrated
//! separately so that neither tail suffers cancellation.

use crate::channel::{marginal_envelope_cdf, EnvelopeSample, FadingParams, FasGeometry};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::{ln_gamma, marcum_tails, reg_upper_gamma, Tolerance};
use rand::Rng;

/// Which port a strategy activated and its envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOutcome {
    pub port_index: usize,
    pub envelope: f64,
}

/// Port selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Maximum gain selection.
    Mgs,
    /// Uniformly random port (fixed-antenna baseline).
    Rs,
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Mgs => "mgs",
            Strategy::Rs => "rs",
        }
    }
}

/// Index of the largest entry, lowest index on ties. `None` for an empty slice.
#[inline]
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(i),
        }
    }
    best
}

pub fn select_mgs(sample: &EnvelopeSample) -> Result<SelectionOutcome> {
    let port_index =
        argmax(&sample.envelopes).ok_or_else(|| Error::domain("select_mgs", "empty envelope sample"))?;
    Ok(SelectionOutcome {
        port_index,
        envelope: sample.envelopes[port_index],
    })
}

pub fn select_rs<R: Rng + ?Sized>(sample: &EnvelopeSample, rng: &mut R) -> Result<SelectionOutcome> {
    if sample.envelopes.is_empty() {
        return Err(Error::domain("select_rs", "empty envelope sample"));
    }
    let port_index = rng.random_range(0..sample.envelopes.len());
    Ok(SelectionOutcome {
        port_index,
        envelope: sample.envelopes[port_index],
    })
}

/// Inner-integral tolerance used when the CDF feeds the rate integral.
pub fn inner_tolerance() -> Tolerance {
    Tolerance {
        abs_tol: 1e-10,
        rel_tol: 1e-8,
        max_terms: 1_000_000,
    }
}

/// Law of the MGS-selected envelope for a given aperture and fading.
#[derive(Debug, Clone, Copy)]
pub struct MaxEnvelopeLaw {
    n_ports: usize,
    m: u32,
    sigma_sq: f64,
    mu: f64,
    ln_density_const: f64,
    tol: Tolerance,
}

impl MaxEnvelopeLaw {
    pub fn new(fas: &FasGeometry, fading: &FadingParams, tol: Tolerance) -> Result<Self> {
        fading.validate()?;
        let m = fading.m as f64;
        let ln_density_const = 2f64.ln() + m * m.ln() - ln_gamma(m)? - m * fading.sigma_sq.ln();
        Ok(MaxEnvelopeLaw {
            n_ports: fas.n_ports(),
            m: fading.m,
            sigma_sq: fading.sigma_sq,
            mu: fas.mu(),
            ln_density_const,
            tol,
        })
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    fn fading(&self) -> FadingParams {
        FadingParams {
            m: self.m,
            sigma_sq: self.sigma_sq,
        }
    }

    // all ports are one effective port
    fn degenerate(&self) -> bool {
        self.n_ports == 1 || self.mu >= 1.0
    }

    fn density(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let m = self.m as f64;
        (self.ln_density_const + (2.0 * m - 1.0) * r.ln() - m * r * r / self.sigma_sq).exp()
    }

    fn marginal_survival(&self, x: f64) -> Result<f64> {
        let m = self.m as f64;
        reg_upper_gamma(m, m * x * x / self.sigma_sq)
    }

    // Envelope beyond which a single port's survival is below 1e-17; the
    // reference-port integral is negligible past it.
    fn reference_cutoff(&self) -> Result<f64> {
        let mut hi = (self.sigma_sq / self.m as f64).sqrt().max(1.0);
        while self.marginal_survival(hi)? > 1e-17 {
            hi *= 1.5;
        }
        Ok(hi)
    }

    /// `ln(1 - Q_m(a(r), b))^(N-1)` for reference envelope `r` and threshold scale `b`.
    fn ln_conditional_factor(&self, r: f64, b: f64, a_scale: f64) -> Result<f64> {
        let tails = marcum_tails(self.m, a_scale * r, b, &self.tol)?;
        Ok((self.n_ports - 1) as f64 * tails.ln_p())
    }

    fn scales(&self, x: f64) -> (f64, f64) {
        let m = self.m as f64;
        let denom = self.sigma_sq * (1.0 - self.mu * self.mu);
        let a_scale = (2.0 * m * self.mu * self.mu / denom).sqrt();
        let b = (2.0 * m * x * x / denom).sqrt();
        (a_scale, b)
    }

    fn quad_options(&self) -> QuadOptions {
        QuadOptions {
            abs_tol: self.tol.abs_tol,
            rel_tol: self.tol.rel_tol,
            max_intervals: 4000,
        }
    }

    /// `P(max_k |h_k| <= x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain("fas_max_cdf", format!("x must be >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        if self.mu >= 1.0 {
            return marginal_envelope_cdf(x, &self.fading());
        }
        let upper = x.min(self.reference_cutoff()?);
        let (a_scale, b) = self.scales(x);
        let n_minus_1 = self.n_ports - 1;
        let result = integrate(
            |r| -> Result<f64> {
                let f = self.density(r);
                if f == 0.0 || n_minus_1 == 0 {
                    return Ok(f);
                }
                if n_minus_1 <= 64 {
                    let tails = marcum_tails(self.m, a_scale * r, b, &self.tol)?;
                    Ok(f * tails.p.powi(n_minus_1 as i32))
                } else {
                    Ok(f * self.ln_conditional_factor(r, b, a_scale)?.exp())
                }
            },
            0.0,
            upper,
            &self.quad_options(),
        )?;
        Ok(result.value.clamp(0.0, 1.0))
    }

    /// `P(max_k |h_k| > x)`, integrated directly.
    pub fn survival(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain("fas_max_survival", format!("x must be >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(1.0);
        }
        let tail = self.marginal_survival(x)?;
        if self.degenerate() {
            return Ok(tail);
        }
        // P(r > x) + ∫_0^x f(r) (1 - Π) dr
        let upper = x.min(self.reference_cutoff()?);
        let (a_scale, b) = self.scales(x);
        let result = integrate(
            |r| -> Result<f64> {
                let f = self.density(r);
                if f == 0.0 {
                    return Ok(0.0);
                }
                Ok(-f * self.ln_conditional_factor(r, b, a_scale)?.exp_m1())
            },
            0.0,
            upper,
            &self.quad_options(),
        )?;
        Ok((tail + result.value).clamp(0.0, 1.0))
    }

    /// Smallest envelope at which the survival is certainly below `eps`
    /// (union bound over the ports).
    pub fn upper_quantile_bound(&self, eps: f64) -> Result<f64> {
        let n = self.n_ports as f64;
        let mut hi = (self.sigma_sq / self.m as f64).sqrt();
        while n * self.marginal_survival(hi)? > eps {
            hi *= 1.25;
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if n * self.marginal_survival(mid)? > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

/// CDF of the MGS-selected envelope, `P(max_k |h_k| <= x)`.
pub fn fas_max_cdf(x: f64, fas: &FasGeometry, fading: &FadingParams, tol: &Tolerance) -> Result<f64> {
    MaxEnvelopeLaw::new(fas, fading, *tol)?.cdf(x)
}

/// Survival `1 - fas_max_cdf(x)` without cancellation.
pub fn fas_max_survival(x: f64, fas: &FasGeometry, fading: &FadingParams, tol: &Tolerance) -> Result<f64> {
    MaxEnvelopeLaw::new(fas, fading, *tol)?.survival(x)
}
