//! Link geometry, path loss, port correlation and the correlated Nakagami-m sampler.
//!
//! Port 1 of the fluid antenna is the correlation reference. Every other port
//! shares its `m` complex Gaussian branches with weight `μ`:
//!
//! ```text
//! H_1l = X_0l
//! H_kl = sqrt(1 - μ²) X_kl + μ X_0l,      k = 2..N, l = 1..m
//! |h_k| = sqrt( σ²/m · Σ_l |H_kl|² )
//! ```
//!
//! with all `X` independent `CN(0, 1)` (real and imaginary parts of variance 1/2).
//! Each `|h_k|` is Nakagami-m with `E|h_k|² = σ²`, and conditioned on port 1 the
//! remaining ports are independent, which is exactly the structure the
//! selected-envelope CDF in [`crate::selection`] integrates over.

use crate::error::{Error, Result};
use crate::specfun::{bessel_j0, reg_lower_gamma};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Mutex;

/// UAV and cluster-head positions in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub uav_position: [f64; 3],
    pub ch_position: [f64; 3],
}

impl Geometry {
    pub fn new(uav_position: [f64; 3], ch_position: [f64; 3]) -> Result<Self> {
        let g = Geometry {
            uav_position,
            ch_position,
        };
        g.validate()?;
        Ok(g)
    }

    /// UAV hovering straight above a ground-level CH at altitude `d`.
    pub fn vertical(d: f64) -> Result<Self> {
        Geometry::new([0.0, 0.0, d], [0.0, 0.0, 0.0])
    }

    pub fn validate(&self) -> Result<()> {
        if self.uav_position.iter().chain(&self.ch_position).any(|v| !v.is_finite()) {
            return Err(Error::domain("Geometry", "positions must be finite"));
        }
        let h_u = self.uav_position[2];
        let h = self.ch_position[2];
        if !(h >= 0.0 && h_u > h) {
            return Err(Error::domain(
                "Geometry",
                format!("need UAV altitude above CH height >= 0, got h_u={h_u}, h={h}"),
            ));
        }
        Ok(())
    }

    /// UAV–CH link distance.
    ///
    /// Uses the hover altitude `h_u` itself as the vertical offset; the CH
    /// height is carried as metadata only.
    pub fn distance(&self) -> f64 {
        let [xu, yu, hu] = self.uav_position;
        let [xc, yc, _] = self.ch_position;
        (hu * hu + (xc - xu).powi(2) + (yc - yu).powi(2)).sqrt()
    }
}

/// Free function form of [`Geometry::distance`].
pub fn distance(geometry: &Geometry) -> f64 {
    geometry.distance()
}

/// Log-distance path-loss law `L(d) = β d^-ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    /// Linear power gain at the 1 m reference distance.
    pub beta_ref: f64,
    pub rho: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        PathLossParams {
            beta_ref: 1e-3,
            rho: 2.7,
        }
    }
}

impl PathLossParams {
    pub fn new(beta_ref: f64, rho: f64) -> Result<Self> {
        let p = PathLossParams { beta_ref, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_ref > 0.0) || !self.beta_ref.is_finite() || !(self.rho >= 2.0) || !self.rho.is_finite() {
            return Err(Error::domain(
                "PathLossParams",
                format!("need beta_ref > 0 and rho >= 2, got {} and {}", self.beta_ref, self.rho),
            ));
        }
        Ok(())
    }
}

pub fn path_loss(d: f64, params: &PathLossParams) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain("path_loss", format!("distance must be positive, got {d}")));
    }
    Ok(params.beta_ref * d.powf(-params.rho))
}

/// True the first time a given `(N, W)` pair is seen, so each clamp is logged once.
fn first_clamp(n_ports: usize, width: f64) -> bool {
    static SEEN: Mutex<Vec<(usize, u64)>> = Mutex::new(Vec::new());
    let key = (n_ports, width.to_bits());
    let mut seen = SEEN.lock().unwrap_or_else(|e| e.into_inner());
    if seen.contains(&key) {
        return false;
    }
    seen.push(key);
    true
}

/// Squared common correlation `μ²` between the reference port and the others.
///
/// `μ² = 2/(N(N-1)) Σ_{k=1}^{N-1} (N-k) J0(2πkW/(N-1))`, clamped to `[0, 1]`.
/// Negative sums happen for some apertures; those are treated as uncorrelated.
pub fn port_correlation(n_ports: usize, width_wavelengths: f64) -> Result<f64> {
    if n_ports < 2 {
        return Err(Error::domain(
            "port_correlation",
            format!("needs at least two ports, got {n_ports}"),
        ));
    }
    if !(width_wavelengths >= 0.0) || !width_wavelengths.is_finite() {
        return Err(Error::domain(
            "port_correlation",
            format!("width must be finite and >= 0, got {width_wavelengths}"),
        ));
    }
    let n = n_ports as f64;
    let step = 2.0 * PI * width_wavelengths / (n - 1.0);
    let mut sum = 0.0;
    for k in 1..n_ports {
        sum += (n - k as f64) * bessel_j0(step * k as f64)?;
    }
    let mu_sq = sum / (0.5 * n * (n - 1.0));
    if !(0.0..=1.0).contains(&mu_sq) && first_clamp(n_ports, width_wavelengths) {
        log::warn!(
            "port correlation {mu_sq:.6} for N={n_ports}, W={width_wavelengths} clamped to [0, 1]"
        );
    }
    Ok(mu_sq.clamp(0.0, 1.0))
}

/// Fluid-antenna aperture: port count, width and the common correlation `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FasGeometry {
    n_ports: usize,
    width_wavelengths: Option<f64>,
    mu: f64,
}

impl FasGeometry {
    /// Builds the aperture from its physical size; `μ` follows from [`port_correlation`].
    pub fn new(n_ports: usize, width_wavelengths: f64) -> Result<Self> {
        if n_ports == 0 {
            return Err(Error::domain("FasGeometry", "n_ports must be >= 1"));
        }
        if !(width_wavelengths >= 0.0) || !width_wavelengths.is_finite() {
            return Err(Error::domain(
                "FasGeometry",
                format!("width must be finite and >= 0, got {width_wavelengths}"),
            ));
        }
        let mu = if n_ports >= 2 {
            port_correlation(n_ports, width_wavelengths)?.sqrt()
        } else {
            0.0
        };
        Ok(FasGeometry {
            n_ports,
            width_wavelengths: Some(width_wavelengths),
            mu,
        })
    }

    /// Aperture described directly by its correlation coefficient, with no physical width.
    pub fn with_correlation(n_ports: usize, mu: f64) -> Result<Self> {
        if n_ports == 0 {
            return Err(Error::domain("FasGeometry", "n_ports must be >= 1"));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::domain("FasGeometry", format!("mu must lie in [0, 1], got {mu}")));
        }
        Ok(FasGeometry {
            n_ports,
            width_wavelengths: None,
            mu,
        })
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn width_wavelengths(&self) -> Option<f64> {
        self.width_wavelengths
    }

    /// Correlation coefficient `μ` (unused when there is a single port).
    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Nakagami shape and per-port average power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams {
    pub m: u32,
    pub sigma_sq: f64,
}

impl FadingParams {
    pub fn new(m: u32, sigma_sq: f64) -> Result<Self> {
        let f = FadingParams { m, sigma_sq };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::domain("FadingParams", "m must be >= 1"));
        }
        if !(self.sigma_sq > 0.0) || !self.sigma_sq.is_finite() {
            return Err(Error::domain(
                "FadingParams",
                format!("sigma_sq must be positive, got {}", self.sigma_sq),
            ));
        }
        Ok(())
    }
}

/// One draw of all port envelopes for a link.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSample {
    pub envelopes: Vec<f64>,
}

/// Nakagami-m envelope CDF `P(m, m x²/σ²)`.
pub fn marginal_envelope_cdf(x: f64, fading: &FadingParams) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain("marginal_envelope_cdf", format!("x must be >= 0, got {x}")));
    }
    let m = fading.m as f64;
    reg_lower_gamma(m, m * x * x / fading.sigma_sq)
}

/// Draws correlated envelopes for a fixed aperture and fading law.
///
/// The sampler owns no randomness; callers hand in their own stream so Monte
/// Carlo work can be partitioned deterministically.
#[derive(Debug, Clone)]
pub struct EnvelopeSampler {
    n_ports: usize,
    mu: f64,
    innovation: f64,
    power_per_branch: f64,
    reference: Vec<(f64, f64)>,
}

impl EnvelopeSampler {
    pub fn new(fas: &FasGeometry, fading: &FadingParams) -> Self {
        let mu = fas.mu();
        EnvelopeSampler {
            n_ports: fas.n_ports(),
            mu,
            innovation: (1.0 - mu * mu).max(0.0).sqrt(),
            power_per_branch: fading.sigma_sq / fading.m as f64,
            reference: vec![(0.0, 0.0); fading.m as usize],
        }
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    #[inline]
    fn half_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        z * FRAC_1_SQRT_2
    }

    /// Fills `out` (length `N`) with one correlated draw of the port envelopes.
    pub fn sample_into<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n_ports);
        let mut ref_power = 0.0;
        for branch in self.reference.iter_mut() {
            let re = Self::half_normal(rng);
            let im = Self::half_normal(rng);
            *branch = (re, im);
            ref_power += re * re + im * im;
        }
        out[0] = (self.power_per_branch * ref_power).sqrt();
        for slot in out.iter_mut().skip(1) {
            let mut power = 0.0;
            for &(x0, y0) in &self.reference {
                let re = self.innovation * Self::half_normal(rng) + self.mu * x0;
                let im = self.innovation * Self::half_normal(rng) + self.mu * y0;
                power += re * re + im * im;
            }
            *slot = (self.power_per_branch * power).sqrt();
        }
    }

    /// Same as [`Self::sample_into`] but also returns the real parts of branch 1,
    /// reference first. Used by the correlation checks.
    pub fn sample_branch_real_parts<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        let mut parts = Vec::with_capacity(self.n_ports);
        let mut ref_re = 0.0;
        for (l, branch) in self.reference.iter_mut().enumerate() {
            let re = Self::half_normal(rng);
            let im = Self::half_normal(rng);
            *branch = (re, im);
            if l == 0 {
                ref_re = re;
            }
        }
        parts.push(ref_re);
        for _ in 1..self.n_ports {
            for (l, &(x0, y0)) in self.reference.iter().enumerate() {
                let re = self.innovation * Self::half_normal(rng) + self.mu * x0;
                let _im = self.innovation * Self::half_normal(rng) + self.mu * y0;
                if l == 0 {
                    parts.push(re);
                }
            }
        }
        parts
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> EnvelopeSample {
        let mut envelopes = vec![0.0; self.n_ports];
        self.sample_into(rng, &mut envelopes);
        EnvelopeSample { envelopes }
    }
}

/// Convenience wrapper around [`EnvelopeSampler`] for a single draw.
pub fn sample_envelopes<R: Rng + ?Sized>(fas: &FasGeometry, fading: &FadingParams, rng: &mut R) -> EnvelopeSample {
    EnvelopeSampler::new(fas, fading).sample(rng)
}
