//! Performance models for a fluid-antenna UAV serving a wireless-powered ground node.
//!
//! The UAV hovers above a cluster head (CH), charges it over the downlink for a
//! fraction `α` of each slot and receives its data over the uplink for the rest.
//! The UAV carries an `N`-port fluid antenna whose ports see spatially
//! correlated Nakagami-m fading and switches to the strongest port.
//!
//! Crate layout:
//! - [`specfun`]: Bessel J0, gamma family, digamma, Marcum Q.
//! - [`quad`]: adaptive Gauss–Kronrod integration.
//! - [`channel`]: geometry, path loss, port correlation and the envelope sampler.
//! - [`selection`]: maximum-gain / random port selection and the CDF of the selected envelope.
//! - [`rate`]: SNR scale, exact / Monte Carlo / high-SNR ergodic rates.
//! - [`energy`]: harvested energy, UAV power budget, energy efficiency and the time-split search.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod energy;
pub mod error;
pub mod quad;
pub mod rate;
pub mod selection;
pub mod specfun;

pub use error::{Error, Result};
pub use specfun::Tolerance;
