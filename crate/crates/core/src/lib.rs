//! Downlink rate distribution for K-tier heterogeneous cellular networks in
//! which long-term shadowing drives biased cell selection while Rayleigh
//! fading only affects the link quality.
//!
//! The crate is split along the computation:
//!
//! * [`numerics`]: Gauss hypergeometric function, the interference integral
//!   and fractional shadowing moments.
//! * [`model`]: tier/network description, validation, effective densities and
//!   the shadowing-free equivalent network.
//! * [`analytic`]: selection probabilities, conditional SIR CCDF, tagged-cell
//!   load PMF, rate coverage, percentile rates and bias optimisation.
//! * [`montecarlo`]: a Poisson point process simulator used to cross-check
//!   every analytic quantity.
//! * [`cli`]: config loading, CSV output and command dispatch for the
//!   `hetnet-rate` binary.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod numerics;

pub use error::{Error, Result};
pub use model::{Network, ShadowingModel, Tier};
