//! Simulation and verification workbench for full network nonlocality in the
//! entanglement-swapping network.
//!
//! - [`linalg`]: dense complex matrices for qubit states, observables and POVMs.
//! - [`scenario`]: sources, partial Bell-state measurement and local settings.
//! - [`born`]: joint distributions, correlators and no-signaling checks.
//! - [`witness`]: the `R_C-NS` and `R_NS-C` witnesses, closed forms and sweeps.
//! - [`models`]: hybrid classical/no-signaling models, bound search and inflation checks.
//! - [`stats`]: finite-count sampling and bootstrap error bars.
//! - [`spacetime`]: event timing and space-like separation audit.
//! - [`config`] and [`cli`]: JSON configuration and the `fnn` command set.
//!
//! Runnable examples live in `examples/`: `ideal_strategy`, `noise_sweep`,
//! `closed_form`, `finite_statistics`, `bound_certification`,
//! `inflation_check`, `spacetime_audit` and `custom_config`.

#![allow(clippy::needless_range_loop)]

pub mod born;
pub mod cli;
pub mod config;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod models;
pub mod scenario;
pub mod spacetime;
pub mod stats;
pub mod witness;

pub use error::{Error, Result};
