//! Worst-case optimal linear mean estimation from a small set of target
//! samples and a large set of auxiliary samples, where the auxiliary
//! distribution is only known to lie within a Wasserstein-2 ball of the
//! target.
//!
//! The crate is organised bottom-up:
//!
//! - [`gaussian`]: moment-pair distributions, PSD square roots and the closed
//!   form W2 distance between Gaussians.
//! - [`estimator`]: optimal weights, min-max risks and the objectives they
//!   minimise, for Frobenius, trace and operator-norm normalisations.
//! - [`adversary`]: worst-case (target, auxiliary) moment pairs.
//! - [`verify`]: brute-force oracles that check the closed forms without
//!   calling them.
//! - [`experiments`]: seeded Monte Carlo reproduction of the Gaussian
//!   location experiment and epsilon sweeps.
//! - [`cli`]: the `auxmean` command-line front end.
//!
//! Trial loops run on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise. Results are bit-identical either way.

pub mod adversary;
pub mod cli;
mod error;
pub mod estimator;
pub mod exec;
pub mod experiments;
pub mod gaussian;
pub mod verify;

pub use error::{Error, Result};
