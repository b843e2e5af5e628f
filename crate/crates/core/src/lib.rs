//! Lower bounds on the outage error probability and the MSE of Bayesian
//! scalar parameter estimators, together with the estimators that attain
//! them (h-MAP, MAP, MMSE) and Monte Carlo benchmarking utilities.
//!
//! The crate is organized around a [`model::BayesModel`] trait describing a
//! Bayesian estimation problem through its posterior density and
//! observation law. On top of it:
//!
//! - [`quad`] provides adaptive Gauss-Kronrod integration, lattice sums of
//!   shifted posterior copies, and expectations over the observation law;
//! - [`bounds`] computes the outage-probability lower bounds (general
//!   Fourier-coefficient class, single-coefficient, tightest subclass for a
//!   given `p`, the `p -> 1+` tightest bound, and the Ziv-Zakai outage
//!   curve) plus valley-filling;
//! - [`estimators`] implements numeric h-MAP/MAP/MMSE estimation and
//!   empirical outage/MSE evaluation with deterministic, counter-based
//!   Monte Carlo;
//! - [`mse`] converts outage curves into bounds on distortion measures,
//!   absolute moments, and the MSE;
//! - [`acceptance`] runs the end-to-end verification suite used by the CLI
//!   `accept` subcommand and the integration tests.

// `!(x > 0.0)` is used deliberately as a NaN-rejecting validity check, and
// quadrature node tables keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod acceptance;
pub mod bounds;
pub mod closed_form;
pub mod error;
pub mod estimators;
pub mod model;
pub mod mse;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
