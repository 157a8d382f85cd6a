//! Structured-matrix conditioning laboratory.
//!
//! Fast Toeplitz, Hankel and f-circulant linear algebra built on an
//! arbitrary-length DFT, Gohberg-Semencul inverse representations,
//! norm and condition-number estimators, closed-form evaluators for
//! probabilistic singular-value bounds, and a Monte Carlo harness that
//! sweeps random ensembles and summarizes what it observes.
//!
//! Module map:
//!
//! * [`dft`] - DFT plans (radix-2 and Bluestein) and cyclic convolution.
//! * [`structured`] - Toeplitz / Hankel / f-circulant specs and fast products.
//! * [`dense`] - dense LU, one-sided Jacobi SVD and exact norms used as ground truth.
//! * [`gs`] - Gohberg-Semencul inverse representations and their application.
//! * [`conditioning`] - norms, extremal singular values and condition numbers.
//! * [`ensembles`] - counter-based random streams and matrix samplers.
//! * [`bounds`] - chi cdf and the cdf bounds checked by the experiments.
//! * [`experiments`] - table reproduction, bound validation, contrast study, output.

pub mod bounds;
pub mod conditioning;
pub mod dense;
pub mod dft;
pub mod ensembles;
mod error;
pub mod experiments;
pub mod gs;
pub mod structured;

pub use error::{Error, Result};

/// Library version recorded in every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
