//! Simulation and verification toolkit for STIT (stable under iteration)
//! random tessellations.
//!
//! The crate is organised bottom-up:
//!
//! - [`measure`]: the translation-invariant hyperplane measure, given by its
//!   directional distribution, hitting measures and conditional sampling.
//! - [`geometry`]: a small convex polytope kernel for `d = 2, 3` with facet
//!   provenance tags.
//! - [`engine`]: the cell-division construction, Poisson hyperplane
//!   tessellations, iteration and rescaling.
//! - [`extract`]: maximal facets and maximal segments with birth times and
//!   internal-vertex counts, edge-corrected sampling and density estimates.
//! - [`analytic`]: closed-form and quadrature evaluation of birth-time laws
//!   and internal-vertex probabilities.
//! - [`stats`]: Monte Carlo harness, ratio estimators and goodness-of-fit
//!   tests.
//! - [`verify`]: the acceptance suite shared by the `verify` subcommand and
//!   the `acceptance` test target.
//! - [`cli`]: command-line front end and file formats.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod engine;
pub mod error;
pub mod extract;
pub mod geometry;
pub mod measure;
pub mod point;
pub mod rng;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};

/// Version string embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
