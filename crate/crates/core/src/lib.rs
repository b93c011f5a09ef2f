//! Monte Carlo dynamics for the Potts and random-cluster models, with an
//! exact state-space-enumeration engine for small graphs.
//!
//! The crate provides:
//!
//! - [`graph`]: finite multigraphs with loops, square-lattice builders,
//!   planar duals with an explicit edge bijection, connected components;
//! - [`model`]: Potts, random-cluster, and joint measures, exact
//!   distributions over enumerated state spaces;
//! - [`dynamics`]: single-step samplers for heat-bath, Swendsen-Wang (on
//!   colorings and on edge subsets), the dual-graph modified Swendsen-Wang,
//!   and a single-site chain restricted to a pinned vertex, all driven by a
//!   deterministic counter-based generator;
//! - [`exact`]: dense transition matrices for every chain, spectral gaps
//!   via a cyclic Jacobi eigensolver, and certification suites for the
//!   comparison inequalities between the chains;
//! - [`stats`]: trajectory statistics (energy, histograms, total-variation
//!   distance, integrated autocorrelation time).
//!
//! Numeric kernels are generic over the scalar type through [`Real`];
//! the `*64` aliases below fix f64, which all stated tolerances assume.

pub mod dynamics;
pub mod error;
pub mod exact;
pub mod graph;
pub mod model;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

/// f64 model parameters.
pub type Params64 = model::ModelParams<f64>;
/// f32 model parameters.
pub type Params32 = model::ModelParams<f32>;
/// f64 dense reversible transition matrix.
pub type ChainMatrix64 = exact::ChainMatrix<f64>;
/// f64 spectrum / spectral gap result.
pub type Spectrum64 = exact::SpectrumResult<f64>;
