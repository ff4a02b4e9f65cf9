//! Converse bounds and recovery benchmarks for causal network inference
//! from noisy linear Gaussian dynamics.
//!
//! The crate is organized bottom-up: [`linalg`] supplies dense kernels and
//! the Gaussian Bhattacharyya coefficient, [`model`] the generative process,
//! [`bht`] the binary hypothesis testing bounds, [`net_bounds`] the
//! network-level converse bounds and ROC envelopes, [`recovery`] the lasso
//! and oCSE estimators, and [`metrics`] the error ratios, ROC sweeps, AUC
//! bounds and mutual incoherence.

pub mod bht;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod net_bounds;
pub mod recovery;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{GaussianSpec, Matrix};
pub use metrics::RocPoint;
pub use model::{AdjacencyMatrix, ModelParams, ObservationSeries, SignedSupport, SupportMatrix};
pub use net_bounds::{BoundEstimate, EdgeWeights, PiGrid};
