//! Reconstruction of the second-order statistics of stationary graph signals
//! from observations on a subset of graph nodes.
//!
//! The crate covers the whole pipeline:
//!
//! * [`graph`]: graphs, shift operators, graph Fourier bases and polynomial filters.
//! * [`stationary`]: stationary signal generation, covariances and power spectra.
//! * [`models`]: linear observation models for the nonparametric and
//!   moving-average parameterizations, compressed by a node subsampler.
//! * [`ar`]: the autoregressive model with its neighborhood sampling scheme.
//! * [`design`]: sampler validity, greedy log-det design and sparse rulers.
//! * [`estimators`]: LS, nonnegative LS, weighted LS, Fisher information and NMSE.
//! * [`experiment`]: a reproducible Monte-Carlo NMSE harness.
//! * [`io`]: on-disk JSON and CSV formats shared with the `graphcov` binary.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod ar;
pub mod design;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod models;
pub mod stationary;

pub use error::{Error, Result};
pub use linalg::C64;
