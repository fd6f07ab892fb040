//! Simulation, dataset generation and evaluation for single-shot estimation of
//! `(n2, I_sat, alpha)` in a saturable Kerr medium.
//!
//! The crate is organized bottom-up:
//!
//! - [`solver`]: split-step Fourier propagation of the paraxial envelope
//! - [`imaging`]: 224x224 (density, phase) observations with camera noise
//! - [`dataset`]: grid enumeration, label normalization, binary storage, splits
//! - [`regression`]: multivariate Gaussian negative log-likelihood and metrics
//! - [`oracle`]: simulation-in-the-loop parameter fit used as a reference estimator
//! - [`diagnostics`]: analytic self-checks shared by tests and the CLI

pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod imaging;
pub mod oracle;
pub mod regression;
pub mod rng;
pub mod scenario;
pub mod solver;

pub use dataset::{Dataset, DatasetManifest, ParameterRanges, Sample, Triplet};
pub use error::{Error, Result};
pub use field::ComplexField;
pub use grid::TransverseGrid;
pub use imaging::{NoiseConfig, Observation};
pub use regression::{GaussianPrediction, MetricsReport};
pub use scenario::{Scenario, Simulator};
pub use solver::{BeamParams, MediumParams, PropagationConfig, Propagator};
