//! Correlated-regression loss and evaluation metrics.

pub mod exchange;
mod gaussian;
mod metrics;

pub use gaussian::{
    inverse_diag, nll, nll_batch, nll_gradient, nll_gradient_check, sigmoid, softplus,
    GaussianPrediction, Lower, CHOL_EPS, DIM,
};
pub use metrics::{binned_trend, metrics, MetricsReport, ParameterMetrics, TrendBin};
