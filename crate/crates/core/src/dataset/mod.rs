//! Labeled (density, phase) datasets over a linear 3-parameter grid.

mod generate;
mod manifest;
mod ranges;
mod split;
pub mod store;

pub use generate::{generate, generate_with_progress, simulate_sample, GenerationSummary};
pub use manifest::{
    DatasetManifest, GridConfig, SplitAssignment, FORMAT_VERSION, MIN_SAMPLES_PER_WAIST,
    MIN_WINDOW_WAISTS,
};
pub use ranges::{
    denormalize_labels, enumerate_grid, normalize_labels, AxisRange, ParameterRanges, Sampling,
    Triplet, AXIS_NAMES,
};
pub use split::{split, split_indices, DEFAULT_FRACTIONS};
pub use store::Dataset;

use crate::imaging::Observation;

/// One labeled record.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub index: usize,
    pub observation: Observation,
    pub labels_physical: Triplet,
    /// Per-axis min-max normalization of `labels_physical` against the manifest ranges.
    pub labels_normalized: Triplet,
}
