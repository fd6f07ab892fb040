//! Shared fixtures for the benchmarks.

use nlse_core::dataset::ParameterRanges;
use nlse_core::solver::gaussian_input;
use nlse_core::{BeamParams, ComplexField, MediumParams, TransverseGrid};

/// Reference beam sampled on an `n`x`n` grid spanning 15 waists.
pub fn reference_field(n: usize) -> ComplexField {
    let beam = BeamParams::reference();
    let grid = TransverseGrid::square(n, 15.0 * beam.waist).expect("valid grid");
    gaussian_input(&beam, &grid).expect("valid input")
}

/// Medium at the center of the default parameter ranges.
pub fn mid_range_medium() -> MediumParams {
    let t = ParameterRanges::default().denormalize(&[0.5; 3]);
    MediumParams::new(t[0], t[1], t[2])
}
