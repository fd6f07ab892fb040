use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ranges::{ParameterRanges, Triplet};
use crate::error::{Error, Result};
use crate::grid::TransverseGrid;
use crate::scenario::Scenario;
use crate::imaging::{NoiseConfig, IMAGE_SIZE};
use crate::solver::{BeamParams, MediumParams, PropagationConfig};

pub const FORMAT_VERSION: &str = "nlse-ds/1";

/// Minimum simulation window, in beam waists.
pub const MIN_WINDOW_WAISTS: f64 = 15.0;
/// Minimum number of grid samples per beam waist.
pub const MIN_SAMPLES_PER_WAIST: f64 = 16.0;

/// Computational grid and its integral reduction to the 224x224 image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub window_x: f64,
    pub window_y: f64,
    pub downsample: usize,
}

impl Default for GridConfig {
    /// 896x896 over 25.5 mm, reduced by 4.
    fn default() -> Self {
        Self {
            nx: 896,
            ny: 896,
            window_x: 25.5e-3,
            window_y: 25.5e-3,
            downsample: 4,
        }
    }
}

impl GridConfig {
    pub fn grid(&self) -> Result<TransverseGrid> {
        TransverseGrid::new(self.nx, self.ny, self.window_x, self.window_y)
    }

    fn validate(&self, beam: &BeamParams) -> Result<()> {
        let grid = self.grid()?;
        if self.downsample == 0
            || self.nx != IMAGE_SIZE * self.downsample
            || self.ny != IMAGE_SIZE * self.downsample
        {
            return Err(Error::invalid(
                "grid",
                format!(
                    "{}x{} does not reduce to {IMAGE_SIZE}x{IMAGE_SIZE} by factor {}",
                    self.nx, self.ny, self.downsample
                ),
            ));
        }
        let window = self.window_x.min(self.window_y);
        if window < MIN_WINDOW_WAISTS * beam.waist * (1.0 - 1e-12) {
            return Err(Error::invalid(
                "grid",
                format!(
                    "window {window:e} m is below {MIN_WINDOW_WAISTS} beam waists"
                ),
            ));
        }
        let per_waist = beam.waist / grid.dx().max(grid.dy());
        if per_waist < MIN_SAMPLES_PER_WAIST {
            return Err(Error::invalid(
                "grid",
                format!("only {per_waist:.1} samples per beam waist"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    /// Train, validation, test.
    pub fractions: [f64; 3],
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitAssignment {
    pub fn get(&self, name: &str) -> Option<&[usize]> {
        match name {
            "train" => Some(&self.train),
            "validation" | "val" => Some(&self.validation),
            "test" => Some(&self.test),
            _ => None,
        }
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.train.len(), self.validation.len(), self.test.len()]
    }
}

/// Everything needed to regenerate a dataset, plus what generation produced.
///
/// The generation config file is this same document; fields only known after
/// generation (`sample_count`, `density_max`, `split`) may be omitted there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: String,
    pub ranges: ParameterRanges,
    pub beam: BeamParams,
    pub propagation: PropagationConfig,
    pub grid: GridConfig,
    pub noise: NoiseConfig,
    #[serde(default = "default_n0")]
    pub n0: f64,
    pub master_seed: u64,
    #[serde(default)]
    pub sample_count: usize,
    /// Largest density over all stored observations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitAssignment>,
}

fn default_n0() -> f64 {
    1.0
}

impl Default for DatasetManifest {
    fn default() -> Self {
        let ranges = ParameterRanges::default();
        Self {
            format_version: FORMAT_VERSION.to_string(),
            sample_count: ranges.len(),
            ranges,
            beam: BeamParams::reference(),
            propagation: PropagationConfig::default(),
            grid: GridConfig::default(),
            noise: NoiseConfig::default(),
            n0: 1.0,
            master_seed: 0,
            density_max: None,
            split: None,
        }
    }
}

impl DatasetManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut m: Self = serde_json::from_str(text)?;
        if m.sample_count == 0 {
            m.sample_count = m.ranges.len();
        }
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {:?}, expected {FORMAT_VERSION:?}",
                self.format_version
            )));
        }
        self.ranges.validate()?;
        self.beam.validate()?;
        self.propagation.validate()?;
        self.noise.validate()?;
        self.grid.validate(&self.beam)?;
        if !(self.n0.is_finite() && self.n0 >= 1.0) {
            return Err(Error::invalid("n0", "must be >= 1"));
        }
        if self.sample_count != self.ranges.len() {
            return Err(Error::invalid(
                "sample_count",
                format!(
                    "{} does not match the {} grid triplets",
                    self.sample_count,
                    self.ranges.len()
                ),
            ));
        }
        if let Some(split) = &self.split {
            super::split::check_partition(split, self.sample_count)?;
        }
        Ok(())
    }

    pub fn medium(&self, triplet: &Triplet) -> MediumParams {
        self.scenario().medium(triplet)
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            beam: self.beam,
            propagation: self.propagation,
            grid: self.grid,
            n0: self.n0,
        }
    }

}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_manifest_is_valid_and_round_trips() {
        let m = DatasetManifest::default();
        m.validate().unwrap();
        let back = DatasetManifest::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.sample_count, 125_000);
    }

    #[test]
    fn minimal_config_fills_sample_count() {
        let text = r#"{
            "format_version": "nlse-ds/1",
            "ranges": {
                "n2": {"min": -1e-9, "max": -1e-10, "count": 2},
                "i_sat": {"min": 5e4, "max": 1e6, "count": 2},
                "alpha": {"min": 13, "max": 30, "count": 2}
            },
            "beam": {"power": 2.1, "waist": 1.7e-3, "wavelength": 7.8e-7},
            "propagation": {"length": 0.2, "n_steps": 200},
            "grid": {"nx": 896, "ny": 896, "window_x": 0.0255, "window_y": 0.0255, "downsample": 4},
            "noise": {"photon_budget": 1000, "gaussian_sigma_rel": 0.01, "phase_sigma": 0.01,
                      "shot_noise": true, "thermal_noise": true, "phase_noise": true},
            "master_seed": 7
        }"#;
        let m = DatasetManifest::from_json(text).unwrap();
        assert_eq!(m.sample_count, 8);
        assert_eq!(m.n0, 1.0);
        assert!(!m.propagation.saturate_absorption);
    }

    #[test]
    fn rejects_bad_grids() {
        let mut m = DatasetManifest::default();
        m.grid.downsample = 3;
        assert!(m.validate().is_err());
        let mut m = DatasetManifest::default();
        m.grid.window_x = 10.0 * m.beam.waist;
        assert!(m.validate().is_err());
        let mut m = DatasetManifest::default();
        m.format_version = "nlse-ds/0".into();
        assert!(matches!(m.validate(), Err(Error::Format(_))));
        let mut m = DatasetManifest::default();
        m.sample_count = 7;
        assert!(m.validate().is_err());
        let mut m = DatasetManifest::default();
        m.grid.nx = 224;
        m.grid.ny = 224;
        m.grid.downsample = 1;
        assert!(m.validate().unwrap_err().to_string().contains("per beam waist"));
        m.grid.nx = 448;
        m.grid.ny = 448;
        m.grid.downsample = 2;
        m.validate().unwrap();
    }
}
