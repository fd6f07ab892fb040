use serde::{Deserialize, Serialize};

use crate::dataset::{GridConfig, Triplet};
use crate::error::Result;
use crate::field::ComplexField;
use crate::imaging::{downsample_field, measure, Observation};
use crate::solver::{gaussian_input, BeamParams, MediumParams, PropagationConfig, Propagator};

/// Fixed experimental setup: everything except the medium triplet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub beam: BeamParams,
    pub propagation: PropagationConfig,
    pub grid: GridConfig,
    pub n0: f64,
}

impl Scenario {
    pub fn medium(&self, triplet: &Triplet) -> MediumParams {
        MediumParams {
            n2: triplet[0],
            i_sat: triplet[1],
            alpha: triplet[2],
            n0: self.n0,
        }
    }
}

/// Noiseless forward model `triplet -> Observation` with cached plans and input.
#[derive(Debug)]
pub struct Simulator {
    scenario: Scenario,
    propagator: Propagator,
    input: ComplexField,
}

impl Simulator {
    pub fn new(scenario: Scenario) -> Result<Self> {
        let grid = scenario.grid.grid()?;
        let input = gaussian_input(&scenario.beam, &grid)?;
        let propagator = Propagator::new(grid, scenario.beam, scenario.propagation)?;
        Ok(Self {
            scenario,
            propagator,
            input,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn input(&self) -> &ComplexField {
        &self.input
    }

    /// Output-plane field on the computational grid.
    pub fn output_field(&mut self, triplet: &Triplet) -> Result<ComplexField> {
        let medium = self.scenario.medium(triplet);
        self.propagator.run(&self.input, &medium)
    }

    pub fn observe(&mut self, triplet: &Triplet) -> Result<Observation> {
        let out = self.output_field(triplet)?;
        measure(&downsample_field(&out, self.scenario.grid.downsample)?)
    }
}
