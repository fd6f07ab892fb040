//! Field-to-image conversion: block downsampling, (density, phase) channels
//! and camera-like noise.

use std::f32::consts::PI as PI_F32;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField;

/// Side length of the square observation images.
pub const IMAGE_SIZE: usize = 224;
pub const IMAGE_PIXELS: usize = IMAGE_SIZE * IMAGE_SIZE;

/// Two-channel observation of the output plane, row-major 224x224.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Intensity `|ψ|²` (W/m²), non-negative.
    pub density: Vec<f32>,
    /// Phase relative to the center pixel, in `[-π, π)`.
    pub phase: Vec<f32>,
}

impl Observation {
    pub fn new(density: Vec<f32>, phase: Vec<f32>) -> Result<Self> {
        let obs = Self { density, phase };
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, chan) in [("density", &self.density), ("phase", &self.phase)] {
            if chan.len() != IMAGE_PIXELS {
                return Err(Error::ShapeMismatch {
                    expected: format!("{IMAGE_PIXELS} {name} pixels"),
                    actual: chan.len().to_string(),
                });
            }
        }
        if !self.density.iter().chain(&self.phase).all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !self.density.iter().all(|d| *d >= 0.0) {
            return Err(Error::invalid("density", "must be non-negative"));
        }
        if !self
            .phase
            .iter()
            .all(|p| (-PI_F32..PI_F32).contains(p))
        {
            return Err(Error::invalid("phase", "must lie in [-pi, pi)"));
        }
        Ok(())
    }

    pub fn peak_density(&self) -> f32 {
        self.density.iter().copied().fold(0.0, f32::max)
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let w = (phase + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// Single-precision image of a wrapped phase, keeping the half-open interval
/// after rounding (f32 π is slightly larger than π).
fn phase_to_f32(phase: f64) -> f32 {
    let p = wrap_phase(phase) as f32;
    if p >= PI_F32 {
        -PI_F32
    } else {
        p.max(-PI_F32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Expected photon count at the noiseless peak pixel.
    pub photon_budget: f64,
    /// Additive Gaussian density noise, as a fraction of the peak density.
    pub gaussian_sigma_rel: f64,
    /// Additive Gaussian phase noise (rad).
    pub phase_sigma: f64,
    pub shot_noise: bool,
    pub thermal_noise: bool,
    pub phase_noise: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            photon_budget: 1000.0,
            gaussian_sigma_rel: 0.01,
            phase_sigma: 0.01,
            shot_noise: true,
            thermal_noise: true,
            phase_noise: true,
        }
    }
}

impl NoiseConfig {
    pub fn disabled() -> Self {
        Self {
            shot_noise: false,
            thermal_noise: false,
            phase_noise: false,
            ..Self::default()
        }
    }

    pub fn is_disabled(&self) -> bool {
        !(self.shot_noise || self.thermal_noise || self.phase_noise)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("photon_budget", self.photon_budget),
            ("gaussian_sigma_rel", self.gaussian_sigma_rel),
            ("phase_sigma", self.phase_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        if self.shot_noise && self.photon_budget <= 0.0 {
            return Err(Error::invalid(
                "photon_budget",
                "must be positive when shot noise is enabled",
            ));
        }
        Ok(())
    }
}

/// Replaces every `factor x factor` block by its complex mean.
pub fn downsample_field(field: &ComplexField, factor: usize) -> Result<ComplexField> {
    let grid = *field.grid();
    let coarse = grid.coarsened(factor)?;
    if factor == 1 {
        return Ok(field.clone());
    }
    let inv = 1.0 / (factor * factor) as f64;
    let mut out = vec![Complex64::default(); coarse.len()];
    for iy in 0..grid.ny {
        let row = &field.values()[iy * grid.nx..(iy + 1) * grid.nx];
        let dst = &mut out[(iy / factor) * coarse.nx..(iy / factor + 1) * coarse.nx];
        for (cx, block) in row.chunks_exact(factor).enumerate() {
            dst[cx] += block.iter().sum::<Complex64>();
        }
    }
    out.iter_mut().for_each(|v| *v *= inv);
    ComplexField::new(coarse, out)
}

/// Density and center-referenced phase of a 224x224 field.
///
/// If the center sample is exactly zero the raw argument is used.
pub fn measure(field: &ComplexField) -> Result<Observation> {
    let grid = field.grid();
    if grid.nx != IMAGE_SIZE || grid.ny != IMAGE_SIZE {
        return Err(Error::ShapeMismatch {
            expected: format!("{IMAGE_SIZE}x{IMAGE_SIZE}"),
            actual: format!("{}x{}", grid.nx, grid.ny),
        });
    }
    field.check_finite()?;
    let center = field.values()[grid.center_index()];
    let reference = if center.norm() > 0.0 {
        center.conj() / center.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let density = field.values().iter().map(|z| z.norm_sqr() as f32).collect();
    let phase = field
        .values()
        .iter()
        .map(|z| phase_to_f32((z * reference).arg()))
        .collect();
    Observation::new(density, phase)
}

/// Applies shot, thermal and phase noise. Pixels are visited in row-major
/// order, density before phase, so the result is a pure function of the
/// generator state.
pub fn add_noise<R: Rng + ?Sized>(
    obs: &Observation,
    cfg: &NoiseConfig,
    rng: &mut R,
) -> Result<Observation> {
    cfg.validate()?;
    obs.validate()?;
    if cfg.is_disabled() {
        return Ok(obs.clone());
    }
    let peak = obs.peak_density() as f64;
    let mut density = obs.density.clone();
    if peak > 0.0 && (cfg.shot_noise || cfg.thermal_noise) {
        let photons_per_unit = cfg.photon_budget / peak;
        let thermal = Normal::new(0.0, cfg.gaussian_sigma_rel * peak)
            .map_err(|e| Error::invalid("gaussian_sigma_rel", e.to_string()))?;
        for d in density.iter_mut() {
            let mut v = *d as f64;
            if cfg.shot_noise {
                let mean = v * photons_per_unit;
                let counts = if mean > 0.0 {
                    Poisson::new(mean)
                        .map_err(|e| Error::invalid("photon_budget", e.to_string()))?
                        .sample(rng)
                } else {
                    0.0
                };
                v = counts / photons_per_unit;
            }
            if cfg.thermal_noise {
                v += thermal.sample(rng);
            }
            *d = v.max(0.0) as f32;
        }
    }
    let mut phase = obs.phase.clone();
    if cfg.phase_noise && cfg.phase_sigma > 0.0 {
        let jitter = Normal::new(0.0, cfg.phase_sigma)
            .map_err(|e| Error::invalid("phase_sigma", e.to_string()))?;
        for p in phase.iter_mut() {
            *p = phase_to_f32(*p as f64 + jitter.sample(rng));
        }
    }
    Observation::new(density, phase)
}
