//! Symmetric split-step Fourier propagation through a saturable Kerr medium.
//!
//! The envelope obeys
//!
//! ```text
//! i dψ/dz = -(1/2k₀) ∇⊥²ψ - i(α/2)ψ - k₀ (n₂/n₀) Ĩ ψ,   Ĩ = I / (1 + I/I_sat),  I = |ψ|²
//! ```
//!
//! with `ψ` scaled so that `|ψ|²` is intensity in W/m². The linear part is
//! applied exactly in the spectral domain and the nonlinear part exactly in the
//! spatial domain; Strang ordering makes each step second-order accurate.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{Fft2, FftWorkspace};
use crate::field::ComplexField;
use crate::grid::TransverseGrid;

/// Input laser beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    /// Total power (W).
    pub power: f64,
    /// 1/e² intensity radius (m).
    pub waist: f64,
    /// Vacuum wavelength (m).
    pub wavelength: f64,
}

impl BeamParams {
    /// 2.1 W, 1.7 mm waist, 780 nm.
    pub const fn reference() -> Self {
        Self {
            power: 2.1,
            waist: 1.7e-3,
            wavelength: 780e-9,
        }
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Peak intensity `2P/(πw²)` of the Gaussian profile.
    pub fn peak_intensity(&self) -> f64 {
        2.0 * self.power / (PI * self.waist * self.waist)
    }

    pub fn rayleigh_length(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("power", self.power),
            ("waist", self.waist),
            ("wavelength", self.wavelength),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for BeamParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// Medium constants; `(n2, i_sat, alpha)` is the estimation target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Kerr coefficient (m²/W); negative is defocusing.
    pub n2: f64,
    /// Saturation intensity (W/m²).
    pub i_sat: f64,
    /// Linear absorption (1/m).
    pub alpha: f64,
    /// Background refractive index.
    #[serde(default = "default_n0")]
    pub n0: f64,
}

fn default_n0() -> f64 {
    1.0
}

impl MediumParams {
    pub fn new(n2: f64, i_sat: f64, alpha: f64) -> Self {
        Self {
            n2,
            i_sat,
            alpha,
            n0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n2.is_finite() {
            return Err(Error::invalid("n2", "must be finite"));
        }
        if !(self.i_sat.is_finite() && self.i_sat > 0.0) {
            return Err(Error::invalid(
                "i_sat",
                format!("must be positive, got {}", self.i_sat),
            ));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must be non-negative, got {}", self.alpha),
            ));
        }
        if !(self.n0.is_finite() && self.n0 >= 1.0) {
            return Err(Error::invalid("n0", format!("must be >= 1, got {}", self.n0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    /// Medium length (m).
    pub length: f64,
    pub n_steps: usize,
    /// Also damp absorption by the saturation factor. Off by default: the
    /// propagation equation carries an unsaturated loss term.
    #[serde(default)]
    pub saturate_absorption: bool,
}

impl PropagationConfig {
    pub fn new(length: f64, n_steps: usize) -> Self {
        Self {
            length,
            n_steps,
            saturate_absorption: false,
        }
    }

    pub fn dz(&self) -> f64 {
        self.length / self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be at least 1"));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::invalid(
                "length",
                format!("must be positive, got {}", self.length),
            ));
        }
        Ok(())
    }
}

impl Default for PropagationConfig {
    /// 0.2 m cell in 200 steps.
    fn default() -> Self {
        Self::new(0.2, 200)
    }
}

/// Gaussian input `sqrt(2P/(πw²)) exp(-r²/w²)`, rescaled so the discrete
/// power `Σ|ψ|² dx dy` equals `beam.power`.
pub fn gaussian_input(beam: &BeamParams, grid: &TransverseGrid) -> Result<ComplexField> {
    beam.validate()?;
    grid.validate()?;
    let required = 8.0 * beam.waist;
    let window = grid.window_x.min(grid.window_y);
    if window < required {
        return Err(Error::WindowTooSmall { window, required });
    }
    let amplitude = beam.peak_intensity().sqrt();
    let w2 = beam.waist * beam.waist;
    let mut field = ComplexField::from_fn(*grid, |x, y| {
        Complex64::new(amplitude * (-(x * x + y * y) / w2).exp(), 0.0)
    })?;
    let correction = (beam.power / field.power()).sqrt();
    field.scale(Complex64::new(correction, 0.0));
    Ok(field)
}

/// Spectral multiplier `exp(sign·(-i)(kx²+ky²) dz/(2k₀)) · scale` in the
/// column-major layout produced by [`Fft2::forward_raw`].
fn linear_kernel(grid: &TransverseGrid, k0: f64, dz: f64, sign: f64, scale: f64) -> Vec<Complex64> {
    let kx = grid.kx();
    let ky = grid.ky();
    let mut kernel = Vec::with_capacity(grid.len());
    for &kxi in &kx {
        for &kyj in &ky {
            let phase = -sign * (kxi * kxi + kyj * kyj) * dz / (2.0 * k0);
            kernel.push(Complex64::from_polar(scale, phase));
        }
    }
    kernel
}

/// Single diffraction sub-step of length `dz` (may be negative or a half step).
pub fn step_linear(field: &ComplexField, beam: &BeamParams, dz: f64) -> Result<ComplexField> {
    beam.validate()?;
    if !dz.is_finite() {
        return Err(Error::invalid("dz", "must be finite"));
    }
    field.check_finite()?;
    let grid = *field.grid();
    let fft = Fft2::new(grid.nx, grid.ny);
    let mut ws = fft.workspace();
    let kernel = linear_kernel(&grid, beam.k0(), dz, 1.0, 1.0 / grid.len() as f64);
    let mut values = field.values().to_vec();
    apply_spectral(&fft, &mut ws, &kernel, &mut values);
    Ok(ComplexField::from_parts_unchecked(grid, values))
}

/// Single nonlinear + absorption sub-step of length `dz`.
pub fn step_nonlinear(
    field: &ComplexField,
    beam: &BeamParams,
    medium: &MediumParams,
    dz: f64,
) -> Result<ComplexField> {
    beam.validate()?;
    medium.validate()?;
    if !(dz.is_finite() && dz > 0.0) {
        return Err(Error::invalid("dz", format!("must be positive, got {dz}")));
    }
    field.check_finite()?;
    let mut values = field.values().to_vec();
    let nl = NonlinearStep::new(beam, medium, dz, false);
    if !nl.apply(&mut values) {
        return Err(Error::NonFinite);
    }
    Ok(ComplexField::from_parts_unchecked(*field.grid(), values))
}

fn apply_spectral(fft: &Fft2, ws: &mut FftWorkspace, kernel: &[Complex64], values: &mut [Complex64]) {
    fft.forward_raw(values, ws);
    values
        .iter_mut()
        .zip(kernel)
        .for_each(|(v, k)| *v *= k);
    fft.inverse_raw(values, ws);
}

/// Exact flow of the pointwise part of the equation over one step.
///
/// Within a step `|ψ|²` decays as `I e^{-αs}`, so the accumulated Kerr phase is
/// `k₀ (n₂/n₀) ∫₀^dz Ĩ(I e^{-αs}) ds = k₀ (n₂/n₀) (I_sat/α) ln[(1 + I/I_sat) / (1 + I e^{-α dz}/I_sat)]`,
/// which reduces to `k₀ (n₂/n₀) Ĩ dz` when `α = 0`.
struct NonlinearStep {
    kerr: f64,
    dz: f64,
    inv_isat: f64,
    /// `I_sat / α`, or 0 when lossless.
    isat_over_alpha: f64,
    /// `1 - e^{-α dz}`
    absorbed: f64,
    /// `e^{-α dz}`
    transmitted: f64,
    half_alpha_dz: f64,
    amplitude_decay: f64,
    saturate_absorption: bool,
}

impl NonlinearStep {
    fn new(beam: &BeamParams, medium: &MediumParams, dz: f64, saturate_absorption: bool) -> Self {
        let alpha_dz = medium.alpha * dz;
        Self {
            kerr: beam.k0() * medium.n2 / medium.n0,
            dz,
            inv_isat: 1.0 / medium.i_sat,
            isat_over_alpha: if medium.alpha > 0.0 {
                medium.i_sat / medium.alpha
            } else {
                0.0
            },
            absorbed: -(-alpha_dz).exp_m1(),
            transmitted: (-alpha_dz).exp(),
            half_alpha_dz: 0.5 * alpha_dz,
            amplitude_decay: (-0.5 * alpha_dz).exp(),
            saturate_absorption,
        }
    }

    /// Accumulated Kerr phase for a sample starting the step at `intensity`.
    fn phase(&self, intensity: f64, saturation: f64) -> f64 {
        if self.isat_over_alpha == 0.0 || self.saturate_absorption {
            self.kerr * intensity * saturation * self.dz
        } else {
            let s = intensity * self.inv_isat;
            self.kerr
                * self.isat_over_alpha
                * (s * self.absorbed / (1.0 + s * self.transmitted)).ln_1p()
        }
    }

    /// Returns false if any intensity is non-finite.
    fn apply(&self, values: &mut [Complex64]) -> bool {
        let mut finite = true;
        for v in values.iter_mut() {
            let intensity = v.norm_sqr();
            finite &= intensity.is_finite();
            let saturation = 1.0 / (1.0 + intensity * self.inv_isat);
            let (s, c) = self.phase(intensity, saturation).sin_cos();
            let decay = if self.saturate_absorption {
                (-self.half_alpha_dz * saturation).exp()
            } else {
                self.amplitude_decay
            };
            *v *= Complex64::new(decay * c, decay * s);
        }
        finite
    }
}

/// Reusable propagation engine: owns FFT plans, work buffers and the
/// precomputed diffraction kernels for one grid, beam and step size.
///
/// Adjacent half-step diffraction operators of consecutive steps are fused
/// into one full-step operator, which is the same Strang composition
/// `L(dz/2) N(dz) L(dz/2)` repeated `n_steps` times.
pub struct Propagator {
    grid: TransverseGrid,
    beam: BeamParams,
    cfg: PropagationConfig,
    fft: Fft2,
    ws: FftWorkspace,
    half_kernel: Vec<Complex64>,
    full_kernel: Vec<Complex64>,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator")
            .field("grid", &self.grid)
            .field("beam", &self.beam)
            .field("cfg", &self.cfg)
            .finish()
    }
}

impl Propagator {
    pub fn new(grid: TransverseGrid, beam: BeamParams, cfg: PropagationConfig) -> Result<Self> {
        Self::with_kinetic_sign(grid, beam, cfg, 1.0)
    }

    /// `sign = -1` flips the diffraction phase; only used to check that the
    /// diagnostics notice a wrong-signed kinetic term.
    pub(crate) fn with_kinetic_sign(
        grid: TransverseGrid,
        beam: BeamParams,
        cfg: PropagationConfig,
        sign: f64,
    ) -> Result<Self> {
        grid.validate()?;
        beam.validate()?;
        cfg.validate()?;
        let fft = Fft2::new(grid.nx, grid.ny);
        let ws = fft.workspace();
        let norm = 1.0 / grid.len() as f64;
        let dz = cfg.dz();
        Ok(Self {
            half_kernel: linear_kernel(&grid, beam.k0(), 0.5 * dz, sign, norm),
            full_kernel: linear_kernel(&grid, beam.k0(), dz, sign, norm),
            grid,
            beam,
            cfg,
            fft,
            ws,
        })
    }

    pub fn grid(&self) -> &TransverseGrid {
        &self.grid
    }

    pub fn beam(&self) -> &BeamParams {
        &self.beam
    }

    pub fn config(&self) -> &PropagationConfig {
        &self.cfg
    }

    /// Propagates `field` through the medium. Fails with [`Error::BlowUp`]
    /// carrying the 0-based step index at which a non-finite value appeared.
    pub fn run(&mut self, field: &ComplexField, medium: &MediumParams) -> Result<ComplexField> {
        medium.validate()?;
        field.check_finite()?;
        if *field.grid() != self.grid {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.grid.nx, self.grid.ny),
                actual: format!("{}x{}", field.grid().nx, field.grid().ny),
            });
        }
        let nl = NonlinearStep::new(&self.beam, medium, self.cfg.dz(), self.cfg.saturate_absorption);
        let mut values = field.values().to_vec();
        apply_spectral(&self.fft, &mut self.ws, &self.half_kernel, &mut values);
        for step in 0..self.cfg.n_steps {
            if !nl.apply(&mut values) {
                return Err(Error::BlowUp { step });
            }
            let kernel = if step + 1 == self.cfg.n_steps {
                &self.half_kernel
            } else {
                &self.full_kernel
            };
            apply_spectral(&self.fft, &mut self.ws, kernel, &mut values);
        }
        let out = ComplexField::from_parts_unchecked(self.grid, values);
        out.check_finite().map_err(|_| Error::BlowUp {
            step: self.cfg.n_steps - 1,
        })?;
        Ok(out)
    }
}

/// Propagates `field` over `cfg.length` with `cfg.n_steps` Strang steps.
pub fn propagate(
    field: &ComplexField,
    beam: &BeamParams,
    medium: &MediumParams,
    cfg: &PropagationConfig,
) -> Result<ComplexField> {
    Propagator::new(*field.grid(), *beam, *cfg)?.run(field, medium)
}
