//! Analytic self-checks of the solver, the loss and the storage format.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::dataset::store::{decode_labels, decode_observation, encode_labels, encode_observation};
use crate::dataset::{DatasetManifest, ParameterRanges};
use crate::error::Result;
use crate::field::ComplexField;
use crate::grid::TransverseGrid;
use crate::imaging::{Observation, IMAGE_PIXELS};
use crate::regression::{nll, GaussianPrediction};
use crate::solver::{gaussian_input, BeamParams, MediumParams, PropagationConfig, Propagator};

pub const CONSERVATION_TOLERANCE: f64 = 1e-8;
pub const BEER_LAMBERT_TOLERANCE: f64 = 1e-9;
pub const DIFFRACTION_TOLERANCE: f64 = 5e-3;
/// Minimum normalized overlap with the analytic Gaussian beam at `z = z_R`.
pub const DIFFRACTION_MIN_FIDELITY: f64 = 0.9999;
pub const STRANG_RATIO_RANGE: (f64, f64) = (3.5, 4.5);
pub const NLL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Fault injection for exercising the checks themselves.
#[derive(Debug, Clone, Copy, Default)]
pub struct SelfTestOptions {
    /// Propagate with the diffraction phase sign flipped.
    pub reverse_kinetic_phase: bool,
    /// Use this step count for every resolution of the convergence study.
    pub forced_steps: Option<usize>,
}

impl SelfTestOptions {
    fn kinetic_sign(&self) -> f64 {
        if self.reverse_kinetic_phase {
            -1.0
        } else {
            1.0
        }
    }
}

/// Reference beam on a 15-waist window.
pub fn reference_grid(n: usize) -> TransverseGrid {
    TransverseGrid::square(n, 15.0 * BeamParams::reference().waist).expect("valid grid")
}

/// Center of the default parameter ranges.
pub fn mid_range_medium() -> MediumParams {
    let t = ParameterRanges::default().denormalize(&[0.5; 3]);
    MediumParams::new(t[0], t[1], t[2])
}

fn run(
    grid: TransverseGrid,
    beam: BeamParams,
    medium: &MediumParams,
    cfg: PropagationConfig,
    opts: &SelfTestOptions,
) -> Result<(ComplexField, ComplexField)> {
    let input = gaussian_input(&beam, &grid)?;
    let out = Propagator::with_kinetic_sign(grid, beam, cfg, opts.kinetic_sign())?.run(&input, medium)?;
    Ok((input, out))
}

/// Lossless propagation keeps the power.
pub fn power_conservation(grid_size: usize, n_steps: usize, opts: &SelfTestOptions) -> Result<CheckResult> {
    let medium = MediumParams {
        alpha: 0.0,
        ..mid_range_medium()
    };
    let cfg = PropagationConfig::new(0.2, n_steps);
    let (input, out) = run(reference_grid(grid_size), BeamParams::reference(), &medium, cfg, opts)?;
    let drift = (out.power() - input.power()).abs() / input.power();
    Ok(CheckResult::new(
        "power conservation",
        drift < CONSERVATION_TOLERANCE,
        format!("{grid_size}^2 grid, {n_steps} steps, relative drift {drift:.3e} (limit {CONSERVATION_TOLERANCE:e})"),
    ))
}

/// Output power follows `exp(-alpha L)` for each absorption coefficient.
pub fn beer_lambert(grid_size: usize, alphas: &[f64], opts: &SelfTestOptions) -> Result<CheckResult> {
    let length = 0.2;
    let mut worst = 0.0f64;
    for &alpha in alphas {
        let medium = MediumParams {
            alpha,
            ..mid_range_medium()
        };
        let (input, out) = run(
            reference_grid(grid_size),
            BeamParams::reference(),
            &medium,
            PropagationConfig::new(length, 200),
            opts,
        )?;
        let expected = (-alpha * length).exp();
        let ratio = out.power() / input.power();
        worst = worst.max((ratio - expected).abs() / expected);
    }
    Ok(CheckResult::new(
        "beer-lambert absorption",
        worst < BEER_LAMBERT_TOLERANCE,
        format!("alpha {alphas:?} 1/m over 0.2 m, worst relative error {worst:.3e} (limit {BEER_LAMBERT_TOLERANCE:e})"),
    ))
}

/// Analytic Gaussian beam `(q0/q) exp(i k r² / (2q))`, `q = z - i z_R`, scaled
/// to the input amplitude.
pub fn gaussian_beam_field(beam: &BeamParams, grid: &TransverseGrid, z: f64) -> Result<ComplexField> {
    let k = beam.k0();
    let q0 = Complex64::new(0.0, -beam.rayleigh_length());
    let q = Complex64::new(z, 0.0) + q0;
    let amp = beam.peak_intensity().sqrt();
    ComplexField::from_fn(*grid, |x, y| {
        let r2 = x * x + y * y;
        amp * q0 / q * (Complex64::i() * k * r2 / (2.0 * q)).exp()
    })
}

/// Normalized overlap `|<a, b>| / (|a| |b|)`.
pub fn fidelity(a: &ComplexField, b: &ComplexField) -> f64 {
    let dot: Complex64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x.conj() * y)
        .sum();
    let na: f64 = a.values().iter().map(|v| v.norm_sqr()).sum();
    let nb: f64 = b.values().iter().map(|v| v.norm_sqr()).sum();
    dot.norm() / (na * nb).sqrt()
}

/// Free-space diffraction of a 50 µm beam over one Rayleigh length.
pub fn linear_diffraction(opts: &SelfTestOptions) -> Result<CheckResult> {
    let beam = BeamParams {
        power: 1.0,
        waist: 50e-6,
        wavelength: 780e-9,
    };
    let grid = TransverseGrid::square(256, 16.0 * beam.waist)?;
    let z_r = beam.rayleigh_length();
    let (input, out) = run(
        grid,
        beam,
        &MediumParams::new(0.0, 1.0, 0.0),
        PropagationConfig::new(z_r, 10),
        opts,
    )?;
    let w0 = input.second_moment_radius();
    let w = out.second_moment_radius();
    let radius_error = (w / w0 - SQRT_2).abs() / SQRT_2;
    let fid = fidelity(&out, &gaussian_beam_field(&beam, &grid, z_r)?);
    Ok(CheckResult::new(
        "linear diffraction",
        radius_error < DIFFRACTION_TOLERANCE && fid > DIFFRACTION_MIN_FIDELITY,
        format!(
            "z_R = {z_r:.4e} m, w/w0 = {:.5} (error {radius_error:.2e}), overlap with analytic beam {fid:.6}",
            w / w0
        ),
    ))
}

/// Ratio of successive self-convergence errors when halving the step.
pub fn strang_ratio(grid_size: usize, steps: [usize; 3], opts: &SelfTestOptions) -> Result<f64> {
    let grid = reference_grid(grid_size);
    let beam = BeamParams::reference();
    let medium = mid_range_medium();
    let input = gaussian_input(&beam, &grid)?;
    let mut outs = Vec::with_capacity(3);
    for n in steps {
        let n = opts.forced_steps.unwrap_or(n);
        let mut prop =
            Propagator::with_kinetic_sign(grid, beam, PropagationConfig::new(0.2, n), opts.kinetic_sign())?;
        outs.push(prop.run(&input, &medium)?);
    }
    Ok(outs[0].l2_distance(&outs[1])? / outs[1].l2_distance(&outs[2])?)
}

pub fn strang_order(grid_size: usize, opts: &SelfTestOptions) -> Result<CheckResult> {
    let steps = [200, 400, 800];
    let ratio = strang_ratio(grid_size, steps, opts)?;
    let (lo, hi) = STRANG_RATIO_RANGE;
    Ok(CheckResult::new(
        "strang order",
        ratio >= lo && ratio <= hi,
        format!("{grid_size}^2 grid, steps {steps:?}, error ratio {ratio:.4} (expected [{lo}, {hi}])"),
    ))
}

pub fn nll_values() -> CheckResult {
    let p = GaussianPrediction::from_factor(
        [0.5; 3],
        &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    );
    let at_mean = nll(&p.mean, &p).unwrap_or(f64::NAN);
    let unit_step = nll(&[1.5, 0.5, 0.5], &p).unwrap_or(f64::NAN);
    let e0 = (at_mean - 2.756815599614018).abs();
    let e1 = (unit_step - 3.256815599614018).abs();
    CheckResult::new(
        "nll analytic values",
        e0 < NLL_TOLERANCE && e1 < NLL_TOLERANCE,
        format!("{at_mean:.9} and {unit_step:.9}"),
    )
}

pub fn format_round_trip() -> CheckResult {
    let density: Vec<f32> = (0..IMAGE_PIXELS).map(|i| (i as f32 * 0.37).sin().abs() * 4.6e5).collect();
    let phase: Vec<f32> = (0..IMAGE_PIXELS).map(|i| (i as f32 * 0.013).sin() * 3.0).collect();
    let passed = (|| -> Result<bool> {
        let obs = Observation::new(density, phase)?;
        let mut bytes = Vec::new();
        encode_observation(&obs, &mut bytes);
        let back = decode_observation(&bytes)?;
        let labels = [-5.5e-10, 5.25e5, 21.5];
        let mut lb = Vec::new();
        encode_labels(&labels, &mut lb);
        let manifest = DatasetManifest::default();
        let manifest_back = DatasetManifest::from_json(&manifest.to_json()?)?;
        Ok(back.density.iter().zip(&obs.density).all(|(a, b)| a.to_bits() == b.to_bits())
            && back.phase.iter().zip(&obs.phase).all(|(a, b)| a.to_bits() == b.to_bits())
            && decode_labels(&lb) == labels
            && manifest_back == manifest)
    })()
    .unwrap_or(false);
    CheckResult::new(
        "format round trip",
        passed,
        "observation, label and manifest encodings".into(),
    )
}

/// Runs every check; solver failures count as failed checks.
pub fn run_all(opts: &SelfTestOptions) -> Vec<CheckResult> {
    fn or_failed(name: &'static str, r: Result<CheckResult>) -> CheckResult {
        r.unwrap_or_else(|e| CheckResult::new(name, false, e.to_string()))
    }
    vec![
        or_failed("power conservation", power_conservation(896, 200, opts)),
        or_failed("beer-lambert absorption", beer_lambert(448, &[13.0, 20.0, 30.0], opts)),
        or_failed("linear diffraction", linear_diffraction(opts)),
        or_failed("strang order", strang_order(448, opts)),
        nll_values(),
        format_round_trip(),
    ]
}
