//! Two-dimensional FFT built from row transforms and a blocked transpose.
//!
//! The raw transforms leave the spectrum in transposed (column-major) order,
//! `spec[ix * ny + iy]`, which is all a pointwise spectral multiplier needs.
//! The inverse raw transform accepts that layout and restores row-major order.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

const BLOCK: usize = 32;

pub struct Fft2 {
    nx: usize,
    ny: usize,
    row_forward: Arc<dyn Fft<f64>>,
    row_inverse: Arc<dyn Fft<f64>>,
    col_forward: Arc<dyn Fft<f64>>,
    col_inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

/// Reusable work buffers for [`Fft2`].
#[derive(Debug, Default)]
pub struct FftWorkspace {
    scratch: Vec<Complex64>,
    transposed: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        let row_forward = planner.plan_fft_forward(nx);
        let row_inverse = planner.plan_fft_inverse(nx);
        let col_forward = planner.plan_fft_forward(ny);
        let col_inverse = planner.plan_fft_inverse(ny);
        let scratch_len = [
            &row_forward,
            &row_inverse,
            &col_forward,
            &col_inverse,
        ]
        .iter()
        .map(|p| p.get_inplace_scratch_len())
        .max()
        .unwrap_or(0);
        Self {
            nx,
            ny,
            row_forward,
            row_inverse,
            col_forward,
            col_inverse,
            scratch_len,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn workspace(&self) -> FftWorkspace {
        FftWorkspace {
            scratch: vec![Complex64::default(); self.scratch_len],
            transposed: vec![Complex64::default(); self.len()],
        }
    }

    /// Unnormalized forward transform. `data` is row-major on entry and
    /// column-major on exit.
    pub fn forward_raw(&self, data: &mut [Complex64], ws: &mut FftWorkspace) {
        self.check(data, ws);
        self.row_forward.process_with_scratch(data, &mut ws.scratch);
        transpose(data, &mut ws.transposed, self.nx, self.ny);
        self.col_forward
            .process_with_scratch(&mut ws.transposed, &mut ws.scratch);
        data.copy_from_slice(&ws.transposed);
    }

    /// Unnormalized inverse of [`Fft2::forward_raw`]: column-major in, row-major out.
    pub fn inverse_raw(&self, data: &mut [Complex64], ws: &mut FftWorkspace) {
        self.check(data, ws);
        self.col_inverse.process_with_scratch(data, &mut ws.scratch);
        transpose(data, &mut ws.transposed, self.ny, self.nx);
        self.row_inverse
            .process_with_scratch(&mut ws.transposed, &mut ws.scratch);
        data.copy_from_slice(&ws.transposed);
    }

    /// Unitary forward transform (scaled by 1/sqrt(nx*ny)), row-major in and out.
    pub fn forward(&self, data: &mut [Complex64]) {
        let mut ws = self.workspace();
        self.forward_raw(data, &mut ws);
        transpose(data, &mut ws.transposed, self.ny, self.nx);
        let s = 1.0 / (self.len() as f64).sqrt();
        for (d, t) in data.iter_mut().zip(&ws.transposed) {
            *d = t * s;
        }
    }

    /// Unitary inverse transform, row-major in and out.
    pub fn inverse(&self, data: &mut [Complex64]) {
        let mut ws = self.workspace();
        transpose(data, &mut ws.transposed, self.nx, self.ny);
        data.copy_from_slice(&ws.transposed);
        self.inverse_raw(data, &mut ws);
        let s = 1.0 / (self.len() as f64).sqrt();
        data.iter_mut().for_each(|d| *d *= s);
    }

    fn check(&self, data: &[Complex64], ws: &FftWorkspace) {
        assert_eq!(data.len(), self.len(), "buffer does not match FFT plan");
        assert!(
            ws.scratch.len() >= self.scratch_len && ws.transposed.len() == self.len(),
            "workspace built for a different plan"
        );
    }
}

/// Out-of-place transpose of a `rows x cols` row-major matrix.
fn transpose(src: &[Complex64], dst: &mut [Complex64], cols: usize, rows: usize) {
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                let row = &src[r * cols..(r + 1) * cols];
                for c in cb..(cb + BLOCK).min(cols) {
                    dst[c * rows + r] = row[c];
                }
            }
        }
    }
}
