use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform transverse sampling grid with periodic boundaries.
///
/// Samples are stored row-major: `values[iy * nx + ix]`. Position `x_i` is
/// `(i - nx/2) * dx`, so the sample at `(nx/2, ny/2)` sits on the optical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseGrid {
    pub nx: usize,
    pub ny: usize,
    /// Physical extent along x (m).
    pub window_x: f64,
    /// Physical extent along y (m).
    pub window_y: f64,
}

impl TransverseGrid {
    pub fn new(nx: usize, ny: usize, window_x: f64, window_y: f64) -> Result<Self> {
        let grid = Self {
            nx,
            ny,
            window_x,
            window_y,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn square(n: usize, window: f64) -> Result<Self> {
        Self::new(n, n, window, window)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::invalid(
                "grid",
                format!("need at least 2 samples per axis, got {}x{}", self.nx, self.ny),
            ));
        }
        if !(self.window_x.is_finite() && self.window_x > 0.0)
            || !(self.window_y.is_finite() && self.window_y > 0.0)
        {
            return Err(Error::invalid("grid", "window extents must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.window_x / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.window_y / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn center_index(&self) -> usize {
        (self.ny / 2) * self.nx + self.nx / 2
    }

    pub fn x(&self, ix: usize) -> f64 {
        (ix as f64 - (self.nx / 2) as f64) * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        (iy as f64 - (self.ny / 2) as f64) * self.dy()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    /// Angular spatial frequencies along x in FFT ordering (rad/m).
    pub fn kx(&self) -> Vec<f64> {
        fft_frequencies(self.nx, self.dx())
    }

    /// Angular spatial frequencies along y in FFT ordering (rad/m).
    pub fn ky(&self) -> Vec<f64> {
        fft_frequencies(self.ny, self.dy())
    }

    /// Grid coarsened by an integer factor over the same physical window.
    pub fn coarsened(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.nx.is_multiple_of(factor) || !self.ny.is_multiple_of(factor) {
            return Err(Error::NotDivisible {
                nx: self.nx,
                ny: self.ny,
                factor,
            });
        }
        Self::new(
            self.nx / factor,
            self.ny / factor,
            self.window_x,
            self.window_y,
        )
    }
}

fn fft_frequencies(n: usize, d: f64) -> Vec<f64> {
    let scale = 2.0 * PI / (n as f64 * d);
    (0..n)
        .map(|i| {
            let f = if i < n.div_ceil(2) {
                i as f64
            } else {
                i as f64 - n as f64
            };
            f * scale
        })
        .collect()
}
