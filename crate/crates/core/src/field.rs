use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TransverseGrid;

/// Complex envelope sampled on a [`TransverseGrid`], scaled so that `|psi|^2`
/// is the optical intensity in W/m^2.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: TransverseGrid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: TransverseGrid, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", grid.nx, grid.ny),
                actual: format!("{} samples", values.len()),
            });
        }
        let field = Self { grid, values };
        field.check_finite()?;
        Ok(field)
    }

    /// Builds a field by evaluating `f(x, y)` at every grid point.
    pub fn from_fn(grid: TransverseGrid, mut f: impl FnMut(f64, f64) -> Complex64) -> Result<Self> {
        let xs = grid.xs();
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny {
            let y = grid.y(iy);
            values.extend(xs.iter().map(|&x| f(x, y)));
        }
        Self::new(grid, values)
    }

    pub fn constant(grid: TransverseGrid, value: Complex64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub(crate) fn from_parts_unchecked(grid: TransverseGrid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &TransverseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.grid.nx + ix]
    }

    pub fn check_finite(&self) -> Result<()> {
        if self
            .values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Total power `sum |psi|^2 dx dy` in W.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn peak_intensity(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.norm_sqr())
            .fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.values.iter_mut().for_each(|z| *z *= factor);
    }

    /// Intensity-weighted second-moment radius `sqrt(2 <x^2 + y^2>)`, which
    /// equals the 1/e^2 radius for a Gaussian beam. Moments are taken about
    /// the intensity centroid.
    pub fn second_moment_radius(&self) -> f64 {
        let g = &self.grid;
        let (mut p, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for iy in 0..g.ny {
            let y = g.y(iy);
            for ix in 0..g.nx {
                let i = self.values[iy * g.nx + ix].norm_sqr();
                p += i;
                sx += i * g.x(ix);
                sy += i * y;
            }
        }
        let (cx, cy) = (sx / p, sy / p);
        let mut m2 = 0.0;
        for iy in 0..g.ny {
            let dy = g.y(iy) - cy;
            for ix in 0..g.nx {
                let dx = g.x(ix) - cx;
                m2 += self.values[iy * g.nx + ix].norm_sqr() * (dx * dx + dy * dy);
            }
        }
        (2.0 * m2 / p).sqrt()
    }

    /// L2 norm of the difference `sqrt(sum |a - b|^2 dx dy)`.
    pub fn l2_distance(&self, other: &ComplexField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", self.grid),
                actual: format!("{:?}", other.grid),
            });
        }
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.grid.cell_area()).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let g = TransverseGrid::square(4, 1.0).unwrap();
        assert!(ComplexField::new(g, vec![Complex64::default(); 15]).is_err());
        let mut v = vec![Complex64::new(1.0, 0.0); 16];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(ComplexField::new(g, v), Err(Error::NonFinite)));
    }

    #[test]
    fn power_of_constant_field() {
        let g = TransverseGrid::square(8, 2.0).unwrap();
        let f = ComplexField::constant(g, Complex64::new(3.0, 4.0)).unwrap();
        assert!((f.power() - 25.0 * 4.0).abs() < 1e-12);
        assert_eq!(f.peak_intensity(), 25.0);
    }
}
