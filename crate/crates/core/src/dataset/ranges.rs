use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter triplet ordered `(n2, i_sat, alpha)`.
pub type Triplet = [f64; 3];

pub const AXIS_NAMES: [&str; 3] = ["n2", "i_sat", "alpha"];

/// Relative slack beyond an endpoint before a label counts as out of range.
const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    /// `i`-th of `count` evenly spaced values; endpoints are exact.
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.span() / (self.count - 1) as f64
        }
    }

    pub fn spacing(&self) -> f64 {
        self.span() / (self.count - 1) as f64
    }

    fn validate(&self, axis: &'static str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::invalid(
                axis,
                format!("need min < max, got [{:e}, {:e}]", self.min, self.max),
            ));
        }
        if self.count < 2 {
            return Err(Error::invalid(axis, "need at least 2 samples per axis"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    #[default]
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterRanges {
    pub n2: AxisRange,
    pub i_sat: AxisRange,
    pub alpha: AxisRange,
    #[serde(default)]
    pub sampling: Sampling,
}

impl Default for ParameterRanges {
    /// n2 in [-1e-9, -1e-10] m²/W, I_sat in [5e4, 1e6] W/m², alpha in [13, 30] 1/m,
    /// 50 values each.
    fn default() -> Self {
        Self::with_counts(50, 50, 50)
    }
}

impl ParameterRanges {
    pub fn with_counts(n2: usize, i_sat: usize, alpha: usize) -> Self {
        Self {
            n2: AxisRange::new(-1e-9, -1e-10, n2),
            i_sat: AxisRange::new(5e4, 1e6, i_sat),
            alpha: AxisRange::new(13.0, 30.0, alpha),
            sampling: Sampling::Linear,
        }
    }

    pub fn axes(&self) -> [&AxisRange; 3] {
        [&self.n2, &self.i_sat, &self.alpha]
    }

    pub fn validate(&self) -> Result<()> {
        for (axis, name) in self.axes().into_iter().zip(AXIS_NAMES) {
            axis.validate(name)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n2.count * self.i_sat.count * self.alpha.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Triplet at ordinal `index` of the lexicographic enumeration
    /// (n2 outermost, alpha innermost).
    pub fn triplet(&self, index: usize) -> Triplet {
        let a = index % self.alpha.count;
        let rest = index / self.alpha.count;
        let s = rest % self.i_sat.count;
        let n = rest / self.i_sat.count;
        [self.n2.value(n), self.i_sat.value(s), self.alpha.value(a)]
    }

    /// Per-axis min-max normalization to `[0, 1]`.
    pub fn normalize(&self, physical: &Triplet) -> Result<Triplet> {
        let mut out = [0.0; 3];
        for (k, (axis, name)) in self.axes().into_iter().zip(AXIS_NAMES).enumerate() {
            let v = physical[k];
            let slack = RANGE_SLACK * axis.min.abs().max(axis.max.abs());
            if !v.is_finite() || v < axis.min - slack || v > axis.max + slack {
                return Err(Error::LabelOutOfRange {
                    axis: name,
                    value: v,
                    min: axis.min,
                    max: axis.max,
                });
            }
            out[k] = (v - axis.min) / axis.span();
        }
        Ok(out)
    }

    pub fn denormalize(&self, normalized: &Triplet) -> Triplet {
        let axes = self.axes();
        std::array::from_fn(|k| axes[k].min + normalized[k] * axes[k].span())
    }
}

/// All grid triplets in lexicographic order (n2 outermost, alpha innermost).
pub fn enumerate_grid(ranges: &ParameterRanges) -> Vec<Triplet> {
    (0..ranges.len()).map(|i| ranges.triplet(i)).collect()
}

pub fn normalize_labels(physical: &Triplet, ranges: &ParameterRanges) -> Result<Triplet> {
    ranges.normalize(physical)
}

pub fn denormalize_labels(normalized: &Triplet, ranges: &ParameterRanges) -> Triplet {
    ranges.denormalize(normalized)
}
