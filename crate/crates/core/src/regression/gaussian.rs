use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dataset::Triplet;
use crate::error::{Error, Result};

/// Floor added to the softplus-mapped Cholesky diagonal.
pub const CHOL_EPS: f64 = 1e-6;

/// Dimension of the label vector.
pub const DIM: usize = 3;

/// Predicted mean and covariance `Σ = L Lᵀ`.
///
/// `chol` holds `[d0, d1, d2, l10, l20, l21]`: the diagonal of `L` before
/// `softplus(x) + 1e-6`, then the strict lower triangle row by row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPrediction {
    pub mean: Triplet,
    pub chol: [f64; 6],
}

/// Lower-triangular 3x3 matrix stored densely, row-major.
pub type Lower = [[f64; 3]; 3];

pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Inverse of `softplus(x) + CHOL_EPS`, for building predictions from a
/// desired factor. Requires `d > CHOL_EPS`.
pub fn inverse_diag(d: f64) -> f64 {
    let y = d - CHOL_EPS;
    // softplus^-1(y) = y + ln(1 - e^-y)
    y + (-(-y).exp()).ln_1p()
}

impl GaussianPrediction {
    pub fn new(mean: Triplet, chol: [f64; 6]) -> Self {
        Self { mean, chol }
    }

    /// Prediction whose factor is `l` (diagonal must exceed `CHOL_EPS`).
    pub fn from_factor(mean: Triplet, l: &Lower) -> Self {
        Self {
            mean,
            chol: [
                inverse_diag(l[0][0]),
                inverse_diag(l[1][1]),
                inverse_diag(l[2][2]),
                l[1][0],
                l[2][0],
                l[2][1],
            ],
        }
    }

    pub fn factor(&self) -> Lower {
        let c = &self.chol;
        [
            [softplus(c[0]) + CHOL_EPS, 0.0, 0.0],
            [c[3], softplus(c[1]) + CHOL_EPS, 0.0],
            [c[4], c[5], softplus(c[2]) + CHOL_EPS],
        ]
    }

    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let l = self.factor();
        std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..DIM).map(|k| l[i][k] * l[j][k]).sum())
        })
    }

    /// Parameters in gradient order: mean (3) then `chol` (6).
    pub fn params(&self) -> [f64; 9] {
        let mut p = [0.0; 9];
        p[..3].copy_from_slice(&self.mean);
        p[3..].copy_from_slice(&self.chol);
        p
    }

    pub fn from_params(p: &[f64; 9]) -> Self {
        Self {
            mean: [p[0], p[1], p[2]],
            chol: [p[3], p[4], p[5], p[6], p[7], p[8]],
        }
    }

    fn check_finite(&self) -> Result<()> {
        if self.params().iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }
}

fn forward_substitute(l: &Lower, r: &Triplet) -> Triplet {
    let z0 = r[0] / l[0][0];
    let z1 = (r[1] - l[1][0] * z0) / l[1][1];
    let z2 = (r[2] - l[2][0] * z0 - l[2][1] * z1) / l[2][2];
    [z0, z1, z2]
}

fn back_substitute_transposed(l: &Lower, z: &Triplet) -> Triplet {
    let u2 = z[2] / l[2][2];
    let u1 = (z[1] - l[2][1] * u2) / l[1][1];
    let u0 = (z[0] - l[1][0] * u1 - l[2][0] * u2) / l[0][0];
    [u0, u1, u2]
}

struct Terms {
    l: Lower,
    z: Triplet,
    value: f64,
}

fn terms(x: &Triplet, pred: &GaussianPrediction) -> Result<Terms> {
    pred.check_finite()?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let l = pred.factor();
    assert!(
        (0..DIM).all(|i| l[i][i] >= CHOL_EPS),
        "Cholesky diagonal below floor"
    );
    let r = [x[0] - pred.mean[0], x[1] - pred.mean[1], x[2] - pred.mean[2]];
    let z = forward_substitute(&l, &r);
    let mahalanobis: f64 = z.iter().map(|v| v * v).sum();
    let log_det: f64 = 2.0 * (0..DIM).map(|i| l[i][i].ln()).sum::<f64>();
    let value = 0.5 * mahalanobis + 0.5 * log_det + 0.5 * DIM as f64 * (2.0 * PI).ln();
    Ok(Terms { l, z, value })
}

/// Multivariate Gaussian negative log-likelihood of `x` under `pred`:
/// `½ (x-μ)ᵀ Σ⁻¹ (x-μ) + ½ ln|Σ| + (d/2) ln 2π`, evaluated through the
/// Cholesky factor.
pub fn nll(x: &Triplet, pred: &GaussianPrediction) -> Result<f64> {
    Ok(terms(x, pred)?.value)
}

/// Mean loss over a batch.
pub fn nll_batch(xs: &[Triplet], preds: &[GaussianPrediction]) -> Result<f64> {
    if xs.len() != preds.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: preds.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::invalid("batch", "must not be empty"));
    }
    let mut total = 0.0;
    for (x, p) in xs.iter().zip(preds) {
        total += nll(x, p)?;
    }
    Ok(total / xs.len() as f64)
}

/// Analytic gradient of [`nll`] with respect to [`GaussianPrediction::params`].
pub fn nll_gradient(x: &Triplet, pred: &GaussianPrediction) -> Result<[f64; 9]> {
    let Terms { l, z, .. } = terms(x, pred)?;
    // u = Σ⁻¹ (x - μ)
    let u = back_substitute_transposed(&l, &z);
    // ∂/∂L_ij = -u_i z_j + δ_ij / L_ii on the lower triangle
    let dl = |i: usize, j: usize| -u[i] * z[j] + if i == j { 1.0 / l[i][i] } else { 0.0 };
    let c = &pred.chol;
    Ok([
        -u[0],
        -u[1],
        -u[2],
        dl(0, 0) * sigmoid(c[0]),
        dl(1, 1) * sigmoid(c[1]),
        dl(2, 2) * sigmoid(c[2]),
        dl(1, 0),
        dl(2, 0),
        dl(2, 1),
    ])
}

/// Worst relative deviation between `gradient` and central finite differences
/// of [`nll`] with step `h`, over all nine parameters. Components whose
/// magnitude is below `1e-8` on both sides are compared absolutely.
pub fn nll_gradient_check(
    pred: &GaussianPrediction,
    x: &Triplet,
    h: f64,
    gradient: &[f64; 9],
) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::invalid("h", format!("must lie in [1e-7, 1e-3], got {h}")));
    }
    let base = pred.params();
    let mut worst = 0.0f64;
    for k in 0..9 {
        let mut plus = base;
        let mut minus = base;
        plus[k] += h;
        minus[k] -= h;
        let fd = (nll(x, &GaussianPrediction::from_params(&plus))?
            - nll(x, &GaussianPrediction::from_params(&minus))?)
            / (2.0 * h);
        let scale = fd.abs().max(gradient[k].abs());
        let dev = if scale < 1e-8 {
            (fd - gradient[k]).abs()
        } else {
            (fd - gradient[k]).abs() / scale
        };
        worst = worst.max(dev);
    }
    Ok(worst)
}
