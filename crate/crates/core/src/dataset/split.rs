use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::manifest::{DatasetManifest, SplitAssignment};
use crate::error::{Error, Result};

/// 80 % train, 10 % validation, 10 % test.
pub const DEFAULT_FRACTIONS: [f64; 3] = [0.8, 0.1, 0.1];

/// Seeded shuffle of `0..n` cut into contiguous train/validation/test slices.
/// Validation and test get `floor(f·n)` indices; the remainder goes to train.
pub fn split_indices(n: usize, fractions: [f64; 3], seed: u64) -> Result<SplitAssignment> {
    if fractions.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(Error::InvalidFractions(format!(
            "fractions must be positive, got {fractions:?}"
        )));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidFractions(format!(
            "fractions sum to {total}, expected 1"
        )));
    }
    // floor with a little slack so 0.1 * 10 is 1, not 0.999...
    let size = |f: f64| ((f * n as f64) + 1e-9).floor() as usize;
    let n_val = size(fractions[1]);
    let n_test = size(fractions[2]);
    let n_train = n - n_val - n_test;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha12Rng::seed_from_u64(seed));
    let test = order.split_off(n_train + n_val);
    let validation = order.split_off(n_train);
    Ok(SplitAssignment {
        seed,
        fractions,
        train: order,
        validation,
        test,
    })
}

/// Returns a copy of `manifest` carrying the split assignment.
pub fn split(manifest: &DatasetManifest, fractions: [f64; 3], seed: u64) -> Result<DatasetManifest> {
    let assignment = split_indices(manifest.sample_count, fractions, seed)?;
    let mut out = manifest.clone();
    out.split = Some(assignment);
    Ok(out)
}

pub(crate) fn check_partition(split: &SplitAssignment, n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in split.train.iter().chain(&split.validation).chain(&split.test) {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Format(format!(
                "split index {i} is out of range or assigned twice"
            )));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Format("split does not cover every sample".into()));
    }
    Ok(())
}
