//! Random forest of bootstrapped CART trees.

use ndarray::{ArrayView1, ArrayView2};
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_on, TreeModel, TreeParams};
use crate::error::{LessError, Result};
use crate::scalar::Scalar;
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ForestModel<T: Scalar> {
    pub trees: Vec<TreeModel<T>>,
    pub n_estimators: usize,
    /// Features considered at each split.
    pub max_features: usize,
}

impl<T: Scalar> ForestModel<T> {
    pub fn n_features(&self) -> usize {
        self.trees.first().map_or(0, |t| t.n_features)
    }

    pub fn predict(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n_features() {
            return Err(LessError::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[T]) -> T {
        let sum = self
            .trees
            .iter()
            .fold(T::zero(), |acc, t| acc + t.predict_unchecked(x));
        sum / T::from_count(self.trees.len())
    }
}

/// `ceil(p / 3)`, at least one.
pub fn default_max_features(p: usize) -> usize {
    p.div_ceil(3).max(1)
}

/// One tree on a bootstrap resample (`n` draws with replacement), drawing
/// `max_features` candidate features at each split. All randomness comes
/// from `seed`.
pub fn fit_bootstrapped_tree<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    max_features: usize,
    seed: u64,
) -> TreeModel<T> {
    let mut rng = rng_from_seed(seed);
    let n = x.nrows();
    let samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    fit_tree_on(
        x,
        y,
        samples,
        TreeParams {
            min_samples_split: 2,
            max_features: Some(max_features),
        },
        &mut rng,
    )
}

/// Fits `n_estimators` trees. Per-tree seeds are drawn from `rng` up front,
/// so the trees may be grown concurrently without affecting the result.
pub fn fit_forest<T: Scalar, R: RngCore + ?Sized>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    n_estimators: usize,
    rng: &mut R,
) -> ForestModel<T> {
    let max_features = default_max_features(x.ncols());
    let seeds: Vec<u64> = (0..n_estimators.max(1)).map(|_| rng.next_u64()).collect();
    let x = x.as_standard_layout();
    let x = x.view();
    let trees = seeds
        .par_iter()
        .map(|&s| fit_bootstrapped_tree(x, y, max_features, s))
        .collect();
    ForestModel {
        trees,
        n_estimators: n_estimators.max(1),
        max_features,
    }
}
