//! The subset-stacking regressor.
//!
//! A fit runs `r` independent replications. Each replication
//!
//! 1. builds `m` localized subsets of the (normalized) training inputs,
//! 2. fits one local learner per subset,
//! 3. maps every row `x` to the feature vector `z_j = w_j(x) * local_j(x)`,
//!    where `w_j` decays with the distance from `x` to subset `j`'s centroid,
//! 4. fits a global learner on `(Z, y)`.
//!
//! A prediction averages the replications' global outputs and maps the
//! result back to the original output units.

mod explain;
mod fit;
mod persist;

pub use explain::{local_coefficients, LocalExplanation};
pub use fit::{fit, fit_global_linear, fit_with_threads, GlobalLinearCoefficients};
pub use persist::{MODEL_FORMAT, MODEL_FORMAT_VERSION};

use serde::{Deserialize, Serialize};

use crate::config::{DistanceMetric, LessConfig};
use crate::data::NormStats;
use crate::error::{LessError, Result};
use crate::estimators::Estimator;
use crate::linalg::dot;
use crate::scalar::Scalar;
use crate::weighting::{euclidean, weights_from_distances};

/// How a replication turns its feature vector into a prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GlobalStage<T: Scalar> {
    /// A learner fitted on the feature matrix.
    Learned { model: Estimator<T> },
    /// Sum of the (weighted) local predictions.
    WeightedSum,
    /// Mean of the (unweighted) local predictions.
    Mean,
}

/// Weighted local predictions for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T: Scalar> {
    pub z: Vec<T>,
}

/// State of one replication: local learners, their centroids, and the global stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ReplicationModel<T: Scalar> {
    pub locals: Vec<Estimator<T>>,
    pub centroids: Vec<Vec<T>>,
    pub lambda: T,
    pub distance: DistanceMetric,
    pub normalize_weights: bool,
    /// False for the ablations that drop the distance weights.
    pub weighted: bool,
    pub global: GlobalStage<T>,
}

impl<T: Scalar> ReplicationModel<T> {
    pub fn n_subsets(&self) -> usize {
        self.locals.len()
    }

    pub fn n_features(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n_features() {
            return Err(LessError::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Weights of `x` under this replication's settings; all ones when unweighted.
    pub(crate) fn weights_into(&self, x: &[T], dist: &mut [T], w: &mut [T]) {
        if !self.weighted {
            w.iter_mut().for_each(|v| *v = T::one());
            return;
        }
        for (d, c) in dist.iter_mut().zip(&self.centroids) {
            *d = match self.distance {
                DistanceMetric::Euclidean => euclidean(x, c),
            };
        }
        weights_from_distances(dist, self.lambda, self.normalize_weights, w);
    }

    pub(crate) fn features_into(&self, x: &[T], dist: &mut [T], z: &mut [T]) {
        self.weights_into(x, dist, z);
        for (zj, local) in z.iter_mut().zip(&self.locals) {
            *zj *= local.predict_unchecked(x);
        }
    }

    /// Feature vector of a normalized input.
    pub fn generate_features(&self, x: &[T]) -> Result<FeatureVector<T>> {
        self.check_dim(x)?;
        let m = self.n_subsets();
        let mut dist = vec![T::zero(); m];
        let mut z = vec![T::zero(); m];
        self.features_into(x, &mut dist, &mut z);
        Ok(FeatureVector { z })
    }

    pub(crate) fn combine(&self, z: &[T]) -> T {
        match &self.global {
            GlobalStage::Learned { model } => model.predict_unchecked(z),
            GlobalStage::WeightedSum => z.iter().copied().sum(),
            GlobalStage::Mean => z.iter().copied().sum::<T>() / T::from_count(z.len()),
        }
    }

    /// Prediction in normalized output units for a normalized input.
    pub fn predict_normalized(&self, x: &[T]) -> Result<T> {
        let z = self.generate_features(x)?;
        Ok(self.combine(&z.z))
    }

    /// `z(xs) . z(xt)` for normalized inputs.
    pub fn kernel(&self, xs: &[T], xt: &[T]) -> Result<T> {
        let zs = self.generate_features(xs)?;
        let zt = self.generate_features(xt)?;
        Ok(dot(&zs.z, &zt.z))
    }
}

/// Feature vector of normalized input `x` under replication `rep`.
pub fn generate_features<T: Scalar>(x: &[T], rep: &ReplicationModel<T>) -> Result<FeatureVector<T>> {
    rep.generate_features(x)
}

/// Inner product of the feature vectors of two normalized inputs.
pub fn kernel<T: Scalar>(rep: &ReplicationModel<T>, xs: &[T], xt: &[T]) -> Result<T> {
    rep.kernel(xs, xt)
}

/// A fitted regressor: all replications plus the normalization they were fit under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LessModel<T: Scalar> {
    pub replications: Vec<ReplicationModel<T>>,
    pub norm: NormStats<T>,
    pub config: LessConfig,
    pub feature_names: Option<Vec<String>>,
    pub target_name: Option<String>,
}

impl<T: Scalar> LessModel<T> {
    pub fn n_features(&self) -> usize {
        self.norm.n_features()
    }

    /// Per-replication predictions in normalized units, for a normalized input.
    pub fn replication_predictions(&self, x_norm: &[T]) -> Result<Vec<T>> {
        if x_norm.len() != self.n_features() {
            return Err(LessError::DimensionMismatch {
                expected: self.n_features(),
                found: x_norm.len(),
            });
        }
        let m_max = self.replications.iter().map(|r| r.n_subsets()).max().unwrap_or(0);
        let mut dist = vec![T::zero(); m_max];
        let mut z = vec![T::zero(); m_max];
        Ok(self
            .replications
            .iter()
            .map(|rep| {
                let m = rep.n_subsets();
                rep.features_into(x_norm, &mut dist[..m], &mut z[..m]);
                rep.combine(&z[..m])
            })
            .collect())
    }

    /// Averaged prediction in normalized units for a normalized input.
    /// Replications are summed in their stored order.
    pub fn predict_normalized(&self, x_norm: &[T]) -> Result<T> {
        let preds = self.replication_predictions(x_norm)?;
        let total = preds.iter().fold(T::zero(), |acc, &v| acc + v);
        Ok(total / T::from_count(preds.len()))
    }

    /// Prediction for a raw input, in original output units.
    pub fn predict(&self, x0: &[T]) -> Result<T> {
        let x_norm = self.norm.normalize_row(x0)?;
        Ok(self.norm.denormalize_y(self.predict_normalized(&x_norm)?))
    }

    /// Predictions for every row of a raw input matrix.
    pub fn predict_batch(&self, x: ndarray::ArrayView2<'_, T>) -> Result<Vec<T>> {
        use rayon::prelude::*;
        if x.ncols() != self.n_features() {
            return Err(LessError::DimensionMismatch {
                expected: self.n_features(),
                found: x.ncols(),
            });
        }
        let rows: Vec<Vec<T>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.par_iter().map(|r| self.predict(r)).collect()
    }
}

/// Prediction for a raw input, in original output units.
pub fn predict<T: Scalar>(model: &LessModel<T>, x0: &[T]) -> Result<T> {
    model.predict(x0)
}
